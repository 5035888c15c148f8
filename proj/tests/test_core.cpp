#include "test_support.hpp"

#include <infodesign/core.hpp>

#include <cmath>

using namespace infodesign;
using testing_util::Gen;

TEST(Belief, RenormalisesAndClipsTinyNegatives) {
    const Belief b({0.2, 0.6, -1e-12});
    EXPECT_DOUBLE_EQ(b[2], 0.0);
    EXPECT_NEAR(b[0] + b[1] + b[2], 1.0, 1e-12);
    const Belief c({2.0, 2.0});
    EXPECT_DOUBLE_EQ(c[0], 0.5);
}

TEST(Belief, RejectsNegativeAndNonFinite) {
    EXPECT_THROW(Belief({0.5, 0.6, -0.1}), std::invalid_argument);
    EXPECT_THROW(Belief({NAN, 1.0}), std::invalid_argument);
    EXPECT_THROW(Belief({0.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(Belief(std::vector<double>{}), std::invalid_argument);
}

TEST(Belief, BinaryStoresSecondStateProbability) {
    const Belief b = Belief::binary(0.3);
    EXPECT_DOUBLE_EQ(b[1], 0.3);
    EXPECT_DOUBLE_EQ(b[0], 0.7);
}

TEST(Entropy, NaturalLogWithZeroConvention) {
    EXPECT_NEAR(entropy(Belief::binary(0.3).probs()), 0.6108643020548935, 1e-12);
    EXPECT_DOUBLE_EQ(entropy(Belief::vertex(3, 1).probs()), 0.0);
    EXPECT_NEAR(entropy(Belief::uniform(4).probs()), std::log(4.0), 1e-12);
}

TEST(Barycenter, AffineAverage) {
    const SignalStructure p({{0.5, Belief({0.2, 0.8})}, {0.5, Belief({0.6, 0.4})}});
    const Belief b = barycenter(p);
    EXPECT_NEAR(b[0], 0.4, 1e-15);
    EXPECT_NEAR(b[1], 0.6, 1e-15);
}

TEST(Barycenter, DegenerateAndFullInformation) {
    const Belief mu({0.1, 0.3, 0.6});
    const Belief b = barycenter(SignalStructure::degenerate(mu));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(b[i], mu[i]);
    const SignalStructure full({{0.5, Belief({1, 0})}, {0.5, Belief({0, 1})}});
    EXPECT_DOUBLE_EQ(barycenter(full)[0], 0.5);
}

TEST(ExpectedValues, EntropyAtPriorAndVertices) {
    const std::vector<ValueFunction> h{ValueFunction::entropy()};
    EXPECT_NEAR(expected_values(SignalStructure::degenerate(Belief({0.3, 0.7})), h)[0], 0.6109, 1e-4);
    const SignalStructure full({{0.5, Belief({0, 1})}, {0.5, Belief({1, 0})}});
    EXPECT_DOUBLE_EQ(expected_values(full, h)[0], 0.0);
}

TEST(ExpectedValues, IndicatorFiresOnOneAtom) {
    const std::vector<ValueFunction> v{ValueFunction::indicator(0.6, 1)};
    const SignalStructure p({{0.5, Belief::vertex(2, 0)}, {0.5, Belief::binary(0.6)}});
    EXPECT_DOUBLE_EQ(expected_values(p, v)[0], 0.5);
}

TEST(Mix, EndpointsAndIdempotence) {
    Gen gen(1);
    const SignalStructure p = gen.structure(3, 4);
    const SignalStructure q = gen.structure(3, 2);
    const SignalStructure pp = mix(p, p, 0.37);
    ASSERT_EQ(pp.support_size(), p.support_size());
    for (std::size_t i = 0; i < p.support_size(); ++i) EXPECT_NEAR(pp.atoms()[i].weight, p.atoms()[i].weight, 1e-15);
    const SignalStructure p1 = mix(p, q, 1.0);
    EXPECT_EQ(p1.support_size(), p.support_size());
}

TEST(Mix, TwoVertexConstruction) {
    const SignalStructure m = mix(SignalStructure::degenerate(Belief({1, 0})),
                                  SignalStructure::degenerate(Belief({0, 1})), 0.3);
    ASSERT_EQ(m.support_size(), 2u);
    EXPECT_DOUBLE_EQ(m.atoms()[0].weight, 0.3);
    EXPECT_DOUBLE_EQ(m.atoms()[1].weight, 0.7);
    EXPECT_NEAR(barycenter(m)[1], 0.7, 1e-15);
}

TEST(Mix, RejectsOutOfRangeWeight) {
    const SignalStructure p = SignalStructure::degenerate(Belief::uniform(2));
    EXPECT_THROW(mix(p, p, 1.5), std::invalid_argument);
}

TEST(SignalStructure, MergesNearDuplicatePosteriors) {
    const SignalStructure p({{0.25, Belief::binary(0.4)}, {0.5, Belief::binary(0.4 + 5e-11)}, {0.25, Belief::binary(0.9)}});
    ASSERT_EQ(p.support_size(), 2u);
    EXPECT_NEAR(p.atoms()[0].weight, 0.75, 1e-15);
}

TEST(SignalStructure, RejectsBadWeights) {
    EXPECT_THROW(SignalStructure({{-0.1, Belief::binary(0.1)}, {1.1, Belief::binary(0.5)}}), std::invalid_argument);
    EXPECT_THROW(SignalStructure({{0.5, Belief::binary(0.1)}}), std::invalid_argument);
    EXPECT_THROW(SignalStructure({{0.5, Belief::binary(0.1)}, {0.5, Belief::uniform(3)}}), std::invalid_argument);
}

TEST(ValueFunction, DecisionUtilityIsMaxOfExpectedPayoffs) {
    const auto f = ValueFunction::decision({{1.0, 0.0}, {0.0, 1.0}});
    EXPECT_DOUBLE_EQ(f(Belief::binary(0.3)), 0.7);
    EXPECT_DOUBLE_EQ(f(Belief::binary(0.5)), 0.5);
}

TEST(ValueFunction, PiecewiseLinearInterpolatesAndExtrapolatesFlat) {
    const auto f = ValueFunction::piecewise_linear({{0.2, 1.0}, {0.6, 3.0}});
    EXPECT_DOUBLE_EQ(f(Belief::binary(0.1)), 1.0);
    EXPECT_DOUBLE_EQ(f(Belief::binary(0.4)), 2.0);
    EXPECT_DOUBLE_EQ(f(Belief::binary(0.9)), 3.0);
    EXPECT_THROW(ValueFunction::piecewise_linear({{0.5, 0.0}, {0.5, 1.0}}), std::invalid_argument);
}

TEST(ValueFunction, TabulatedReproducesGridValuesAndIsLinearInsideCells) {
    const SimplexGrid grid(3, 4);
    std::vector<double> vals;
    for (const auto& p : grid.points()) vals.push_back(2.0 * p[0] - p[1] + 0.5 * p[2]);
    const auto f = ValueFunction::tabulated(grid, vals);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(f(grid.point(i)), vals[i], 1e-12);
    Gen gen(3);
    for (int t = 0; t < 50; ++t) {
        const Belief b = gen.belief(3, 0.0);
        EXPECT_NEAR(f(b), 2.0 * b[0] - b[1] + 0.5 * b[2], 1e-12);
    }
}

TEST(ValueFunction, KnotsOfBinaryKinds) {
    const auto ind = ValueFunction::indicator(0.6);
    ASSERT_EQ(ind.knots(2).size(), 1u);
    EXPECT_DOUBLE_EQ(ind.knots(2)[0][1], 0.6);
    const auto dec = ValueFunction::decision({{1.0, 0.0}, {0.0, 1.0}});
    ASSERT_EQ(dec.knots(2).size(), 1u);
    EXPECT_DOUBLE_EQ(dec.knots(2)[0][1], 0.5);
    EXPECT_TRUE(dec.knots(3).empty());
}

TEST(SimplexGrid, CountAndVertices) {
    const SimplexGrid g(3, 5);
    EXPECT_EQ(g.size(), 21u);
    for (std::size_t x = 0; x < 3; ++x) EXPECT_TRUE(g.find(Belief::vertex(3, x).probs()).has_value());
    EXPECT_EQ(SimplexGrid(4, 6).size(), 84u);
}

TEST(SimplexGrid, RefinementContainsCoarseGrid) {
    for (std::size_t states : {2u, 3u, 4u}) {
        const SimplexGrid coarse(states, 3);
        const SimplexGrid fine(states, 9);
        for (const auto& p : coarse.points()) EXPECT_TRUE(fine.find(p.probs()).has_value());
    }
}

TEST(Property, MixIsLinearInExpectedValues) {
    Gen gen(11);
    const std::vector<ValueFunction> vs{ValueFunction::entropy(), ValueFunction::decision({{1, 0, 0.2}, {0, 1, 0.4}}),
                                        ValueFunction::indicator(0.3, 2)};
    for (int t = 0; t < 200; ++t) {
        const auto p1 = gen.structure(3, static_cast<std::size_t>(gen.integer(1, 5)));
        const auto p2 = gen.structure(3, static_cast<std::size_t>(gen.integer(1, 5)));
        const double beta = gen.uniform();
        const Point e = expected_values(mix(p1, p2, beta), vs);
        const Point e1 = expected_values(p1, vs);
        const Point e2 = expected_values(p2, vs);
        for (std::size_t i = 0; i < vs.size(); ++i) EXPECT_NEAR(e[i], beta * e1[i] + (1 - beta) * e2[i], 1e-12);
    }
}

TEST(Property, JensenForConcaveAndConvexKinds) {
    Gen gen(12);
    const auto h = ValueFunction::entropy();
    const auto u = ValueFunction::decision({{1, 0, 0.3}, {0, 1, 0.3}, {0.2, 0.2, 1}});
    for (int t = 0; t < 200; ++t) {
        const auto p = gen.structure(3, static_cast<std::size_t>(gen.integer(1, 6)));
        const Belief mu = barycenter(p);
        EXPECT_LE(expected_value(p, h), h(mu) + 1e-12);
        EXPECT_GE(expected_value(p, u), u(mu) - 1e-12);
        EXPECT_GE(information(p), -1e-12);
    }
}
