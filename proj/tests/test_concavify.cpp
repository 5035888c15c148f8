#include "oracles.hpp"
#include "test_support.hpp"

#include <infodesign/concavify.hpp>

using namespace infodesign;
using testing_util::expect_bayes_plausible;
using testing_util::expect_support_at_most;
using testing_util::Gen;
using oracles::two_point_search;

TEST(Concavify, IndicatorSplitsAtThreshold) {
    const auto r = concavify(ValueFunction::indicator(0.6), Belief::binary(0.3), 10);
    EXPECT_NEAR(r.value, 0.5, 1e-12);
    ASSERT_EQ(r.structure.support_size(), 2u);
    double w0 = -1, w6 = -1;
    for (const auto& a : r.structure.atoms()) {
        if (std::abs(a.posterior[1]) < 1e-12) w0 = a.weight;
        if (std::abs(a.posterior[1] - 0.6) < 1e-12) w6 = a.weight;
    }
    EXPECT_NEAR(w0, 0.5, 1e-12);
    EXPECT_NEAR(w6, 0.5, 1e-12);
}

TEST(Concavify, ConcaveFunctionIsItsOwnEnvelope) {
    Gen gen(21);
    for (int t = 0; t < 20; ++t) {
        const std::size_t states = static_cast<std::size_t>(gen.integer(2, 3));
        const Belief mu = gen.belief(states);
        const auto r = concavify(ValueFunction::entropy(), mu, 12);
        EXPECT_NEAR(r.value, entropy(mu.probs()), 1e-9);
        EXPECT_EQ(r.structure.support_size(), 1u);
    }
}

TEST(Concavify, ConvexFunctionUsesTheChordBetweenVertices) {
    const auto w = ValueFunction::piecewise_linear({{0.0, 0.5}, {0.5, 0.0}, {1.0, 0.5}});
    const auto r = concavify(w, Belief::binary(0.3), 10);
    EXPECT_NEAR(r.value, 0.5, 1e-12);
    ASSERT_EQ(r.structure.support_size(), 2u);
    for (const auto& a : r.structure.atoms()) {
        if (a.posterior[1] > 0.5)
            EXPECT_NEAR(a.weight, 0.3, 1e-12);
        else
            EXPECT_NEAR(a.weight, 0.7, 1e-12);
    }
}

TEST(Concavify, OffGridPriorIsAlwaysACandidate) {
    const Belief mu = Belief::binary(0.123456);
    const auto r = concavify(ValueFunction::entropy(), mu, 7);
    EXPECT_NEAR(r.value, entropy(mu.probs()), 1e-12);
}

TEST(Concavify, ThreeStateDecisionProblem) {
    // Guess-the-state payoffs: the envelope at any prior is 1 (full revelation).
    const auto w = ValueFunction::decision({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    const Belief mu({0.2, 0.5, 0.3});
    const auto r = concavify(w, mu, 6);
    EXPECT_NEAR(r.value, 1.0, 1e-12);
    expect_bayes_plausible(r.structure, mu);
    expect_support_at_most(r.structure, 3);
}

TEST(Concavify, RejectsZeroResolution) {
    ConcavifyOptions opt;
    opt.resolution = 0;
    EXPECT_THROW(concavify(ValueFunction::entropy(), Belief::binary(0.5), opt), std::invalid_argument);
}

TEST(Property, EnvelopeInvariantsOnRandomFunctions) {
    Gen gen(22);
    for (int t = 0; t < 60; ++t) {
        const std::size_t states = static_cast<std::size_t>(gen.integer(2, 4));
        std::vector<std::vector<double>> pay(static_cast<std::size_t>(gen.integer(1, 4)), std::vector<double>(states));
        for (auto& row : pay)
            for (auto& x : row) x = gen.uniform(-1, 1);
        const auto w = ValueFunction::decision(pay);
        const Belief mu = gen.belief(states);
        const std::size_t d = states == 4 ? 6 : 10;
        const auto r = concavify(w, mu, d);
        expect_bayes_plausible(r.structure, mu);
        expect_support_at_most(r.structure, states);
        EXPECT_GE(r.value, w(mu) - 1e-9);
        EXPECT_NEAR(r.value, expected_value(r.structure, w), 1e-12);
    }
}

TEST(Property, RefinementIsMonotoneAndExactForGridKnots) {
    Gen gen(23);
    for (int t = 0; t < 20; ++t) {
        std::vector<std::pair<double, double>> knots;
        for (int k = 0; k <= 6; ++k) knots.emplace_back(k / 6.0, gen.uniform(-1, 1));
        const auto w = ValueFunction::piecewise_linear(knots);
        const Belief mu = Belief::binary(gen.uniform(0.05, 0.95));
        ConcavifyOptions opt;
        opt.include_knots = false;
        double prev = -1e300;
        for (std::size_t d : {6u, 12u, 24u, 48u}) {
            opt.resolution = d;
            const double v = concavify(w, mu, opt).value;
            EXPECT_GE(v, prev - 1e-12);
            if (prev > -1e300) {
                EXPECT_NEAR(v, prev, 1e-12);
            }
            prev = v;
        }
        opt.resolution = 5;
        double coarse = concavify(w, mu, opt).value;
        opt.resolution = 10;
        EXPECT_GE(concavify(w, mu, opt).value, coarse - 1e-12);
    }
}

TEST(Property, MatchesTwoPointSearchOnSmallGrids) {
    Gen gen(24);
    for (int t = 0; t < 50; ++t) {
        const std::size_t d = static_cast<std::size_t>(gen.integer(2, 12));
        std::vector<std::pair<double, double>> knots;
        for (std::size_t k = 0; k <= d; ++k)
            if (k == 0 || k == d || gen.uniform() < 0.5)
                knots.emplace_back(static_cast<double>(k) / static_cast<double>(d), gen.uniform(-1, 1));
        const auto w = ValueFunction::piecewise_linear(knots);
        const double mu = static_cast<double>(gen.integer(0, static_cast<int>(d))) / static_cast<double>(d);
        ConcavifyOptions opt;
        opt.resolution = d;
        const auto r = concavify(w, Belief::binary(mu), opt);
        EXPECT_NEAR(r.value, two_point_search(w, mu, d), 1e-9);
    }
}

TEST(Caratheodory, CollinearPointsReduceToTwo) {
    std::vector<WeightedPoint> atoms{{0.25, {0.0}}, {0.25, {0.4}}, {0.25, {0.6}}, {0.25, {1.0}}};
    const auto r = caratheodory_reduce(atoms, {0.5});
    EXPECT_LE(r.size(), 2u);
    double mean = 0.0, total = 0.0;
    for (const auto& a : r) {
        mean += a.weight * a.point[0];
        total += a.weight;
    }
    EXPECT_NEAR(mean, 0.5, 1e-12);
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Caratheodory, SmallInputsAreReturnedUnchanged) {
    std::vector<WeightedPoint> atoms{{0.3, {0.0, 1.0}}, {0.7, {1.0, 0.0}}};
    const auto r = caratheodory_reduce(atoms, {0.7, 0.3});
    ASSERT_EQ(r.size(), 2u);
    EXPECT_DOUBLE_EQ(r[0].weight, 0.3);
    EXPECT_EQ(r[1].point, atoms[1].point);
}

TEST(Caratheodory, RejectsWrongTarget) {
    std::vector<WeightedPoint> atoms{{0.5, {0.0}}, {0.5, {1.0}}};
    EXPECT_THROW(caratheodory_reduce(atoms, {0.7}), std::invalid_argument);
}

TEST(Property, CaratheodoryPreservesBarycenterInRandomClouds) {
    Gen gen(25);
    for (int t = 0; t < 200; ++t) {
        const std::size_t m = static_cast<std::size_t>(gen.integer(1, 4));
        const std::size_t k = m + 1 + static_cast<std::size_t>(gen.integer(1, 6));
        std::vector<WeightedPoint> atoms;
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            Point p(m);
            for (auto& x : p) x = gen.uniform(-2, 2);
            atoms.push_back({gen.uniform(0.05, 1.0), p});
            s += atoms.back().weight;
        }
        Point target(m, 0.0);
        for (auto& a : atoms) {
            a.weight /= s;
            for (std::size_t i = 0; i < m; ++i) target[i] += a.weight * a.point[i];
        }
        const auto r = caratheodory_reduce(atoms, target);
        EXPECT_LE(r.size(), m + 1);
        Point bary(m, 0.0);
        for (const auto& a : r) {
            EXPECT_GT(a.weight, 0.0);
            for (std::size_t i = 0; i < m; ++i) bary[i] += a.weight * a.point[i];
        }
        for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(bary[i], target[i], 1e-9);
    }
}
