#include "test_support.hpp"

#include <infodesign/posset.hpp>

using namespace infodesign;
using testing_util::expect_bayes_plausible;
using testing_util::expect_support_at_most;
using testing_util::Gen;

namespace {

// Indicator of Pr(x1) >= 0.6 together with entropy, at Pr(x1) = 0.3.
std::vector<ValueFunction> instance_a() { return {ValueFunction::indicator(0.6, 1), ValueFunction::entropy()}; }
const Belief kPriorA = Belief::binary(0.3);

double binary_entropy(double p) { return entropy(Belief::binary(p).probs()); }

} // namespace

TEST(Directions, CountsAndNesting) {
    EXPECT_EQ(sample_directions(1, 16).size(), 2u);
    const auto d16 = sample_directions(2, 16);
    const auto d32 = sample_directions(2, 32);
    for (std::size_t k = 0; k < 16; ++k) EXPECT_EQ(d16[k], d32[2 * k]);
    for (std::size_t n : {3u, 4u, 5u, 8u})
        for (const auto& d : sample_directions(n, 20)) EXPECT_NEAR(norm2(d), 1.0, 1e-12);
    EXPECT_THROW(sample_directions(3, 3), std::invalid_argument);
    EXPECT_EQ(default_direction_count(2), 16u);
    EXPECT_EQ(default_direction_count(8), 18u);
}

TEST(SupportPoint, IndicatorAlone) {
    const auto s = support_point(Point{1.0}, kPriorA, {ValueFunction::indicator(0.6)});
    EXPECT_NEAR(s.h, 0.5, 1e-12);
    EXPECT_NEAR(s.point[0], 0.5, 1e-12);
    EXPECT_EQ(s.witness.support_size(), 2u);
}

TEST(SupportPoint, EntropyDirectionGivesNoInformation) {
    const auto s = support_point(Point{0.0, 1.0}, kPriorA, instance_a());
    EXPECT_NEAR(s.h, binary_entropy(0.3), 1e-12);
    EXPECT_NEAR(s.point[1], binary_entropy(0.3), 1e-12);
    EXPECT_EQ(s.witness.support_size(), 1u);
}

TEST(SupportPoint, IndicatorDirectionOnInstanceA) {
    const auto s = support_point(Point{1.0, 0.0}, kPriorA, instance_a());
    EXPECT_NEAR(s.point[0], 0.5, 1e-12);
    EXPECT_NEAR(s.point[1], 0.5 * binary_entropy(0.6), 1e-12);
    EXPECT_NEAR(s.point[1], 0.3365, 1e-4);
}

TEST(SupportPoint, NormalisesDirectionAndRejectsZero) {
    const SupportOracle oracle(kPriorA, instance_a(), {});
    const auto s = oracle(Point{3.0, 4.0});
    EXPECT_NEAR(norm2(s.direction), 1.0, 1e-15);
    EXPECT_THROW(oracle(Point{0.0, 0.0}), std::invalid_argument);
}

TEST(ApproximateSet, IntervalForOneFunction) {
    const auto set = approximate_set(kPriorA, {ValueFunction::indicator(0.6)}, 16);
    double lo = 1e9, hi = -1e9;
    for (const auto& v : set.inner_vertices) {
        lo = std::min(lo, v[0]);
        hi = std::max(hi, v[0]);
    }
    EXPECT_NEAR(lo, 0.0, 1e-12);
    EXPECT_NEAR(hi, 0.5, 1e-12);
    EXPECT_NEAR(set.sandwich_gap(), 0.0, 1e-12);
}

TEST(ApproximateSet, IdenticalCoordinatesGiveADiagonalSegment) {
    const auto v = ValueFunction::indicator(0.6);
    const auto set = approximate_set(kPriorA, {v, v}, 16);
    for (const auto& s : set.samples) EXPECT_NEAR(s.point[0], s.point[1], 1e-12);
    EXPECT_EQ(AffineHull(set.inner_vertices).dimension(), 1u);
    const Point mid{0.25, 0.25};
    EXPECT_EQ(membership(set, mid), Membership::Inside);
    EXPECT_EQ(membership(set, Point{0.3, 0.2}), Membership::Outside);
}

TEST(ApproximateSet, SandwichAndWitnessInvariants) {
    const auto set = approximate_set(kPriorA, instance_a(), 32);
    for (const auto& s : set.samples) {
        EXPECT_NEAR(dot(s.direction, s.point), s.h, 1e-8);
        const Point e = expected_values(s.witness, set.vfuncs);
        for (std::size_t i = 0; i < e.size(); ++i) EXPECT_NEAR(e[i], s.point[i], 1e-8);
        expect_support_at_most(s.witness, 2);
        expect_bayes_plausible(s.witness, kPriorA);
    }
    for (const auto& v : set.inner_vertices)
        for (const auto& s : set.samples) EXPECT_LE(dot(s.direction, v), s.h + 1e-8);
}

TEST(ApproximateSet, DoublingDirectionsNeverWidensTheGap) {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k : {8u, 16u, 32u, 64u}) {
        const double gap = approximate_set(kPriorA, instance_a(), k).sandwich_gap();
        EXPECT_LE(gap, prev + 1e-12);
        prev = gap;
    }
}

TEST(Membership, BasicVerdicts) {
    const auto set = approximate_set(kPriorA, instance_a(), 32);
    EXPECT_EQ(membership(set, Point{0.0, binary_entropy(0.3)}), Membership::Inside);
    EXPECT_EQ(membership(set, Point{1.2, 0.1}), Membership::Outside);
    const auto& a = set.samples[3].point;
    const auto& b = set.samples[20].point;
    EXPECT_EQ(membership(set, Point{(a[0] + b[0]) / 2, (a[1] + b[1]) / 2}), Membership::Inside);
}

TEST(Membership, GapRegionIsIndeterminate) {
    const auto set = approximate_set(kPriorA, instance_a(), 4);
    // Midpoint between an outer vertex and its nearest inner point.
    const auto outer = set.outer_vertices();
    double worst = 0.0;
    Point probe;
    for (const auto& o : outer) {
        const auto np = nearest_point(set.inner_vertices, o);
        if (np.distance > worst) {
            worst = np.distance;
            probe = Point{(o[0] + np.point[0]) / 2, (o[1] + np.point[1]) / 2};
        }
    }
    ASSERT_GT(worst, 1e-3);
    EXPECT_THROW(membership(set, probe), Indeterminate);
}

TEST(ImplementPoint, SupportPointReturnsItsWitness) {
    const auto set = approximate_set(kPriorA, instance_a(), 16);
    const auto& s = set.samples[5];
    const auto p = implement_point(set, s.point);
    expect_support_at_most(p, 2);
    const Point e = expected_values(p, set.vfuncs);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(e[i], s.point[i], 1e-9);
}

TEST(ImplementPoint, OppositeDirectionsMix) {
    const SupportOracle oracle(kPriorA, instance_a(), {});
    const auto set = approximate_set(oracle, 16);
    const auto a = oracle(Point{1.0, 0.3});
    const auto b = oracle(Point{-1.0, -0.3});
    const Point v{(a.point[0] + b.point[0]) / 2, (a.point[1] + b.point[1]) / 2};
    const auto p = implement_point(set, v);
    expect_support_at_most(p, 4);
    expect_bayes_plausible(p, kPriorA);
}

TEST(ImplementPoint, InteriorPointOfInstanceA) {
    const auto set = approximate_set(kPriorA, instance_a(), 32);
    const Point v{0.25, 0.47};
    ASSERT_NE(membership(set, v), Membership::Outside);
    const auto p = implement_point(set, v);
    expect_support_at_most(p, 6);
    expect_bayes_plausible(p, kPriorA);
    const Point e = expected_values(p, set.vfuncs);
    EXPECT_NEAR(e[0], 0.25, 1e-6);
    EXPECT_NEAR(e[1], 0.47, 1e-6);
}

TEST(ImplementPoint, OutsidePointThrows) {
    const auto set = approximate_set(kPriorA, instance_a(), 16);
    EXPECT_THROW(implement_point(set, Point{2.0, 0.0}), NotInSet);
}

TEST(Property, RandomMixturesOfInnerPointsAreImplementable) {
    Gen gen(41);
    const auto set = approximate_set(kPriorA, instance_a(), 32);
    for (int t = 0; t < 50; ++t) {
        Point v(2, 0.0);
        double s = 0.0;
        std::vector<double> w(set.inner_vertices.size());
        for (auto& x : w) {
            x = gen.uniform() < 0.3 ? gen.uniform() : 0.0;
            s += x;
        }
        if (s == 0.0) continue;
        for (std::size_t j = 0; j < w.size(); ++j)
            for (std::size_t i = 0; i < 2; ++i) v[i] += w[j] / s * set.inner_vertices[j][i];
        ASSERT_NE(membership(set, v), Membership::Outside);
        const auto p = implement_point(set, v);
        expect_support_at_most(p, 6);
        expect_bayes_plausible(p, kPriorA);
        const Point e = expected_values(p, set.vfuncs);
        for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(e[i], v[i], 1e-6);
    }
}

TEST(Property, GraphConvexityByMixingWitnesses) {
    Gen gen(42);
    const auto vs = instance_a();
    for (int t = 0; t < 20; ++t) {
        const Belief m1 = Belief::binary(gen.uniform(0.05, 0.95));
        const Belief m2 = Belief::binary(gen.uniform(0.05, 0.95));
        const SupportOracle o1(m1, vs, {}), o2(m2, vs, {});
        const auto s1 = o1(Point{gen.uniform(-1, 1), gen.uniform(-1, 1)});
        const auto s2 = o2(Point{gen.uniform(-1, 1), gen.uniform(-1, 1)});
        const double alpha = gen.uniform();
        const auto p = mix(s1.witness, s2.witness, alpha);
        const Belief target({alpha * m1[0] + (1 - alpha) * m2[0], alpha * m1[1] + (1 - alpha) * m2[1]});
        expect_bayes_plausible(p, target);
        const Point e = expected_values(p, vs);
        for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(e[i], alpha * s1.point[i] + (1 - alpha) * s2.point[i], 1e-12);
    }
}

TEST(ContinuityProbe, ConstantSequenceAndRefinement) {
    const auto vs = instance_a();
    const auto same = continuity_probe({kPriorA, kPriorA, kPriorA}, vs, 16);
    for (double d : same) EXPECT_NEAR(d, 0.0, 1e-12);

    auto sweep = [&](int steps) {
        std::vector<Belief> mus;
        for (int i = 0; i <= steps; ++i) mus.push_back(Belief::binary(0.2 + 0.2 * i / steps));
        const auto d = continuity_probe(mus, vs, 16);
        return *std::max_element(d.begin(), d.end());
    };
    const double coarse = sweep(8), fine = sweep(16);
    EXPECT_LT(fine, coarse);
    EXPECT_NEAR(fine / coarse, 0.5, 0.15);
}

TEST(ContinuityProbe, ApproachingAVertexStaysFinite) {
    std::vector<Belief> mus;
    for (int k = 1; k <= 8; ++k) mus.push_back(Belief::binary(std::pow(0.5, k)));
    const auto d = continuity_probe(mus, instance_a(), 16);
    for (double x : d) EXPECT_TRUE(std::isfinite(x));
    EXPECT_LT(d.back(), d.front());
}
