#include "test_support.hpp"

#include <infodesign/geometry.hpp>

#include <cmath>
#include <numbers>

using namespace infodesign;
using testing_util::Gen;

TEST(NearestPoint, SquareFromOutsideAndInside) {
    const std::vector<Point> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    const auto a = nearest_point(sq, Point{2.0, 0.5});
    EXPECT_NEAR(a.distance, 1.0, 1e-12);
    EXPECT_NEAR(a.point[0], 1.0, 1e-12);
    EXPECT_NEAR(a.point[1], 0.5, 1e-12);
    EXPECT_NEAR(distance_to_hull(sq, Point{0.3, 0.6}), 0.0, 1e-12);
    EXPECT_NEAR(distance_to_hull(sq, Point{2.0, 2.0}), std::sqrt(2.0), 1e-12);
}

TEST(NearestPoint, WeightsReproduceThePoint) {
    Gen gen(31);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = static_cast<std::size_t>(gen.integer(1, 4));
        std::vector<Point> vs(static_cast<std::size_t>(gen.integer(1, 10)), Point(n));
        for (auto& v : vs)
            for (auto& x : v) x = gen.uniform(-1, 1);
        Point x(n);
        for (auto& c : x) c = gen.uniform(-2, 2);
        const auto r = nearest_point(vs, x);
        Point y(n, 0.0);
        double s = 0.0;
        for (std::size_t i = 0; i < vs.size(); ++i) {
            EXPECT_GE(r.weights[i], 0.0);
            s += r.weights[i];
            for (std::size_t d = 0; d < n; ++d) y[d] += r.weights[i] * vs[i][d];
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
        EXPECT_LE(distance(y, r.point), 1e-12);
        // Optimality: (x - y) . (v - y) <= 0 for every vertex v.
        for (const auto& v : vs) EXPECT_LE(dot(subtract(x, y), subtract(v, y)), 1e-9);
    }
}

TEST(AffineHull, DetectsSegmentInThePlane) {
    const std::vector<Point> pts{{0, 0}, {1, 1}, {0.5, 0.5}, {2, 2}};
    const AffineHull h(pts);
    EXPECT_EQ(h.dimension(), 1u);
    ASSERT_EQ(h.complement().size(), 1u);
    EXPECT_NEAR(std::abs(dot(h.complement()[0], Point{1, 1})), 0.0, 1e-12);
    const Point p{1.5, 1.5};
    EXPECT_LE(distance(h.lift(h.coordinates(p)), p), 1e-12);
}

TEST(HullFacets, SquareAndCube) {
    const std::vector<Point> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
    EXPECT_EQ(hull_facets(sq).size(), 4u);
    std::vector<Point> cube;
    for (int i = 0; i < 8; ++i) cube.push_back({double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1)});
    cube.push_back({0.5, 0.5, 0.5});
    const auto f = hull_facets(cube);
    EXPECT_EQ(f.size(), 6u);
    for (const auto& h : f)
        for (const auto& p : cube) EXPECT_LE(dot(h.normal, p) - h.offset, 1e-12);
}

TEST(HalfspaceVertices, RegularPolygonRoundTrip) {
    std::vector<Halfspace> hs;
    for (int k = 0; k < 8; ++k) {
        const double t = 2 * std::numbers::pi * k / 8.0;
        hs.push_back({{std::cos(t), std::sin(t)}, 1.0});
    }
    const auto v = halfspace_vertices(hs);
    EXPECT_EQ(v.size(), 8u);
    for (const auto& p : v) EXPECT_NEAR(norm2(p), 1.0 / std::cos(std::numbers::pi / 8), 1e-12);
}

TEST(Hausdorff, TranslatedSquares) {
    const std::vector<Point> a{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    std::vector<Point> b = a;
    for (auto& p : b) p[0] += 0.25;
    EXPECT_NEAR(hausdorff(a, b), 0.25, 1e-12);
    EXPECT_NEAR(hausdorff(a, a), 0.0, 1e-12);
}
