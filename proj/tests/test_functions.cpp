#include "test_support.hpp"

#include <infodesign/functions.hpp>

using namespace infodesign;
using testing_util::Gen;

TEST(Expression, PrecedenceAndAssociativity) {
    const auto f = RealFunction::expression("1 + 2*v1^2 - v2/4 + 2^3^2", 2);
    EXPECT_DOUBLE_EQ(f(Point{3.0, 8.0}), 1 + 18 - 2 + 512);
    EXPECT_DOUBLE_EQ(RealFunction::expression("-v1^2", 1)(Point{3.0}), -9.0);
    EXPECT_DOUBLE_EQ(RealFunction::expression("(1 - v1) * (1 + v1)", 1)(Point{0.5}), 0.75);
    EXPECT_EQ(f.kind_name(), "custom-expression");
}

TEST(Expression, FunctionsAndBarePrefix) {
    const auto f = RealFunction::expression("min(x, 0.3) + max(x, 2, 1) + abs(x - 1)", 1, 'x');
    EXPECT_DOUBLE_EQ(f(Point{0.5}), 0.3 + 2 + 0.5);
    const auto g = RealFunction::expression("exp(v1) + log(v2) + sqrt(v3)", 3);
    EXPECT_NEAR(g(Point{0.0, 1.0, 4.0}), 3.0, 1e-15);
}

TEST(Expression, GradientsMatchFiniteDifferences) {
    const char* texts[] = {"v1*v2 - 2*(v2 - 0.3)^2", "exp(v1 - v2) / (2 + v1^2)", "sqrt(1 + v1^2 + v2^2)",
                           "v1^v2 + 0*v1", "min(v1, v2) + 3*max(v1, -v2)"};
    Gen gen(51);
    for (const char* t : texts) {
        const auto f = RealFunction::expression(t, 2);
        EXPECT_NO_THROW(f.check_gradient(5, 1e-4, 3));
        for (int k = 0; k < 20; ++k) {
            const Point v{gen.uniform(0.1, 1.0), gen.uniform(0.1, 1.0)};
            const Point g = f.gradient(v), fd = f.numeric_gradient(v);
            if (std::string(t).find("min") != std::string::npos && std::abs(v[0] - v[1]) < 1e-3) continue;
            for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(g[i], fd[i], 1e-5) << t;
        }
    }
}

TEST(Expression, MalformedTextIsASchemaError) {
    for (const char* t : {"v1 +", "v3", "foo(v1)", "v1 v2", "min(v1)", "(v1", "v", "2 $ 3", ""})
        EXPECT_THROW(RealFunction::expression(t, 2), SchemaError) << t;
}

TEST(RealFunction, LinearAndQuadratic) {
    const auto l = RealFunction::linear({1.0, -2.0}, 0.5);
    EXPECT_TRUE(l.is_linear());
    EXPECT_DOUBLE_EQ(l(Point{2.0, 1.0}), 0.5);
    EXPECT_EQ(l.gradient(Point{0.0, 0.0}), (Point{1.0, -2.0}));
    const auto q = RealFunction::quadratic({{-1.0, 0.5}, {0.0, -2.0}}, {1.0, 0.0}, 3.0);
    EXPECT_DOUBLE_EQ(q(Point{1.0, 2.0}), 3.0 + 1.0 - 1.0 + 1.0 - 8.0);
    EXPECT_NO_THROW(q.check_gradient());
    EXPECT_THROW(q(Point{1.0}), std::invalid_argument);
    EXPECT_THROW(RealFunction::quadratic({{1.0}}, {1.0, 2.0}), std::invalid_argument);
}

TEST(RealFunction, CustomGradientIsChecked) {
    auto value = [](std::span<const double> v) { return v[0] * v[0]; };
    const auto good = RealFunction::custom(1, value, [](std::span<const double> v) { return Point{2 * v[0]}; });
    EXPECT_NO_THROW(good.check_gradient());
    const auto bad = RealFunction::custom(1, value, [](std::span<const double> v) { return Point{3 * v[0]}; });
    EXPECT_THROW(bad.check_gradient(), SchemaError);
    const auto none = RealFunction::custom(1, value);
    EXPECT_FALSE(none.has_gradient());
    EXPECT_NEAR(none.gradient(Point{0.7})[0], 1.4, 1e-8);
}
