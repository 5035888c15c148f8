#pragma once

// Real-valued objective and constraint functions on R^n: linear, quadratic,
// parsed arithmetic expressions and user callables, all with gradients.

#include "errors.hpp"
#include "linalg.hpp"

#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace infodesign {

namespace expr {

/// Value together with its gradient (forward-mode differentiation).
struct Dual {
    double v = 0.0;
    Point d;
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Min, Max, Abs, Exp, Log, Sqrt };
    Op op = Op::Const;
    double value = 0.0;
    std::size_t var = 0;
    std::vector<NodePtr> args;
};

inline Dual constant(double v, std::size_t n) { return {v, Point(n, 0.0)}; }

inline Dual eval(const Node& node, std::span<const double> x) {
    using Op = Node::Op;
    const std::size_t n = x.size();
    auto unary = [&](double v, double dv, const Dual& a) {
        Dual r{v, Point(n)};
        for (std::size_t i = 0; i < n; ++i) r.d[i] = dv * a.d[i];
        return r;
    };
    switch (node.op) {
    case Op::Const: return constant(node.value, n);
    case Op::Var: {
        Dual r = constant(x[node.var], n);
        r.d[node.var] = 1.0;
        return r;
    }
    case Op::Neg: {
        const Dual a = eval(*node.args[0], x);
        return unary(-a.v, -1.0, a);
    }
    case Op::Abs: {
        const Dual a = eval(*node.args[0], x);
        return unary(std::abs(a.v), a.v < 0.0 ? -1.0 : 1.0, a);
    }
    case Op::Exp: {
        const Dual a = eval(*node.args[0], x);
        const double e = std::exp(a.v);
        return unary(e, e, a);
    }
    case Op::Log: {
        const Dual a = eval(*node.args[0], x);
        return unary(std::log(a.v), 1.0 / a.v, a);
    }
    case Op::Sqrt: {
        const Dual a = eval(*node.args[0], x);
        const double s = std::sqrt(a.v);
        return unary(s, s > 0.0 ? 0.5 / s : 0.0, a);
    }
    case Op::Min:
    case Op::Max: {
        Dual best = eval(*node.args[0], x);
        for (std::size_t k = 1; k < node.args.size(); ++k) {
            Dual c = eval(*node.args[k], x);
            if (node.op == Op::Min ? c.v < best.v : c.v > best.v) best = std::move(c);
        }
        return best;
    }
    default: break;
    }
    const Dual a = eval(*node.args[0], x);
    const Dual b = eval(*node.args[1], x);
    Dual r{0.0, Point(n)};
    switch (node.op) {
    case Op::Add:
        r.v = a.v + b.v;
        for (std::size_t i = 0; i < n; ++i) r.d[i] = a.d[i] + b.d[i];
        break;
    case Op::Sub:
        r.v = a.v - b.v;
        for (std::size_t i = 0; i < n; ++i) r.d[i] = a.d[i] - b.d[i];
        break;
    case Op::Mul:
        r.v = a.v * b.v;
        for (std::size_t i = 0; i < n; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
        break;
    case Op::Div:
        r.v = a.v / b.v;
        for (std::size_t i = 0; i < n; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) / (b.v * b.v);
        break;
    case Op::Pow: {
        r.v = std::pow(a.v, b.v);
        const bool const_exp = norm_inf(b.d) == 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double g = b.v == 0.0 ? 0.0 : b.v * std::pow(a.v, b.v - 1.0) * a.d[i];
            if (!const_exp && a.v > 0.0) g += r.v * std::log(a.v) * b.d[i];
            r.d[i] = g;
        }
        break;
    }
    default: break;
    }
    return r;
}

/**
 * Recursive-descent parser for
 *   expr  := term (('+' | '-') term)*
 *   term  := unary (('*' | '/') unary)*
 *   unary := '-' unary | power
 *   power := atom ('^' unary)?
 *   atom  := number | variable | name '(' expr (',' expr)* ')' | '(' expr ')'
 * Variables are `prefix` followed by a 1-based index (v1, v2, ...), or the
 * bare prefix when there is a single variable. Functions: min, max, abs,
 * exp, log, sqrt.
 */
class Parser {
public:
    Parser(std::string text, std::size_t dims, char prefix) : s_(std::move(text)), dims_(dims), prefix_(prefix) {}

    NodePtr parse() {
        NodePtr e = expression();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw SchemaError("expression \"" + s_ + "\" at offset " + std::to_string(pos_) + ": " + why);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    static NodePtr make(Node::Op op, std::vector<NodePtr> args) {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->args = std::move(args);
        return n;
    }
    NodePtr expression() {
        NodePtr lhs = term();
        while (true) {
            if (accept('+'))
                lhs = make(Node::Op::Add, {lhs, term()});
            else if (accept('-'))
                lhs = make(Node::Op::Sub, {lhs, term()});
            else
                return lhs;
        }
    }
    NodePtr term() {
        NodePtr lhs = unary();
        while (true) {
            if (accept('*'))
                lhs = make(Node::Op::Mul, {lhs, unary()});
            else if (accept('/'))
                lhs = make(Node::Op::Div, {lhs, unary()});
            else
                return lhs;
        }
    }
    NodePtr unary() {
        if (accept('-')) return make(Node::Op::Neg, {unary()});
        if (accept('+')) return unary();
        return power();
    }
    NodePtr power() {
        NodePtr base = atom();
        if (accept('^')) return make(Node::Op::Pow, {base, unary()});
        return base;
    }
    NodePtr atom() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        if (accept('(')) {
            NodePtr e = expression();
            if (!accept(')')) fail("missing ')'");
            return e;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(s_.substr(pos_), &used);
            } catch (const std::exception&) {
                fail("bad number");
            }
            pos_ += used;
            auto n = std::make_shared<Node>();
            n->value = v;
            return n;
        }
        if (!std::isalpha(static_cast<unsigned char>(c))) fail("unexpected '" + std::string(1, c) + "'");
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        const std::string name = s_.substr(start, pos_ - start);
        if (name.size() == 1 && name[0] == prefix_) {
            std::size_t idx = 1;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                idx = 0;
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
                    idx = idx * 10 + static_cast<std::size_t>(s_[pos_++] - '0');
            } else if (dims_ != 1) {
                fail("variable needs an index");
            }
            if (idx < 1 || idx > dims_) fail("variable index out of range");
            auto n = std::make_shared<Node>();
            n->op = Node::Op::Var;
            n->var = idx - 1;
            return n;
        }
        Node::Op op;
        if (name == "min")
            op = Node::Op::Min;
        else if (name == "max")
            op = Node::Op::Max;
        else if (name == "abs")
            op = Node::Op::Abs;
        else if (name == "exp")
            op = Node::Op::Exp;
        else if (name == "log")
            op = Node::Op::Log;
        else if (name == "sqrt")
            op = Node::Op::Sqrt;
        else
            fail("unknown name '" + name + "'");
        if (!accept('(')) fail("expected '(' after " + name);
        std::vector<NodePtr> args{expression()};
        while (accept(',')) args.push_back(expression());
        if (!accept(')')) fail("missing ')'");
        const bool variadic = op == Node::Op::Min || op == Node::Op::Max;
        if (variadic ? args.size() < 2 : args.size() != 1) fail("wrong number of arguments to " + name);
        return make(op, std::move(args));
    }

    std::string s_;
    std::size_t pos_ = 0;
    std::size_t dims_;
    char prefix_;
};

} // namespace expr

/**
 * A function R^n -> R with a gradient.
 *
 * Linear: c + a.v.  Quadratic: c + b.v + v'Qv.  Expression: parsed text with
 * forward-mode derivatives.  Custom: user callables; when no gradient is
 * given, central differences are used.
 */
class RealFunction {
public:
    struct Linear {
        Point coeffs;
        double constant = 0.0;
    };
    struct Quadratic {
        std::vector<Point> q;
        Point b;
        double c = 0.0;
    };
    struct Expression {
        std::string text;
        expr::NodePtr root;
    };
    struct Custom {
        std::function<double(std::span<const double>)> value;
        std::function<Point(std::span<const double>)> gradient;
    };
    using Kind = std::variant<Linear, Quadratic, Expression, Custom>;

    RealFunction() : RealFunction(linear({})) {}

    static RealFunction linear(Point coeffs, double constant = 0.0) {
        const std::size_t n = coeffs.size();
        return RealFunction(Linear{std::move(coeffs), constant}, n);
    }
    static RealFunction quadratic(std::vector<Point> q, Point b, double c = 0.0) {
        const std::size_t n = b.size();
        if (q.size() != n) throw std::invalid_argument("quadratic matrix has wrong size");
        for (const auto& row : q)
            if (row.size() != n) throw std::invalid_argument("quadratic matrix is not square");
        return RealFunction(Quadratic{std::move(q), std::move(b), c}, n);
    }
    static RealFunction expression(std::string text, std::size_t dims, char prefix = 'v') {
        auto root = expr::Parser(text, dims, prefix).parse();
        return RealFunction(Expression{std::move(text), std::move(root)}, dims);
    }
    static RealFunction custom(std::size_t dims, std::function<double(std::span<const double>)> value,
                               std::function<Point(std::span<const double>)> gradient = {}) {
        return RealFunction(Custom{std::move(value), std::move(gradient)}, dims);
    }

    const Kind& kind() const noexcept { return kind_; }
    std::size_t dimension() const noexcept { return dims_; }
    std::string kind_name() const {
        static constexpr const char* names[] = {"linear", "quadratic", "custom-expression", "custom"};
        return names[kind_.index()];
    }
    bool is_linear() const { return std::holds_alternative<Linear>(kind_); }
    /// True when the gradient is analytic rather than finite-differenced.
    bool has_gradient() const {
        const auto* c = std::get_if<Custom>(&kind_);
        return !c || static_cast<bool>(c->gradient);
    }

    double operator()(std::span<const double> v) const {
        check(v);
        return std::visit([&](const auto& k) { return value(k, v); }, kind_);
    }

    Point gradient(std::span<const double> v) const {
        check(v);
        if (const auto* c = std::get_if<Custom>(&kind_)) {
            if (c->gradient) return c->gradient(v);
            return numeric_gradient(v);
        }
        return std::visit([&](const auto& k) { return grad(k, v); }, kind_);
    }

    Point numeric_gradient(std::span<const double> v, double h = 1e-6) const {
        Point x(v.begin(), v.end()), g(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double s = h * std::max(1.0, std::abs(v[i]));
            x[i] = v[i] + s;
            const double up = (*this)(x);
            x[i] = v[i] - s;
            const double dn = (*this)(x);
            x[i] = v[i];
            g[i] = (up - dn) / (2.0 * s);
        }
        return g;
    }

    /**
     * Compares the gradient with central differences at `points` random points
     * of [-1, 1]^n (seeded); throws SchemaError on a relative mismatch above tol.
     */
    void check_gradient(std::size_t points = 5, double tol = 1e-4, std::uint64_t seed = 0) const {
        if (!has_gradient()) return;
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (std::size_t k = 0; k < points; ++k) {
            Point v(dims_);
            for (auto& x : v) x = u(rng);
            const Point g = gradient(v), fd = numeric_gradient(v);
            for (std::size_t i = 0; i < dims_; ++i)
                if (std::abs(g[i] - fd[i]) > tol * std::max(1.0, std::abs(fd[i])))
                    throw SchemaError("gradient of " + kind_name() + " function disagrees with finite differences");
        }
    }

private:
    RealFunction(Kind k, std::size_t dims) : kind_(std::move(k)), dims_(dims) {}

    void check(std::span<const double> v) const {
        if (v.size() != dims_) throw std::invalid_argument("function argument has wrong dimension");
    }

    static double value(const Linear& k, std::span<const double> v) { return k.constant + dot(k.coeffs, v); }
    static double value(const Quadratic& k, std::span<const double> v) {
        double s = k.c + dot(k.b, v);
        for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * dot(k.q[i], v);
        return s;
    }
    static double value(const Expression& k, std::span<const double> v) { return expr::eval(*k.root, v).v; }
    static double value(const Custom& k, std::span<const double> v) { return k.value(v); }

    static Point grad(const Linear& k, std::span<const double>) { return k.coeffs; }
    static Point grad(const Quadratic& k, std::span<const double> v) {
        Point g = k.b;
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = 0; j < v.size(); ++j) g[i] += (k.q[i][j] + k.q[j][i]) * v[j];
        return g;
    }
    static Point grad(const Expression& k, std::span<const double> v) { return expr::eval(*k.root, v).d; }
    static Point grad(const Custom&, std::span<const double>) { return {}; }

    Kind kind_;
    std::size_t dims_ = 0;
};

} // namespace infodesign
