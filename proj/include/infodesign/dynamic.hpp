#pragma once

// Dynamic information acquisition with an entropy-based cost:
//     V(mu) = max{ F(mu), sup_P beta E_P[V(nu)] - f(E_P[H(mu) - H(nu)]) },
//     E_P[H(mu) - H(nu)] <= C,
// on a simplex grid, and the static rational-inattention fixed point.

#include "concavify.hpp"
#include "core.hpp"
#include "errors.hpp"
#include "functions.hpp"
#include "parallel.hpp"
#include "simplex_lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace infodesign {

/// Cost f of acquiring x nats of information: intercept + slope x, scale x^p,
/// or an expression in x.
class InformationCost {
public:
    struct Linear {
        double slope = 0.0;
        double intercept = 0.0;
    };
    struct Power {
        double scale = 1.0;
        double exponent = 1.0;
    };
    struct Expression {
        RealFunction fn;
    };
    using Kind = std::variant<Linear, Power, Expression>;

    InformationCost() : kind_(Linear{}) {}
    static InformationCost linear(double slope, double intercept = 0.0) { return InformationCost(Linear{slope, intercept}); }
    static InformationCost power(double scale, double exponent) {
        if (exponent < 1.0) throw std::invalid_argument("power cost needs an exponent of at least 1");
        return InformationCost(Power{scale, exponent});
    }
    static InformationCost expression(const std::string& text) {
        return InformationCost(Expression{RealFunction::expression(text, 1, 'x')});
    }

    const Kind& kind() const noexcept { return kind_; }
    std::string kind_name() const {
        static constexpr const char* names[] = {"linear", "power", "custom-expression"};
        return names[kind_.index()];
    }
    bool is_linear() const { return std::holds_alternative<Linear>(kind_); }

    double operator()(double x) const {
        if (const auto* l = std::get_if<Linear>(&kind_)) return l->intercept + l->slope * x;
        if (const auto* p = std::get_if<Power>(&kind_)) return p->scale * std::pow(std::max(x, 0.0), p->exponent);
        const double v[1] = {x};
        return std::get<Expression>(kind_).fn(v);
    }
    double derivative(double x) const {
        if (const auto* l = std::get_if<Linear>(&kind_)) return l->slope;
        if (const auto* p = std::get_if<Power>(&kind_))
            return p->exponent == 1.0 ? p->scale : p->scale * p->exponent * std::pow(std::max(x, 0.0), p->exponent - 1.0);
        const double v[1] = {x};
        return std::get<Expression>(kind_).fn.gradient(v)[0];
    }
    /// Second differences on [0, xmax] are nonnegative up to round-off.
    bool is_convex(double xmax) const {
        if (!std::holds_alternative<Expression>(kind_)) return true;
        const int steps = 200;
        const double h = xmax / steps;
        for (int i = 1; i < steps; ++i) {
            const double x = i * h;
            const double second = (*this)(x + h) - 2.0 * (*this)(x) + (*this)(x - h);
            if (second < -1e-10 * (1.0 + std::abs((*this)(x)))) return false;
        }
        return true;
    }

private:
    explicit InformationCost(Kind k) : kind_(std::move(k)) {}
    Kind kind_;
};

struct DynamicSpec {
    ValueFunction stop_payoff;
    ValueFunction entropy_fn = ValueFunction::entropy();
    InformationCost cost;
    double discount = 0.9;
    double capacity = std::numeric_limits<double>::infinity();
    std::size_t states = 2;
    std::size_t resolution = 40;

    SimplexGrid grid() const { return SimplexGrid(states, resolution); }

    void validate() const {
        if (!(discount > 0.0 && discount < 1.0)) throw SchemaError("discount must lie in (0, 1)");
        if (!(capacity >= 0.0)) throw SchemaError("capacity must be nonnegative");
        if (states < 2) throw SchemaError("at least two states are required");
        if (resolution < 1) throw SchemaError("grid resolution must be positive");
        const SimplexGrid g = grid();
        for (const auto& b : g.points())
            if (stop_payoff(b) < -1e-12) throw SchemaError("stopping payoff must be nonnegative");
        const double hmax = std::log(static_cast<double>(states));
        for (int i = 0; i <= 100; ++i)
            if (cost(hmax * i / 100.0) < -1e-12) throw SchemaError("information cost must be nonnegative");
    }
};

/// Values on the grid points; off-grid queries interpolate barycentrically.
struct ValueTable {
    SimplexGrid grid;
    std::vector<double> values;

    double operator()(std::span<const double> mu) const {
        if (const auto g = grid.find(mu)) return values[*g];
        double v = 0.0;
        for (const auto& [idx, w] : grid.interpolation_stencil(mu)) v += w * values[idx];
        return v;
    }
    double operator()(const Belief& mu) const { return (*this)(mu.probs()); }

    ValueFunction as_function() const { return ValueFunction::tabulated(grid, values); }
};

inline double sup_distance(const ValueTable& a, const ValueTable& b) {
    if (a.values.size() != b.values.size()) throw std::invalid_argument("tables live on different grids");
    double d = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
    return d;
}

inline ValueTable tabulate(const ValueFunction& f, const SimplexGrid& grid) {
    ValueTable t{grid, std::vector<double>(grid.size())};
    for (std::size_t i = 0; i < grid.size(); ++i) t.values[i] = f(grid.point(i));
    return t;
}

/// Concave envelope of f on the grid, using grid posteriors only.
inline ValueTable concave_envelope_table(const ValueFunction& f, const SimplexGrid& grid) {
    const ValueTable base = tabulate(f, grid);
    ValueTable t{grid, std::vector<double>(grid.size())};
    const auto pts = grid.points();
    t.values = parallel_map(grid.size(), [&](std::size_t i) {
        return solve_envelope(pts, base.values, grid.point(i)).objective;
    });
    return t;
}

/// Solution of the Bellman maximisation at one grid point.
struct BellmanPoint {
    double value = 0.0;
    bool stop = true;
    /// Optimal learning structure (atoms on the grid) and its information.
    SignalStructure structure;
    double information = 0.0;
    double learning_value = 0.0;
};

namespace detail {

struct GridProblem {
    std::span<const Belief> points;
    std::vector<double> continuation;
    std::vector<double> entropy;
};

/// Envelope program with one extra row on E_P[H]; none when infeasible.
inline std::optional<EnvelopeSolution> entropy_row_lp(const GridProblem& gp, const Belief& mu, const std::vector<double>& obj,
                                                      double target, RowSense sense) {
    const WeightConstraint row{gp.entropy, sense, target};
    try {
        return solve_envelope(gp.points, obj, mu, std::span<const WeightConstraint>(&row, 1));
    } catch (const InfeasiblePrior&) {
        return std::nullopt;
    }
}

} // namespace detail

/**
 * sup over grid-supported Bayes-plausible P of beta E_P[V] - f(I) with
 * I = H(mu) - E_P[H] <= C, compared with stopping. Linear costs reduce to one
 * linear program; otherwise the value is maximised over I, with
 * golden-section search (dense scan first when f is not convex).
 */
inline BellmanPoint bellman_point(const ValueTable& v, const DynamicSpec& spec, std::size_t index) {
    const SimplexGrid& grid = v.grid;
    const Belief& mu = grid.point(index);
    detail::GridProblem gp{grid.points(), std::vector<double>(grid.size()), std::vector<double>(grid.size())};
    for (std::size_t g = 0; g < grid.size(); ++g) {
        gp.continuation[g] = spec.discount * v.values[g];
        gp.entropy[g] = spec.entropy_fn(grid.point(g));
    }
    const double hmu = gp.entropy[index];
    BellmanPoint out;
    out.value = spec.stop_payoff(mu);

    auto realise = [&](const EnvelopeSolution& sol) {
        SignalStructure s = structure_from_weights(gp.points, sol.weights);
        double eh = 0.0, ev = 0.0;
        for (const auto& [g, w] : sol.weights) {
            eh += w * gp.entropy[g];
            ev += w * gp.continuation[g];
        }
        const double info = std::max(0.0, hmu - eh);
        return std::tuple{std::move(s), info, ev - spec.cost(info)};
    };

    SignalStructure best_s = SignalStructure::degenerate(mu);
    double best_info = 0.0;
    double best = gp.continuation[index] - spec.cost(0.0);
    const bool capped = std::isfinite(spec.capacity);

    if (spec.cost.is_linear()) {
        const double a = std::get<InformationCost::Linear>(spec.cost.kind()).slope;
        std::vector<double> obj(grid.size());
        for (std::size_t g = 0; g < grid.size(); ++g) obj[g] = gp.continuation[g] + a * gp.entropy[g];
        std::optional<EnvelopeSolution> sol;
        if (capped)
            sol = detail::entropy_row_lp(gp, mu, obj, hmu - spec.capacity, RowSense::GreaterEqual);
        else
            sol = solve_envelope(gp.points, obj, mu);
        if (sol) {
            auto [s, info, val] = realise(*sol);
            if (val > best) {
                best = val;
                best_s = std::move(s);
                best_info = info;
            }
        }
    } else {
        // Largest attainable information: minimise E_P[H].
        std::vector<double> neg(grid.size());
        for (std::size_t g = 0; g < grid.size(); ++g) neg[g] = -gp.entropy[g];
        const double imax = std::min(hmu + solve_envelope(gp.points, neg, mu).objective, spec.capacity);
        auto at = [&](double info) -> std::pair<double, std::optional<EnvelopeSolution>> {
            auto sol = detail::entropy_row_lp(gp, mu, gp.continuation, hmu - info, RowSense::Equal);
            if (!sol) return {-std::numeric_limits<double>::infinity(), std::nullopt};
            return {sol->objective - spec.cost(info), std::move(sol)};
        };
        if (imax > 1e-12) {
            double lo = 0.0, hi = imax;
            if (!spec.cost.is_convex(imax)) {
                const int scan = 100;
                int arg = 0;
                double bv = -std::numeric_limits<double>::infinity();
                for (int i = 0; i <= scan; ++i) {
                    const double val = at(imax * i / scan).first;
                    if (val > bv) {
                        bv = val;
                        arg = i;
                    }
                }
                lo = imax * std::max(0, arg - 1) / scan;
                hi = imax * std::min(scan, arg + 1) / scan;
            }
            const double r = (std::sqrt(5.0) - 1.0) / 2.0;
            double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
            double f1 = at(x1).first, f2 = at(x2).first;
            while (hi - lo > 1e-10) {
                if (f1 < f2) {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + r * (hi - lo);
                    f2 = at(x2).first;
                } else {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - r * (hi - lo);
                    f1 = at(x1).first;
                }
            }
            for (double x : {0.5 * (lo + hi), imax}) {
                auto [val, sol] = at(x);
                if (!sol) continue;
                auto [s, info, real] = realise(*sol);
                if (real > best) {
                    best = real;
                    best_s = std::move(s);
                    best_info = info;
                }
            }
        }
    }
    out.learning_value = best;
    if (best > out.value) {
        out.value = best;
        out.stop = false;
        out.structure = std::move(best_s);
        out.information = best_info;
    } else {
        out.structure = SignalStructure::degenerate(mu);
    }
    return out;
}

/// One synchronous sweep of the Bellman operator over the grid.
inline ValueTable bellman_operator(const ValueTable& v, const DynamicSpec& spec) {
    ValueTable out{v.grid, {}};
    out.values = parallel_map(v.grid.size(), [&](std::size_t i) { return bellman_point(v, spec, i).value; });
    return out;
}

struct ValueIteration {
    ValueTable table;
    std::size_t iterations = 0;
    /// Sup-norm change per sweep and the ratio of consecutive changes.
    std::vector<double> steps;
    std::vector<double> ratios;
};

/**
 * Iterates the Bellman operator from `start` (default: the stopping payoff)
 * until a sweep changes the table by at most tol (1 - discount), so the
 * result is within tol of the fixed point. Throws MaxIterations otherwise.
 */
inline ValueIteration value_iterate(const DynamicSpec& spec, double tol = 1e-8, std::size_t max_iters = 10000,
                                    std::optional<ValueTable> start = std::nullopt) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    spec.validate();
    ValueIteration out;
    out.table = start ? std::move(*start) : tabulate(spec.stop_payoff, spec.grid());
    const double stop = tol * (1.0 - spec.discount);
    while (true) {
        ValueTable next = bellman_operator(out.table, spec);
        const double step = sup_distance(next, out.table);
        if (!out.steps.empty() && out.steps.back() > 0.0) out.ratios.push_back(step / out.steps.back());
        out.steps.push_back(step);
        out.table = std::move(next);
        ++out.iterations;
        if (step <= stop) break;
        if (out.iterations >= max_iters) throw MaxIterations("value iteration did not reach the tolerance", step);
    }
    return out;
}

struct RiResult {
    SignalStructure structure;
    double value = 0.0;
    double information = 0.0;
    double multiplier = 0.0;
    /// |t - f'(I)| at the returned structure.
    double residual = 0.0;
    std::size_t iterations = 0;
    bool bisection = false;
};

/**
 * Rational inattention with cost f(E_P[H(mu) - H(nu)]): the optimal P also
 * maximises E_P[F + t H] with t = f'(I). Damped iteration on t, with
 * bisection on [f'(0), f'(H(mu))] when it stalls; at a jump in I(t) the two
 * sides are mixed so that t = f'(I) holds.
 */
inline RiResult ri_solve(const ValueFunction& payoff, const ValueFunction& entropy_fn, const InformationCost& cost,
                         const Belief& mu, std::size_t resolution = 40, std::size_t max_iters = 200) {
    ConcavifyOptions opt;
    opt.resolution = resolution;
    const std::vector<ValueFunction> fs{payoff, entropy_fn};
    const auto cands = candidate_posteriors(mu, fs, opt);
    std::vector<double> fv(cands.size()), hv(cands.size());
    for (std::size_t g = 0; g < cands.size(); ++g) {
        fv[g] = payoff(cands[g]);
        hv[g] = entropy_fn(cands[g]);
    }
    const double hmu = entropy_fn(mu);

    struct Response {
        SignalStructure structure;
        double information;
    };
    auto respond = [&](double t) {
        std::vector<double> w(cands.size());
        for (std::size_t g = 0; g < w.size(); ++g) w[g] = fv[g] + t * hv[g];
        const auto sol = solve_envelope(cands, w, mu);
        Response r{structure_from_weights(cands, sol.weights), 0.0};
        r.information = std::max(0.0, hmu - expected_value(r.structure, entropy_fn));
        return r;
    };
    auto finish = [&](SignalStructure s, double t, std::size_t it, bool bis) {
        RiResult out;
        out.information = std::max(0.0, hmu - expected_value(s, entropy_fn));
        out.value = expected_value(s, payoff) - cost(out.information);
        out.structure = std::move(s);
        out.multiplier = t;
        out.residual = std::abs(t - cost.derivative(out.information));
        out.iterations = it;
        out.bisection = bis;
        return out;
    };

    double t = cost.derivative(0.0);
    for (std::size_t k = 1; k <= max_iters; ++k) {
        Response r = respond(t);
        const double target = cost.derivative(r.information);
        if (std::abs(t - target) <= 1e-6) return finish(std::move(r.structure), t, k, false);
        t = 0.5 * t + 0.5 * target;
    }

    // t - f'(I(t)) is nondecreasing in t: bisect for its sign change.
    double lo = cost.derivative(0.0), hi = cost.derivative(hmu);
    Response rlo = respond(lo), rhi = respond(hi);
    if (std::abs(lo - cost.derivative(rlo.information)) <= 1e-6) return finish(std::move(rlo.structure), lo, max_iters, true);
    if (std::abs(hi - cost.derivative(rhi.information)) <= 1e-6) return finish(std::move(rhi.structure), hi, max_iters, true);
    std::size_t it = max_iters;
    while (hi - lo > 1e-12 * (1.0 + std::abs(hi))) {
        const double mid = 0.5 * (lo + hi);
        Response r = respond(mid);
        ++it;
        const double diff = mid - cost.derivative(r.information);
        if (std::abs(diff) <= 1e-6) return finish(std::move(r.structure), mid, it, true);
        if (diff < 0.0) {
            lo = mid;
            rlo = std::move(r);
        } else {
            hi = mid;
            rhi = std::move(r);
        }
        if (it > max_iters + 200) break;
    }
    // Jump in I(t): mix the more and the less informative responses.
    double a0 = 0.0, a1 = 1.0;
    for (int k = 0; k < 200 && a1 - a0 > 1e-15; ++k) {
        const double a = 0.5 * (a0 + a1);
        const double info = a * rlo.information + (1.0 - a) * rhi.information;
        (cost.derivative(info) <= hi ? a0 : a1) = a;
    }
    const double a = 0.5 * (a0 + a1);
    RiResult out = finish(mix(rlo.structure, rhi.structure, a), hi, it, true);
    if (out.residual > 1e-6) throw NonConvergence("multiplier fixed point not found");
    return out;
}

} // namespace infodesign
