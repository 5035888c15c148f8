#pragma once

// The information design program
//     sup f(E_P[V^1], ..., E_P[V^n])  s.t.  (E_P[V^1], ...) in D,  E_P[nu] = mu,
// solved through the achievable set V(mu): a generic polytope search, a
// Frank-Wolfe method for smooth f, slack-variable constraints and concave
// sublevel constraints via their Lagrangian.

#include "concavify.hpp"
#include "core.hpp"
#include "errors.hpp"
#include "frank_wolfe.hpp"
#include "functions.hpp"
#include "geometry.hpp"
#include "optimize.hpp"
#include "parallel.hpp"
#include "posset.hpp"
#include "simplex_lp.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace infodesign {

inline constexpr double kFeasibilityTolerance = 1e-6;
/// Below this gradient norm a maximiser counts as an interior stationary point.
inline constexpr double kStationaryGradient = 1e-6;

struct NoConstraint {};
/// v_i >= 0 for the last m coordinates.
struct NonnegTail {
    std::size_t m = 0;
};
/// g(v) >= 0.
struct Sublevel {
    RealFunction g;
};
struct ExplicitSet {
    std::function<bool(std::span<const double>)> contains;
};
using Constraint = std::variant<NoConstraint, NonnegTail, Sublevel, ExplicitSet>;

inline const char* constraint_name(const Constraint& c) {
    static constexpr const char* names[] = {"none", "nonneg-tail", "sublevel", "explicit-set"};
    return names[c.index()];
}

/// Amount by which v violates the constraint (0 when feasible).
inline double constraint_violation(const Constraint& c, std::span<const double> v) {
    if (const auto* t = std::get_if<NonnegTail>(&c)) {
        double worst = 0.0;
        for (std::size_t i = v.size() - t->m; i < v.size(); ++i) worst = std::max(worst, -v[i]);
        return worst;
    }
    if (const auto* s = std::get_if<Sublevel>(&c)) return std::max(0.0, -s->g(v));
    if (const auto* e = std::get_if<ExplicitSet>(&c)) return e->contains(v) ? 0.0 : 1.0;
    return 0.0;
}

struct ProblemSpec {
    Belief mu;
    std::vector<ValueFunction> vfuncs;
    RealFunction objective;
    Constraint constraint = NoConstraint{};
    bool objective_quasiconcave = false;
    bool constraint_quasiconcave = false;

    std::size_t dimension() const noexcept { return vfuncs.size(); }

    void validate() const {
        const std::size_t n = vfuncs.size();
        if (n == 0) throw SchemaError("at least one value function is required");
        if (objective.dimension() != n) throw SchemaError("objective dimension differs from the number of value functions");
        for (const auto& v : vfuncs) (void)v(mu);
        objective.check_gradient();
        if (const auto* t = std::get_if<NonnegTail>(&constraint)) {
            if (t->m > n) throw SchemaError("nonneg-tail length exceeds the dimension");
        } else if (const auto* s = std::get_if<Sublevel>(&constraint)) {
            if (s->g.dimension() != n) throw SchemaError("constraint dimension differs from the number of value functions");
            s->g.check_gradient();
        } else if (const auto* e = std::get_if<ExplicitSet>(&constraint)) {
            if (!e->contains) throw SchemaError("explicit constraint set has no predicate");
        }
    }
};

/// lambda is unit; eta scales grad f and gamma the constraint gradients so that
/// lambda = eta * grad f + sum gamma_j * grad g_j.
struct Multipliers {
    Point lambda;
    double eta = 0.0;
    Point gamma;
};

struct Diagnostics {
    std::string method;
    std::size_t iterations = 0;
    /// Frank-Wolfe gap, or h(lambda) - lambda.v* for reported multipliers.
    double stationarity_gap = 0.0;
    double feasibility_residual = 0.0;
    double sandwich_gap = 0.0;
    /// Largest |f(o) - f(p)| over outer vertices o and their nearest inner points p.
    double objective_gap = 0.0;
    bool fallback = false;
    std::string note;
};

struct Solution {
    double value = 0.0;
    Point v_star;
    SignalStructure structure;
    std::optional<Multipliers> multipliers;
    Diagnostics diagnostics;
};

/// Iteration cap reached; best() is the last iterate turned into a solution.
class SolveMaxIterations : public MaxIterations {
public:
    SolveMaxIterations(const std::string& what, double gap, Solution best)
        : MaxIterations(what, gap), best_(std::move(best)) {}
    const Solution& best() const noexcept { return best_; }

private:
    Solution best_;
};

struct SolveOptions {
    ConcavifyOptions grid{};
    /// Initial sampled directions; 0 selects twice the default count.
    std::size_t directions = 0;
    std::size_t refine_rounds = 40;
    PolytopeSearch search{};
    FwOptions fw{};
    double feasibility_tol = kFeasibilityTolerance;
};

namespace detail {

inline std::size_t initial_directions(const SolveOptions& opt, std::size_t n) {
    return opt.directions ? opt.directions : 2 * default_direction_count(n);
}

inline Solution finish(const ProblemSpec& spec, SignalStructure structure) {
    Solution s;
    s.v_star = expected_values(structure, spec.vfuncs);
    s.value = spec.objective(s.v_star);
    s.structure = std::move(structure);
    s.diagnostics.feasibility_residual = constraint_violation(spec.constraint, s.v_star);
    return s;
}

/// Ambient halfspaces describing the linear part of the constraint.
inline std::vector<Halfspace> linear_cuts(const Constraint& c, std::size_t n) {
    std::vector<Halfspace> cuts;
    if (const auto* t = std::get_if<NonnegTail>(&c)) {
        for (std::size_t i = n - t->m; i < n; ++i) {
            Point a(n, 0.0);
            a[i] = -1.0;
            cuts.push_back({a, 0.0});
        }
    } else if (const auto* s = std::get_if<Sublevel>(&c)) {
        if (const auto* l = std::get_if<RealFunction::Linear>(&s->g.kind())) {
            Point a = l->coeffs;
            for (double& x : a) x = -x;
            cuts.push_back({a, l->constant});
        }
    }
    return cuts;
}

inline Objective constrained_objective(const ProblemSpec& spec) {
    const bool nonlinear = std::holds_alternative<ExplicitSet>(spec.constraint) ||
                           (std::holds_alternative<Sublevel>(spec.constraint) &&
                            !std::get<Sublevel>(spec.constraint).g.is_linear());
    if (!nonlinear)
        return [&spec](std::span<const double> v) { return spec.objective(v); };
    return [&spec](std::span<const double> v) {
        if (constraint_violation(spec.constraint, v) > 0.0) return -std::numeric_limits<double>::infinity();
        return spec.objective(v);
    };
}

/// Outward unit normals (ambient) of inner-polytope facets through v, plus
/// both signs of the directions orthogonal to the polytope's affine hull.
inline std::vector<Point> normal_cone_generators(const std::vector<Point>& vertices, std::span<const double> v,
                                                 std::vector<Point>* lineality = nullptr) {
    std::vector<Point> out;
    const AffineHull hull(vertices);
    const std::size_t k = hull.dimension();
    const auto comp = hull.complement();
    if (lineality) *lineality = comp;
    if (k > 0) {
        std::vector<Point> ys;
        for (const auto& p : vertices) ys.push_back(hull.coordinates(p));
        const Point y = hull.coordinates(v);
        for (const auto& h : hull_facets(ys))
            if (dot(h.normal, y) >= h.offset - 1e-7 * (1.0 + std::abs(h.offset)))
                out.push_back(normalized(hull.lift_direction(h.normal)));
    }
    if (!lineality)
        for (const auto& u : comp) {
            out.push_back(u);
            Point m = u;
            for (double& x : m) x = -x;
            out.push_back(m);
        }
    return out;
}

struct GenericRun {
    SetApprox approx;
    Point v;
    double value = 0.0;
    std::size_t rounds = 0;
};

/**
 * Maximises f over (inner polytope) intersected with D, then refines the
 * polytope with support points along the facet normals active at the
 * maximiser and along grad f until no new vertex appears.
 */
inline GenericRun generic_maximize(const ProblemSpec& spec, const SupportOracle& oracle, const SolveOptions& opt) {
    const std::size_t n = spec.dimension();
    GenericRun run{approximate_set(oracle, initial_directions(opt, n)), {}, 0.0, 0};
    const auto cuts = linear_cuts(spec.constraint, n);
    const Objective f = constrained_objective(spec);

    auto solve_on = [&](PolytopeSearch search, const std::vector<Point>& warm) {
        const auto verts = clip_polytope(run.approx.inner_vertices, cuts);
        if (verts.empty()) throw InfeasibleProblem("no point of the achievable set satisfies the constraint");
        auto r = maximize_over_polytope(verts, f, search, warm);
        if (!(r.value > -std::numeric_limits<double>::infinity()))
            throw InfeasibleProblem("no point of the achievable set satisfies the constraint");
        return r;
    };
    auto best = solve_on(opt.search, {});
    for (; run.rounds < opt.refine_rounds; ++run.rounds) {
        std::vector<Point> dirs = normal_cone_generators(run.approx.inner_vertices, best.point);
        const Point g = spec.objective.gradient(best.point);
        if (std::isfinite(norm2(g)) && norm2(g) > 0.0) dirs.push_back(g);
        auto samples = parallel_map(dirs.size(), [&](std::size_t i) { return oracle(dirs[i]); });
        bool fresh = false;
        for (auto& s : samples) fresh = run.approx.add_sample(std::move(s)) || fresh;
        if (!fresh) break;
        PolytopeSearch local = opt.search;
        local.dense = false;
        const auto next = solve_on(local, {best.point});
        if (next.value >= best.value - 1e-15 * (1.0 + std::abs(best.value))) best = next;
    }
    run.v = best.point;
    run.value = best.value;
    return run;
}

inline double objective_gap(const SetApprox& approx, const RealFunction& f) {
    double gap = 0.0;
    const auto outer = approx.outer_vertices();
    if (outer.empty()) return std::numeric_limits<double>::infinity();
    for (const auto& o : outer) gap = std::max(gap, std::abs(f(o) - f(nearest_point(approx.inner_vertices, o).point)));
    return gap;
}

inline Multipliers scale_multipliers(Point raw_lambda, double eta, Point gamma) {
    const double len = norm2(raw_lambda);
    Multipliers m;
    m.lambda = raw_lambda;
    for (double& x : m.lambda) x /= len;
    m.eta = eta / len;
    m.gamma = std::move(gamma);
    for (double& x : m.gamma) x /= len;
    return m;
}

inline Solution solve_with_run(const ProblemSpec& spec, const SupportOracle& oracle, const SolveOptions& opt,
                               GenericRun& run) {
    run = generic_maximize(spec, oracle, opt);
    Solution s = finish(spec, implement_point(run.approx, run.v, opt.feasibility_tol));
    s.diagnostics.method = "polytope-search";
    s.diagnostics.iterations = run.rounds;
    s.diagnostics.sandwich_gap = run.approx.sandwich_gap();
    s.diagnostics.objective_gap = objective_gap(run.approx, spec.objective);
    return s;
}

} // namespace detail

/**
 * Maximises f over the inner approximation of V(mu) intersected with D and
 * implements the maximiser. The value is a lower bound for the program.
 */
inline Solution solve_generic(const ProblemSpec& spec, const SolveOptions& opt = {}) {
    spec.validate();
    const SupportOracle oracle(spec.mu, spec.vfuncs, opt.grid);
    detail::GenericRun run;
    return detail::solve_with_run(spec, oracle, opt, run);
}

/**
 * Frank-Wolfe on a differentiable f over V(mu) (no constraint). The final
 * gap grad f(v).(s - v) <= opt.fw.gap_tol is the first-order condition up
 * to tolerance; for concave f the result is globally optimal.
 */
inline Solution solve_smooth(const ProblemSpec& spec, const SolveOptions& opt = {}) {
    spec.validate();
    if (!std::holds_alternative<NoConstraint>(spec.constraint))
        throw std::invalid_argument("solve_smooth handles unconstrained problems only");
    const SupportOracle oracle(spec.mu, spec.vfuncs, opt.grid);
    const Gradient grad = [&](std::span<const double> v) { return spec.objective.gradient(v); };
    const FwResult fw = frank_wolfe(oracle, grad, opt.fw);
    Solution s = detail::finish(spec, fw.structure());
    s.diagnostics.method = opt.fw.rule == StepRule::OpenLoop ? "frank-wolfe-open-loop" : "frank-wolfe";
    s.diagnostics.iterations = fw.iterations;
    s.diagnostics.stationarity_gap = fw.gap;
    const Point g = spec.objective.gradient(s.v_star);
    if (norm2(g) > kStationaryGradient)
        s.multipliers = detail::scale_multipliers(g, 1.0, {});
    else
        s.multipliers = Multipliers{Point(g.size(), 0.0), 1.0, {}};
    if (!fw.converged)
        throw SolveMaxIterations("Frank-Wolfe gap above tolerance after the iteration cap", fw.gap, std::move(s));
    return s;
}

/**
 * Constraint v_i >= 0 on the last m coordinates, with f constant in them.
 * The maximiser comes from the polytope search; the reported lambda solves
 *     grad f + sum_i gamma_i e_i  in  normal cone of the inner polytope at v*
 * with gamma_i >= 0 and gamma_i = 0 for slack coordinates, so that v*
 * maximises lambda.v over the approximation.
 */
inline Solution solve_with_slack(const ProblemSpec& spec, const SolveOptions& opt = {}) {
    spec.validate();
    const auto* tail = std::get_if<NonnegTail>(&spec.constraint);
    if (!tail) throw std::invalid_argument("solve_with_slack needs a nonneg-tail constraint");
    const std::size_t n = spec.dimension(), m = tail->m;
    {
        std::mt19937_64 rng(0);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int t = 0; t < 5; ++t) {
            Point v(n), w(n);
            for (auto& x : v) x = u(rng);
            w = v;
            for (std::size_t i = n - m; i < n; ++i) w[i] += u(rng);
            const double a = spec.objective(v), b = spec.objective(w);
            if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
                throw std::invalid_argument("objective must not depend on the slack coordinates");
        }
    }
    const SupportOracle oracle(spec.mu, spec.vfuncs, opt.grid);
    detail::GenericRun run;
    Solution s = detail::solve_with_run(spec, oracle, opt, run);
    s.diagnostics.method = "slack-multipliers";

    const Point grad = spec.objective.gradient(s.v_star);
    std::vector<Point> lineality;
    const auto normals = detail::normal_cone_generators(run.approx.inner_vertices, run.v, &lineality);
    std::vector<std::size_t> active;
    for (std::size_t i = n - m; i < n; ++i)
        if (run.v[i] <= 1e-7) active.push_back(i);
    // Columns: normals, +-lineality, gamma for active tail rows, +-residual.
    const std::size_t nc = normals.size(), nl = lineality.size(), na = active.size();
    const std::size_t cols = nc + 2 * nl + na + 2 * n;
    LinearProgram lp(cols);
    lp.objective.assign(cols, 0.0);
    for (std::size_t j = nc + 2 * nl + na; j < cols; ++j) lp.objective[j] = -1.0;
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<double> row(cols, 0.0);
        for (std::size_t j = 0; j < nc; ++j) row[j] = normals[j][r];
        for (std::size_t j = 0; j < nl; ++j) {
            row[nc + 2 * j] = lineality[j][r];
            row[nc + 2 * j + 1] = -lineality[j][r];
        }
        for (std::size_t j = 0; j < na; ++j) row[nc + 2 * nl + j] = active[j] == r ? -1.0 : 0.0;
        row[nc + 2 * nl + na + 2 * r] = 1.0;
        row[nc + 2 * nl + na + 2 * r + 1] = -1.0;
        lp.add_row(std::move(row), RowSense::Equal, grad[r]);
    }
    const LpResult fit = solve_lp(lp);
    Point gamma(m, 0.0);
    Point raw = grad;
    if (fit.status == LpStatus::Optimal && -fit.objective <= 1e-8 * (1.0 + norm2(grad))) {
        for (std::size_t j = 0; j < na; ++j) {
            gamma[active[j] - (n - m)] = fit.x[nc + 2 * nl + j];
            raw[active[j]] += fit.x[nc + 2 * nl + j];
        }
    } else {
        s.diagnostics.fallback = true;
        s.diagnostics.note = "no multiplier fit; lambda is the objective gradient";
    }
    if (norm2(raw) > kStationaryGradient) {
        s.multipliers = detail::scale_multipliers(raw, 1.0, gamma);
        const auto check = oracle(s.multipliers->lambda);
        s.diagnostics.stationarity_gap = std::max(0.0, check.h - dot(s.multipliers->lambda, s.v_star));
    } else {
        s.diagnostics.note = "objective is stationary at an interior point; no multiplier direction";
    }
    return s;
}

/**
 * Concave f and concave g with D = { g(v) >= 0 }: bisection on the
 * multiplier gamma of the Lagrangian f + gamma g, each inner problem solved
 * by Frank-Wolfe. Reports lambda = eta grad f + gamma grad g on the unit
 * sphere. Falls back to solve_generic when the Lagrangian path does not
 * certify stationarity.
 */
inline Solution solve_convex_constrained(const ProblemSpec& spec, const SolveOptions& opt = {}) {
    spec.validate();
    const auto* sub = std::get_if<Sublevel>(&spec.constraint);
    if (!sub) throw std::invalid_argument("solve_convex_constrained needs a sublevel constraint");
    const RealFunction& f = spec.objective;
    const RealFunction& g = sub->g;
    const SupportOracle oracle(spec.mu, spec.vfuncs, opt.grid);
    FwOptions fw_opt = opt.fw;
    fw_opt.gap_tol = std::min(fw_opt.gap_tol, 1e-9);

    std::size_t iterations = 0;
    auto inner = [&](double gamma) {
        const Gradient grad = [&, gamma](std::span<const double> v) {
            Point a = f.gradient(v);
            if (gamma != 0.0) {
                const Point b = g.gradient(v);
                for (std::size_t i = 0; i < a.size(); ++i) a[i] += gamma * b[i];
            }
            return a;
        };
        FwResult r = frank_wolfe(oracle, grad, fw_opt);
        iterations += r.iterations;
        if (!r.converged) throw NonConvergence("Lagrangian subproblem did not converge");
        return r;
    };
    auto fallback = [&](const std::string& why) {
        SolveOptions generic = opt;
        Solution s = solve_generic(spec, generic);
        s.diagnostics.fallback = true;
        s.diagnostics.note = why;
        return s;
    };

    try {
        FwResult lo = inner(0.0);
        double gamma = 0.0;
        SignalStructure structure;
        if (g(lo.v) >= 0.0) {
            structure = lo.structure();
        } else {
            double glo = 0.0, ghi = 1.0;
            FwResult hi = inner(ghi);
            while (g(hi.v) < 0.0) {
                if (ghi > 1e8) return fallback("constraint unreachable along the Lagrangian path");
                glo = ghi;
                lo = std::move(hi);
                ghi *= 2.0;
                hi = inner(ghi);
            }
            for (int it = 0; it < 100 && ghi - glo > 1e-13 * (1.0 + ghi) && g(hi.v) > 1e-10; ++it) {
                const double mid = 0.5 * (glo + ghi);
                FwResult r = inner(mid);
                if (g(r.v) < 0.0) {
                    glo = mid;
                    lo = std::move(r);
                } else {
                    ghi = mid;
                    hi = std::move(r);
                }
            }
            gamma = ghi;
            if (g(hi.v) <= 1e-10) {
                structure = hi.structure();
            } else {
                // Jump in the Lagrangian maximiser: mix the two sides onto g = 0.
                double a0 = 0.0, a1 = 1.0;
                auto at = [&](double a) {
                    Point v(lo.v.size());
                    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * lo.v[i] + (1.0 - a) * hi.v[i];
                    return v;
                };
                for (int it = 0; it < 200 && a1 - a0 > 1e-15; ++it) {
                    const double mid = 0.5 * (a0 + a1);
                    (g(at(mid)) >= 0.0 ? a0 : a1) = mid;
                }
                std::vector<Point> pts;
                std::vector<SignalStructure> wit;
                std::vector<double> w;
                auto add = [&](const FwResult& r, double scale) {
                    for (std::size_t j = 0; j < r.points.size(); ++j) {
                        std::size_t idx = pts.size();
                        for (std::size_t q = 0; q < pts.size(); ++q)
                            if (pts[q] == r.points[j]) idx = q;
                        if (idx == pts.size()) {
                            pts.push_back(r.points[j]);
                            wit.push_back(r.witnesses[j]);
                            w.push_back(0.0);
                        }
                        w[idx] += scale * r.weights[j];
                    }
                };
                add(lo, a0);
                add(hi, 1.0 - a0);
                structure = combine_witnesses(pts, wit, w);
            }
        }
        Solution s = detail::finish(spec, std::move(structure));
        s.diagnostics.method = "lagrangian-bisection";
        s.diagnostics.iterations = iterations;
        Point raw = f.gradient(s.v_star);
        const Point dg = g.gradient(s.v_star);
        for (std::size_t i = 0; i < raw.size(); ++i) raw[i] += gamma * dg[i];
        if (norm2(raw) <= kStationaryGradient) {
            // Interior stationary point: the first-order condition holds with lambda = 0.
            s.multipliers = Multipliers{Point(raw.size(), 0.0), 1.0, {gamma}};
            return s;
        }
        s.multipliers = detail::scale_multipliers(raw, 1.0, {gamma});
        const auto check = oracle(s.multipliers->lambda);
        s.diagnostics.stationarity_gap = std::max(0.0, check.h - dot(s.multipliers->lambda, s.v_star));
        if (s.diagnostics.stationarity_gap > 1e-5)
            return fallback("Lagrangian solution failed the stationarity check");
        return s;
    } catch (const NonConvergence& e) {
        return fallback(e.what());
    }
}

struct ProfileEntry {
    Belief mu;
    std::optional<Solution> solution;
    std::string error;
};

/// solve_generic at each prior; failures are recorded per entry.
inline std::vector<ProfileEntry> value_profile(const ProblemSpec& spec, const std::vector<Belief>& priors,
                                               const SolveOptions& opt = {}) {
    return parallel_map(priors.size(), [&](std::size_t i) {
        ProfileEntry e{priors[i], std::nullopt, {}};
        ProblemSpec local = spec;
        local.mu = priors[i];
        try {
            e.solution = solve_generic(local, opt);
        } catch (const Error& err) {
            e.error = err.what();
        }
        return e;
    });
}

} // namespace infodesign
