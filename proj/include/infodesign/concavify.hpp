#pragma once

// Concave envelopes over the belief simplex.
//
// cav W(mu) is computed as the linear program
//     max sum_g p_g W(g)  s.t.  sum_g p_g g = mu,  p >= 0
// over a finite candidate set of posteriors. A basic optimal solution has at
// most |X| positive weights, one per equality row.

#include "core.hpp"
#include "errors.hpp"
#include "simplex_lp.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace infodesign {

struct ConcavifyOptions {
    std::size_t resolution = 40;
    /// Add the kinks of the value functions (binary state spaces only).
    bool include_knots = true;
};

enum class LpOutcome { Optimal, DegenerateResolved };

inline const char* to_string(LpOutcome s) { return s == LpOutcome::Optimal ? "optimal" : "degenerate-resolved"; }

struct CavResult {
    double value = 0.0;
    SignalStructure structure;
    std::size_t grid_resolution = 0;
    LpOutcome lp_status = LpOutcome::Optimal;
};

/// A linear side constraint sum_g coeffs[g] p_g (sense) rhs on the weights.
struct WeightConstraint {
    std::vector<double> coeffs;
    RowSense sense = RowSense::LessEqual;
    double rhs = 0.0;
};

/// Optimal weights of the envelope program: (candidate index, weight) pairs.
struct EnvelopeSolution {
    double objective = 0.0;
    std::vector<std::pair<std::size_t, double>> weights;
    bool degenerate = false;
};

/**
 * Solves max sum p_g values[g] over Bayes-plausible weights on `candidates`,
 * with optional extra linear constraints. Throws InfeasiblePrior when no
 * weights reproduce mu.
 */
inline EnvelopeSolution solve_envelope(std::span<const Belief> candidates, std::span<const double> values,
                                       const Belief& mu, std::span<const WeightConstraint> extra = {}) {
    const std::size_t k = candidates.size();
    if (values.size() != k) throw std::invalid_argument("one value per candidate is required");
    LinearProgram lp(k);
    lp.objective.assign(values.begin(), values.end());
    for (std::size_t x = 0; x < mu.size(); ++x) {
        std::vector<double> row(k);
        for (std::size_t g = 0; g < k; ++g) row[g] = candidates[g][x];
        lp.add_row(std::move(row), RowSense::Equal, mu[x]);
    }
    for (const auto& c : extra) lp.add_row(c.coeffs, c.sense, c.rhs);

    const LpResult r = solve_lp(lp);
    if (r.status == LpStatus::Infeasible)
        throw InfeasiblePrior("prior is not a convex combination of the candidate posteriors");
    if (r.status != LpStatus::Optimal) throw NumericalError("envelope linear program did not terminate");

    EnvelopeSolution out;
    out.objective = r.objective;
    out.degenerate = r.degenerate;
    for (std::size_t g = 0; g < k; ++g)
        if (r.x[g] > kWeightFloor) out.weights.emplace_back(g, r.x[g]);
    return out;
}

/// Grid points, then mu, then the value functions' kinks, without duplicates.
inline std::vector<Belief> candidate_posteriors(const Belief& mu, std::span<const ValueFunction> vfuncs,
                                                const ConcavifyOptions& opt = {}) {
    if (opt.resolution < 1) throw std::invalid_argument("grid resolution must be positive");
    const SimplexGrid grid(mu.size(), opt.resolution);
    std::vector<Belief> out(grid.points().begin(), grid.points().end());
    auto add = [&](const Belief& b) {
        if (grid.find(b.probs(), kMergeTolerance)) return;
        for (std::size_t i = grid.size(); i < out.size(); ++i)
            if (out[i].max_distance(b) <= kMergeTolerance) return;
        out.push_back(b);
    };
    add(mu);
    if (opt.include_knots)
        for (const auto& v : vfuncs)
            for (const auto& b : v.knots(mu.size())) add(b);
    return out;
}

inline SignalStructure structure_from_weights(std::span<const Belief> candidates,
                                              const std::vector<std::pair<std::size_t, double>>& weights) {
    std::vector<Atom> atoms;
    atoms.reserve(weights.size());
    for (const auto& [g, w] : weights) atoms.push_back({w, candidates[g]});
    return SignalStructure(std::move(atoms));
}

/**
 * Concave envelope of W at mu on grid(d) plus mu and W's kinks.
 *
 * The returned structure is a basic optimal solution, so it has at most |X|
 * atoms. value is recomputed from the structure.
 */
inline CavResult concavify(const ValueFunction& w, const Belief& mu, const ConcavifyOptions& opt = {}) {
    const std::vector<Belief> cands = candidate_posteriors(mu, std::span<const ValueFunction>(&w, 1), opt);
    std::vector<double> vals(cands.size());
    for (std::size_t g = 0; g < cands.size(); ++g) vals[g] = w(cands[g]);
    const EnvelopeSolution sol = solve_envelope(cands, vals, mu);

    CavResult out;
    out.structure = structure_from_weights(cands, sol.weights);
    out.value = expected_value(out.structure, w);
    out.grid_resolution = opt.resolution;
    out.lp_status = sol.degenerate ? LpOutcome::DegenerateResolved : LpOutcome::Optimal;
    return out;
}

inline CavResult concavify(const ValueFunction& w, const Belief& mu, std::size_t resolution) {
    ConcavifyOptions opt;
    opt.resolution = resolution;
    return concavify(w, mu, opt);
}

/// A weighted point of R^m.
struct WeightedPoint {
    double weight;
    Point point;
};

/**
 * Carathéodory reduction: rewrites a convex combination in R^m with at most
 * m+1 points and the same barycenter.
 *
 * Each round finds an affine dependence sum a_j p_j = 0, sum a_j = 0 among
 * the current points and moves the weights along it until one vanishes.
 */
inline std::vector<WeightedPoint> caratheodory_reduce(std::vector<WeightedPoint> atoms, const Point& target) {
    if (atoms.empty()) throw std::invalid_argument("nothing to reduce");
    const std::size_t m = target.size();
    double total = 0.0;
    Point bary(m, 0.0);
    for (const auto& a : atoms) {
        if (a.point.size() != m) throw std::invalid_argument("point dimension does not match target");
        if (a.weight < 0.0) throw std::invalid_argument("weights must be nonnegative");
        total += a.weight;
        for (std::size_t i = 0; i < m; ++i) bary[i] += a.weight * a.point[i];
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to one");
    if (norm_inf(subtract(bary, target)) > 1e-9 * (1.0 + norm_inf(target)))
        throw std::invalid_argument("weighted points do not average to the target");

    std::erase_if(atoms, [](const WeightedPoint& a) { return a.weight <= 0.0; });
    while (atoms.size() > m + 1) {
        const std::size_t k = atoms.size();
        Matrix a(m + 1, k);
        double scale = 1.0;
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t i = 0; i < m; ++i) a(i, j) = atoms[j].point[i];
            a(m, j) = 1.0;
            scale = std::max(scale, norm_inf(atoms[j].point));
        }
        const auto alpha = null_vector(a, 1e-12);
        if (!alpha) throw NumericalRankFailure("no affine dependence found among more than m+1 points");
        double residual = 0.0;
        for (std::size_t i = 0; i <= m; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < k; ++j) s += a(i, j) * (*alpha)[j];
            residual = std::max(residual, std::abs(s));
        }
        if (residual > 1e-10 * scale * norm_inf(*alpha))
            throw NumericalRankFailure("affine dependence residual " + std::to_string(residual));

        std::size_t arg = k;
        double t = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if ((*alpha)[j] <= 0.0) continue;
            const double r = atoms[j].weight / (*alpha)[j];
            if (arg == k || r < t) {
                t = r;
                arg = j;
            }
        }
        if (arg == k) throw NumericalRankFailure("affine dependence has no positive coefficient");
        for (std::size_t j = 0; j < k; ++j) atoms[j].weight = std::max(0.0, atoms[j].weight - t * (*alpha)[j]);
        atoms[arg].weight = 0.0;
        std::erase_if(atoms, [](const WeightedPoint& p) { return p.weight <= kWeightFloor; });
    }
    double s = 0.0;
    for (const auto& p : atoms) s += p.weight;
    for (auto& p : atoms) p.weight /= s;
    return atoms;
}

} // namespace infodesign
