#pragma once

// The set of jointly achievable expected values
//     V(mu) = { (E_P[V^1], ..., E_P[V^n]) : P Bayes-plausible for mu },
// approximated from inside by support points and from outside by the
// supporting halfspaces through them.

#include "concavify.hpp"
#include "core.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "parallel.hpp"

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace infodesign {

inline constexpr double kBoundaryTolerance = 1e-6;

inline std::size_t default_direction_count(std::size_t n) { return std::max<std::size_t>(2 * n + 2, 16); }

/**
 * Deterministic unit directions in R^n: +-1 for n = 1, equal angles for
 * n = 2 (so doubling the count refines the previous set), a Fibonacci
 * lattice for n = 3 and a Kronecker sequence pushed through Box-Muller for
 * larger n.
 */
inline std::vector<Point> sample_directions(std::size_t n, std::size_t count) {
    if (n == 0) throw std::invalid_argument("directions need a positive dimension");
    if (count < n + 1) throw std::invalid_argument("at least n+1 directions are required");
    std::vector<Point> out;
    if (n == 1) return {{1.0}, {-1.0}};
    if (n == 2) {
        for (std::size_t k = 0; k < count; ++k) {
            const double t = 2.0 * std::numbers::pi * (static_cast<double>(k) / static_cast<double>(count));
            out.push_back({std::cos(t), std::sin(t)});
        }
        return out;
    }
    if (n == 3) {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (std::size_t i = 0; i < count; ++i) {
            const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(count);
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = golden * static_cast<double>(i);
            out.push_back({r * std::cos(phi), r * std::sin(phi), z});
        }
        return out;
    }
    const std::size_t pairs = (n + 1) / 2;
    const std::size_t dims = 2 * pairs;
    // Generalised golden ratio: the positive root of x^(dims+1) = x + 1.
    double g = 2.0;
    for (int it = 0; it < 100; ++it) g = std::pow(1.0 + g, 1.0 / static_cast<double>(dims + 1));
    std::vector<double> alpha(dims);
    for (std::size_t j = 0; j < dims; ++j) alpha[j] = std::fmod(std::pow(1.0 / g, static_cast<double>(j + 1)), 1.0);
    for (std::size_t i = 0; i < count; ++i) {
        Point z(dims);
        for (std::size_t p = 0; p < pairs; ++p) {
            const double u1 = std::fmod(0.5 + static_cast<double>(i + 1) * alpha[2 * p], 1.0);
            const double u2 = std::fmod(0.5 + static_cast<double>(i + 1) * alpha[2 * p + 1], 1.0);
            const double r = std::sqrt(-2.0 * std::log(std::max(u1, 1e-300)));
            z[2 * p] = r * std::cos(2.0 * std::numbers::pi * u2);
            z[2 * p + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
        }
        z.resize(n);
        out.push_back(normalized(z));
    }
    return out;
}

struct SupportSample {
    Point direction;
    double h = 0.0;
    Point point;
    SignalStructure witness;
};

/**
 * Support function of V(mu): h(lambda) = cav(sum lambda_i V^i)(mu), with the
 * maximising structure as witness. Candidate posteriors and value tables are
 * computed once at construction.
 */
class SupportOracle {
public:
    SupportOracle(Belief mu, std::vector<ValueFunction> vfuncs, ConcavifyOptions opt = {})
        : mu_(std::move(mu)), vfuncs_(std::move(vfuncs)), opt_(opt) {
        if (vfuncs_.empty()) throw std::invalid_argument("at least one value function is required");
        candidates_ = candidate_posteriors(mu_, vfuncs_, opt_);
        values_.assign(vfuncs_.size(), std::vector<double>(candidates_.size()));
        for (std::size_t i = 0; i < vfuncs_.size(); ++i)
            for (std::size_t g = 0; g < candidates_.size(); ++g) values_[i][g] = vfuncs_[i](candidates_[g]);
    }

    const Belief& mu() const noexcept { return mu_; }
    const std::vector<ValueFunction>& vfuncs() const noexcept { return vfuncs_; }
    const ConcavifyOptions& options() const noexcept { return opt_; }
    std::size_t dimension() const noexcept { return vfuncs_.size(); }

    /// (V^1(mu), ..., V^n(mu)), achieved by the uninformative structure.
    Point no_information_point() const {
        Point v(vfuncs_.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = vfuncs_[i](mu_);
        return v;
    }

    SupportSample operator()(std::span<const double> lambda) const {
        if (lambda.size() != vfuncs_.size()) throw std::invalid_argument("direction has wrong dimension");
        const double len = norm2(lambda);
        if (!(len > 0.0)) throw std::invalid_argument("direction must be nonzero");
        SupportSample s;
        s.direction = normalized(lambda);
        std::vector<double> w(candidates_.size(), 0.0);
        for (std::size_t i = 0; i < vfuncs_.size(); ++i)
            if (s.direction[i] != 0.0)
                for (std::size_t g = 0; g < w.size(); ++g) w[g] += s.direction[i] * values_[i][g];
        const EnvelopeSolution sol = solve_envelope(candidates_, w, mu_);
        s.witness = structure_from_weights(candidates_, sol.weights);
        s.point = expected_values(s.witness, vfuncs_);
        s.h = dot(s.direction, s.point);
        return s;
    }

private:
    Belief mu_;
    std::vector<ValueFunction> vfuncs_;
    ConcavifyOptions opt_;
    std::vector<Belief> candidates_;
    std::vector<std::vector<double>> values_;
};

/// Single support-point query.
inline SupportSample support_point(std::span<const double> lambda, const Belief& mu,
                                   std::vector<ValueFunction> vfuncs, const ConcavifyOptions& opt = {}) {
    return SupportOracle(mu, std::move(vfuncs), opt)(lambda);
}

/**
 * Inner/outer polytope approximation of V(mu).
 *
 * Inner vertices are the distinct support points plus the no-information
 * point; each carries a witness structure. The outer polytope is the
 * intersection of the sampled supporting halfspaces.
 */
struct SetApprox {
    Belief mu;
    std::vector<ValueFunction> vfuncs;
    std::vector<SupportSample> samples;
    std::vector<Point> inner_vertices;
    std::vector<SignalStructure> witnesses;

    std::size_t dimension() const noexcept { return vfuncs.size(); }

    /// Adds a vertex unless an equal one (1e-12) is present; returns whether it was new.
    bool add_vertex(const Point& v, const SignalStructure& witness) {
        for (const auto& u : inner_vertices)
            if (norm_inf(subtract(u, v)) <= 1e-12) return false;
        inner_vertices.push_back(v);
        witnesses.push_back(witness);
        return true;
    }
    bool add_sample(SupportSample s) {
        const bool fresh = add_vertex(s.point, s.witness);
        samples.push_back(std::move(s));
        return fresh;
    }

    std::vector<Halfspace> outer_halfspaces() const {
        std::vector<Halfspace> hs;
        hs.reserve(samples.size());
        for (const auto& s : samples) hs.push_back({s.direction, s.h});
        return hs;
    }
    std::vector<Point> outer_vertices() const { return halfspace_vertices(outer_halfspaces(), 1e-9); }

    /// Hausdorff distance between the inner and outer polytopes.
    double sandwich_gap() const {
        const auto outer = outer_vertices();
        if (outer.empty()) return std::numeric_limits<double>::infinity();
        return hausdorff(inner_vertices, outer);
    }
};

inline SetApprox approximate_set(const SupportOracle& oracle, const std::vector<Point>& directions) {
    SetApprox out{oracle.mu(), oracle.vfuncs(), {}, {}, {}};
    out.add_vertex(oracle.no_information_point(), SignalStructure::degenerate(oracle.mu()));
    auto samples = parallel_map(directions.size(), [&](std::size_t i) { return oracle(directions[i]); });
    for (auto& s : samples) out.add_sample(std::move(s));
    return out;
}

inline SetApprox approximate_set(const SupportOracle& oracle, std::size_t directions) {
    return approximate_set(oracle, sample_directions(oracle.dimension(), directions));
}

inline SetApprox approximate_set(const Belief& mu, std::vector<ValueFunction> vfuncs, std::size_t directions,
                                 const ConcavifyOptions& opt = {}) {
    return approximate_set(SupportOracle(mu, std::move(vfuncs), opt), directions);
}

enum class Membership { Inside, Outside, Boundary };

inline const char* to_string(Membership m) {
    switch (m) {
    case Membership::Inside: return "inside";
    case Membership::Outside: return "outside";
    case Membership::Boundary: return "boundary";
    }
    return "?";
}

/// Convex weights over the inner vertices reproducing v, if v is in the
/// inner polytope. A basic solution uses at most n+1 vertices.
inline std::optional<std::vector<double>> inner_weights(const SetApprox& approx, std::span<const double> v) {
    const std::size_t k = approx.inner_vertices.size();
    LinearProgram lp(k);
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::vector<double> row(k);
        for (std::size_t j = 0; j < k; ++j) row[j] = approx.inner_vertices[j][i];
        lp.add_row(std::move(row), RowSense::Equal, v[i]);
    }
    lp.add_row(std::vector<double>(k, 1.0), RowSense::Equal, 1.0);
    const LpResult r = solve_lp(lp);
    if (r.status != LpStatus::Optimal) return std::nullopt;
    return r.x;
}

/**
 * Classifies v against the approximation: outside when a sampled halfspace
 * is violated by more than tol, inside when v is a convex combination of
 * inner vertices, boundary when it is within tol of the inner polytope.
 * Throws Indeterminate when v lies in the sandwich farther than tol from the
 * inner polytope.
 */
inline Membership membership(const SetApprox& approx, std::span<const double> v, double tol = kBoundaryTolerance) {
    if (v.size() != approx.dimension()) throw std::invalid_argument("point has wrong dimension");
    for (const auto& s : approx.samples)
        if (dot(s.direction, v) - s.h > tol) return Membership::Outside;
    if (inner_weights(approx, v)) return Membership::Inside;
    const double d = distance_to_hull(approx.inner_vertices, v);
    if (d <= tol) return Membership::Boundary;
    throw Indeterminate("point lies between the inner and outer approximations; refine directions or grid", d);
}

/**
 * Mixture of witness structures with the given weights after reducing the
 * weighted points to at most n+1 with the same barycenter. Points must be
 * pairwise distinct.
 */
inline SignalStructure combine_witnesses(const std::vector<Point>& points,
                                         const std::vector<SignalStructure>& witnesses,
                                         const std::vector<double>& weights) {
    std::vector<WeightedPoint> atoms;
    std::vector<std::size_t> index;
    double total = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j)
        if (weights[j] > kWeightFloor) {
            atoms.push_back({weights[j], points[j]});
            index.push_back(j);
            total += weights[j];
        }
    if (atoms.empty()) throw std::invalid_argument("no positive weights to combine");
    const std::size_t n = points[index.front()].size();
    Point bary(n, 0.0);
    for (auto& a : atoms) {
        a.weight /= total;
        for (std::size_t i = 0; i < n; ++i) bary[i] += a.weight * a.point[i];
    }
    if (atoms.size() > n + 1) atoms = caratheodory_reduce(atoms, bary);
    std::vector<std::pair<double, SignalStructure>> parts;
    for (const auto& a : atoms)
        for (std::size_t j : index)
            if (points[j] == a.point) {
                parts.emplace_back(a.weight, witnesses[j]);
                break;
            }
    return mix(std::span<const std::pair<double, SignalStructure>>(parts));
}

/**
 * A structure whose expected values equal v: weights over at most n+1
 * inner vertices, then the mixture of their witnesses. The result has at
 * most (n+1)|X| atoms.
 */
inline SignalStructure implement_point(const SetApprox& approx, std::span<const double> v,
                                       double tol = kBoundaryTolerance) {
    const Membership m = membership(approx, v, tol);
    if (m == Membership::Outside) throw NotInSet("point is outside the achievable set");
    for (std::size_t j = 0; j < approx.inner_vertices.size(); ++j)
        if (norm_inf(subtract(approx.inner_vertices[j], v)) <= 1e-12) return approx.witnesses[j];
    std::vector<double> weights;
    if (auto w = inner_weights(approx, v))
        weights = std::move(*w);
    else
        weights = nearest_point(approx.inner_vertices, v).weights;
    return combine_witnesses(approx.inner_vertices, approx.witnesses, weights);
}

/// Hausdorff distances between inner approximations at consecutive priors.
inline std::vector<double> continuity_probe(const std::vector<Belief>& mus, const std::vector<ValueFunction>& vfuncs,
                                            std::size_t directions, const ConcavifyOptions& opt = {}) {
    const auto dirs = sample_directions(vfuncs.size(), directions);
    auto sets = parallel_map(mus.size(), [&](std::size_t i) {
        return approximate_set(SupportOracle(mus[i], vfuncs, opt), dirs).inner_vertices;
    });
    std::vector<double> out;
    for (std::size_t i = 1; i < sets.size(); ++i) out.push_back(hausdorff(sets[i - 1], sets[i]));
    return out;
}

} // namespace infodesign
