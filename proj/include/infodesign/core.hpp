#pragma once

// Belief-simplex primitives shared by every solver: beliefs, finite signal
// structures, value functions on the simplex and regular simplex grids.

#include "errors.hpp"
#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace infodesign {

inline constexpr double kNegativeTolerance = 1e-9;
inline constexpr double kMergeTolerance = 1e-10;
/// Weights at or below this are treated as absent atoms.
inline constexpr double kWeightFloor = 1e-15;
/// Threshold comparisons (indicator kinks, vote thresholds) forgive this much.
inline constexpr double kThresholdSlack = 1e-12;

// *******************************************************
// Belief
// *******************************************************

/**
 * A probability vector over the finite state set.
 *
 * Entries below -1e-9 are rejected; smaller negative noise is clipped and the
 * vector is renormalised, so a constructed Belief always sums to one.
 */
class Belief {
public:
    Belief() = default;

    explicit Belief(std::vector<double> probs) : probs_(std::move(probs)) {
        if (probs_.empty()) throw std::invalid_argument("Belief needs at least one state");
        double sum = 0.0;
        for (double& p : probs_) {
            if (!std::isfinite(p)) throw std::invalid_argument("Belief entry is not finite");
            if (p < -kNegativeTolerance)
                throw std::invalid_argument("Belief entry " + std::to_string(p) + " is negative");
            if (p < 0.0) p = 0.0;
            sum += p;
        }
        if (!(sum > 0.0)) throw std::invalid_argument("Belief has zero mass");
        if (sum != 1.0)
            for (double& p : probs_) p /= sum;
    }

    /// Binary state space, given Pr(x1).
    static Belief binary(double p1) { return Belief({1.0 - p1, p1}); }

    static Belief vertex(std::size_t states, std::size_t x) {
        std::vector<double> p(states, 0.0);
        p.at(x) = 1.0;
        return Belief(std::move(p));
    }

    static Belief uniform(std::size_t states) {
        return Belief(std::vector<double>(states, 1.0 / static_cast<double>(states)));
    }

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    std::span<const double> probs() const noexcept { return probs_; }
    const std::vector<double>& vector() const noexcept { return probs_; }

    double max_distance(const Belief& other) const {
        double m = 0.0;
        for (std::size_t i = 0; i < probs_.size(); ++i)
            m = std::max(m, std::abs(probs_[i] - other.probs_[i]));
        return m;
    }

    friend bool operator==(const Belief&, const Belief&) = default;

private:
    std::vector<double> probs_;
};

inline double entropy(std::span<const double> p) {
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= x * std::log(x);
    return h;
}

// *******************************************************
// SimplexGrid
// *******************************************************

/**
 * All beliefs whose coordinates are integer multiples of 1/d, listed in
 * lexicographic order of their integer count vectors.
 *
 * Copies share the point table. Besides enumeration the grid provides
 * barycentric interpolation over its Freudenthal triangulation.
 */
class SimplexGrid {
public:
    SimplexGrid() = default;

    SimplexGrid(std::size_t states, std::size_t resolution) {
        if (states == 0) throw std::invalid_argument("SimplexGrid needs at least one state");
        if (resolution == 0) throw std::invalid_argument("SimplexGrid resolution must be positive");
        auto data = std::make_shared<Data>();
        data->states = states;
        data->resolution = resolution;
        std::vector<int> counts(states, 0);
        enumerate(*data, counts, 0, static_cast<int>(resolution));
        data_ = std::move(data);
    }

    std::size_t states() const noexcept { return data_ ? data_->states : 0; }
    std::size_t resolution() const noexcept { return data_ ? data_->resolution : 0; }
    std::size_t size() const noexcept { return data_ ? data_->points.size() : 0; }

    const Belief& point(std::size_t i) const { return data_->points[i]; }
    std::span<const Belief> points() const { return data_->points; }
    std::span<const int> counts(std::size_t i) const {
        return {data_->counts.data() + i * data_->states, data_->states};
    }

    std::optional<std::size_t> index_of(std::span<const int> counts) const {
        const auto it = data_->index.find(key(*data_, counts));
        if (it == data_->index.end()) return std::nullopt;
        return it->second;
    }

    /// Index of the grid point equal to `mu` within `tol`, if any.
    std::optional<std::size_t> find(std::span<const double> mu, double tol = 1e-9) const {
        const double d = static_cast<double>(resolution());
        std::vector<int> c(mu.size());
        int total = 0;
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const double scaled = mu[i] * d;
            c[i] = static_cast<int>(std::lround(scaled));
            if (std::abs(scaled - c[i]) > tol * d) return std::nullopt;
            total += c[i];
        }
        if (total != static_cast<int>(resolution())) return std::nullopt;
        return index_of(c);
    }

    /// Grid indices and barycentric weights of the triangulation cell that
    /// contains `mu`. Weights are positive and sum to one.
    std::vector<std::pair<std::size_t, double>> interpolation_stencil(std::span<const double> mu) const {
        const std::size_t s = states();
        if (mu.size() != s) throw std::invalid_argument("belief dimension does not match grid");
        if (s == 1) return {{0, 1.0}};
        const double d = static_cast<double>(resolution());
        const std::size_t m = s - 1;
        // Cumulative coordinates w_k = d * sum_{i>=k} mu_i, k = 1..m, nonincreasing in k.
        std::vector<double> w(m);
        double tail = 0.0;
        for (std::size_t k = s; k-- > 1;) {
            tail += mu[k];
            w[k - 1] = std::clamp(tail * d, 0.0, d);
        }
        std::vector<int> base(m);
        std::vector<double> frac(m);
        for (std::size_t k = 0; k < m; ++k) {
            double fl = std::floor(w[k]);
            double r = w[k] - fl;
            if (r > 1.0 - 1e-10) {
                fl += 1.0;
                r = 0.0;
            } else if (r < 1e-10) {
                r = 0.0;
            }
            base[k] = static_cast<int>(fl);
            frac[k] = r;
        }
        for (std::size_t k = 1; k < m; ++k) {
            // Snapping can break monotonicity by one unit at a tie; repair it.
            if (base[k] > base[k - 1] || (base[k] == base[k - 1] && frac[k] > frac[k - 1])) {
                base[k] = base[k - 1];
                frac[k] = std::min(frac[k], frac[k - 1]);
            }
        }
        std::vector<std::size_t> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });

        std::vector<std::pair<std::size_t, double>> stencil;
        std::vector<int> u = base;
        auto emit = [&](double weight) {
            if (weight <= 0.0) return;
            std::vector<int> c(s);
            c[0] = static_cast<int>(resolution()) - u[0];
            for (std::size_t k = 1; k < m; ++k) c[k] = u[k - 1] - u[k];
            c[m] = u[m - 1];
            const auto idx = index_of(c);
            if (!idx) throw std::logic_error("interpolation vertex outside grid");
            stencil.emplace_back(*idx, weight);
        };
        emit(1.0 - frac[order[0]]);
        for (std::size_t j = 0; j < m; ++j) {
            u[order[j]] += 1;
            const double next = j + 1 < m ? frac[order[j + 1]] : 0.0;
            emit(frac[order[j]] - next);
        }
        return stencil;
    }

    friend bool operator==(const SimplexGrid& a, const SimplexGrid& b) {
        return a.states() == b.states() && a.resolution() == b.resolution();
    }

private:
    struct Data {
        std::size_t states = 0;
        std::size_t resolution = 0;
        std::vector<Belief> points;
        std::vector<int> counts;
        std::unordered_map<std::uint64_t, std::size_t> index;
    };

    static std::uint64_t key(const Data& data, std::span<const int> counts) {
        std::uint64_t k = 0;
        for (int c : counts) k = k * (data.resolution + 1) + static_cast<std::uint64_t>(c);
        return k;
    }

    static void enumerate(Data& data, std::vector<int>& counts, std::size_t pos, int remaining) {
        if (pos + 1 == counts.size()) {
            counts[pos] = remaining;
            std::vector<double> p(counts.size());
            const double d = static_cast<double>(data.resolution);
            for (std::size_t i = 0; i < counts.size(); ++i) p[i] = counts[i] / d;
            data.index.emplace(key(data, counts), data.points.size());
            data.points.emplace_back(std::move(p));
            data.counts.insert(data.counts.end(), counts.begin(), counts.end());
            return;
        }
        for (int c = 0; c <= remaining; ++c) {
            counts[pos] = c;
            enumerate(data, counts, pos + 1, remaining - c);
        }
    }

    std::shared_ptr<const Data> data_;
};

// *******************************************************
// ValueFunction
// *******************************************************

/// max over actions of the expected payoff; payoffs[a][x].
struct DecisionUtility {
    std::vector<std::vector<double>> payoffs;
};

/// -sum mu_x ln mu_x with 0 ln 0 = 0.
struct Entropy {};

/// 1 when mu[coordinate] >= threshold, else 0.
struct Indicator {
    double threshold = 0.5;
    std::size_t coordinate = 1;
};

/// Linear interpolation of (x, y) knots in one belief coordinate; constant
/// beyond the first and last knot.
struct PiecewiseLinear {
    std::size_t coordinate = 1;
    std::vector<std::pair<double, double>> knots;
};

/// Values on a SimplexGrid, interpolated barycentrically.
struct Tabulated {
    SimplexGrid grid;
    std::vector<double> values;
};

/**
 * A map from beliefs to reals, tagged with its kind.
 *
 * All kinds are continuous on the simplex except Indicator. Evaluation is
 * const and thread-safe.
 */
class ValueFunction {
public:
    using Kind = std::variant<DecisionUtility, Entropy, Indicator, PiecewiseLinear, Tabulated>;

    ValueFunction() : kind_(Entropy{}) {}
    ValueFunction(Kind kind, std::string label = {}) : kind_(std::move(kind)), label_(std::move(label)) {
        validate();
    }

    static ValueFunction decision(std::vector<std::vector<double>> payoffs, std::string label = {}) {
        return ValueFunction(DecisionUtility{std::move(payoffs)}, std::move(label));
    }
    static ValueFunction entropy(std::string label = {}) { return ValueFunction(Entropy{}, std::move(label)); }
    static ValueFunction indicator(double threshold, std::size_t coordinate = 1, std::string label = {}) {
        return ValueFunction(Indicator{threshold, coordinate}, std::move(label));
    }
    static ValueFunction piecewise_linear(std::vector<std::pair<double, double>> knots, std::size_t coordinate = 1,
                                          std::string label = {}) {
        return ValueFunction(PiecewiseLinear{coordinate, std::move(knots)}, std::move(label));
    }
    static ValueFunction tabulated(SimplexGrid grid, std::vector<double> values, std::string label = {}) {
        return ValueFunction(Tabulated{std::move(grid), std::move(values)}, std::move(label));
    }

    const Kind& kind() const noexcept { return kind_; }
    const std::string& label() const noexcept { return label_; }
    std::string kind_name() const {
        static constexpr const char* names[] = {"decision", "entropy", "indicator", "pwl", "table"};
        return names[kind_.index()];
    }

    double operator()(std::span<const double> mu) const {
        return std::visit([&](const auto& k) { return evaluate(k, mu); }, kind_);
    }
    double operator()(const Belief& mu) const { return (*this)(mu.probs()); }

    /// Beliefs where the function has a kink or jump, for binary state
    /// spaces; adding them to a discretisation makes the envelope exact.
    std::vector<Belief> knots(std::size_t states) const {
        std::vector<Belief> out;
        if (states != 2) return out;
        auto at = [&](std::size_t coordinate, double t) {
            if (t < 0.0 || t > 1.0) return;
            out.push_back(coordinate == 1 ? Belief::binary(t) : Belief::binary(1.0 - t));
        };
        if (const auto* ind = std::get_if<Indicator>(&kind_)) at(ind->coordinate, ind->threshold);
        if (const auto* pwl = std::get_if<PiecewiseLinear>(&kind_))
            for (const auto& [x, y] : pwl->knots) at(pwl->coordinate, x);
        if (const auto* dec = std::get_if<DecisionUtility>(&kind_)) {
            // Indifference beliefs between every pair of actions.
            for (std::size_t a = 0; a < dec->payoffs.size(); ++a)
                for (std::size_t b = a + 1; b < dec->payoffs.size(); ++b) {
                    const double d0 = dec->payoffs[a][0] - dec->payoffs[b][0];
                    const double d1 = dec->payoffs[a][1] - dec->payoffs[b][1];
                    if (d0 != d1) at(1, d0 / (d0 - d1));
                }
        }
        return out;
    }

private:
    void validate() const {
        if (const auto* dec = std::get_if<DecisionUtility>(&kind_)) {
            if (dec->payoffs.empty()) throw std::invalid_argument("decision utility needs at least one action");
            for (const auto& row : dec->payoffs)
                if (row.size() != dec->payoffs.front().size())
                    throw std::invalid_argument("decision payoff rows differ in length");
        }
        if (const auto* pwl = std::get_if<PiecewiseLinear>(&kind_)) {
            if (pwl->knots.empty()) throw std::invalid_argument("piecewise-linear function needs knots");
            for (std::size_t i = 1; i < pwl->knots.size(); ++i)
                if (!(pwl->knots[i].first > pwl->knots[i - 1].first))
                    throw std::invalid_argument("piecewise-linear knots must be strictly increasing");
        }
        if (const auto* tab = std::get_if<Tabulated>(&kind_)) {
            if (tab->values.size() != tab->grid.size())
                throw std::invalid_argument("table size does not match its grid");
        }
    }

    static double evaluate(const DecisionUtility& k, std::span<const double> mu) {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& row : k.payoffs) {
            if (row.size() != mu.size()) throw std::invalid_argument("decision payoffs do not match state count");
            best = std::max(best, dot(row, mu));
        }
        return best;
    }
    static double evaluate(const Entropy&, std::span<const double> mu) { return infodesign::entropy(mu); }
    static double evaluate(const Indicator& k, std::span<const double> mu) {
        return mu[k.coordinate] >= k.threshold - kThresholdSlack ? 1.0 : 0.0;
    }
    static double evaluate(const PiecewiseLinear& k, std::span<const double> mu) {
        const double t = mu[k.coordinate];
        const auto& kn = k.knots;
        if (t <= kn.front().first) return kn.front().second;
        if (t >= kn.back().first) return kn.back().second;
        const auto it = std::upper_bound(kn.begin(), kn.end(), t,
                                         [](double v, const auto& knot) { return v < knot.first; });
        const auto& [x1, y1] = *it;
        const auto& [x0, y0] = *(it - 1);
        return y0 + (y1 - y0) * (t - x0) / (x1 - x0);
    }
    static double evaluate(const Tabulated& k, std::span<const double> mu) {
        double v = 0.0;
        for (const auto& [idx, w] : k.grid.interpolation_stencil(mu)) v += w * k.values[idx];
        return v;
    }

    Kind kind_;
    std::string label_;
};

// *******************************************************
// SignalStructure
// *******************************************************

struct Atom {
    double weight;
    Belief posterior;
};

/**
 * A finite distribution over posterior beliefs.
 *
 * Construction canonicalises: atoms with weight <= 1e-15 are dropped,
 * posteriors within 1e-10 (max-norm) are merged at their weighted mean, and
 * weights are rescaled to sum to one. Insertion order of first occurrence is
 * kept so outputs are deterministic.
 */
class SignalStructure {
public:
    SignalStructure() = default;

    explicit SignalStructure(std::vector<Atom> atoms) {
        double total = 0.0;
        for (auto& a : atoms) {
            if (!std::isfinite(a.weight) || a.weight < -kWeightFloor)
                throw std::invalid_argument("signal weights must be nonnegative");
            if (a.weight <= kWeightFloor) continue;
            if (!atoms_.empty() && a.posterior.size() != atoms_.front().posterior.size())
                throw std::invalid_argument("posteriors live on different state spaces");
            bool merged = false;
            for (auto& b : atoms_) {
                if (b.posterior.max_distance(a.posterior) <= kMergeTolerance) {
                    std::vector<double> p(b.posterior.size());
                    const double w = b.weight + a.weight;
                    for (std::size_t i = 0; i < p.size(); ++i)
                        p[i] = (b.weight * b.posterior[i] + a.weight * a.posterior[i]) / w;
                    b = Atom{w, Belief(std::move(p))};
                    merged = true;
                    break;
                }
            }
            total += a.weight;
            if (!merged) atoms_.push_back(std::move(a));
        }
        if (atoms_.empty()) throw std::invalid_argument("signal structure has no atoms");
        if (std::abs(total - 1.0) > 1e-6)
            throw std::invalid_argument("signal weights sum to " + std::to_string(total));
        for (auto& a : atoms_) a.weight /= total;
    }

    /// The uninformative structure delta_mu.
    static SignalStructure degenerate(Belief mu) { return SignalStructure({Atom{1.0, std::move(mu)}}); }

    std::span<const Atom> atoms() const noexcept { return atoms_; }
    std::size_t support_size() const noexcept { return atoms_.size(); }
    std::size_t states() const { return atoms_.empty() ? 0 : atoms_.front().posterior.size(); }

private:
    std::vector<Atom> atoms_;
};

/// Sum of weight times posterior.
inline Belief barycenter(const SignalStructure& p) {
    std::vector<double> mu(p.states(), 0.0);
    for (const auto& a : p.atoms())
        for (std::size_t i = 0; i < mu.size(); ++i) mu[i] += a.weight * a.posterior[i];
    return Belief(std::move(mu));
}

inline double expected_value(const SignalStructure& p, const ValueFunction& v) {
    double s = 0.0;
    for (const auto& a : p.atoms()) s += a.weight * v(a.posterior);
    return s;
}

/// (E_P[V^1], ..., E_P[V^n]).
inline Point expected_values(const SignalStructure& p, std::span<const ValueFunction> vs) {
    Point out(vs.size(), 0.0);
    for (const auto& a : p.atoms())
        for (std::size_t i = 0; i < vs.size(); ++i) out[i] += a.weight * vs[i](a.posterior);
    return out;
}

/// beta * P1 + (1 - beta) * P2.
inline SignalStructure mix(const SignalStructure& p1, const SignalStructure& p2, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("mixing weight must lie in [0,1]");
    if (p1.states() != p2.states()) throw std::invalid_argument("cannot mix structures on different state spaces");
    std::vector<Atom> atoms;
    for (const auto& a : p1.atoms()) atoms.push_back({beta * a.weight, a.posterior});
    for (const auto& a : p2.atoms()) atoms.push_back({(1.0 - beta) * a.weight, a.posterior});
    return SignalStructure(std::move(atoms));
}

/// Convex combination of several structures; weights must sum to one.
inline SignalStructure mix(std::span<const std::pair<double, SignalStructure>> parts) {
    std::vector<Atom> atoms;
    for (const auto& [w, s] : parts)
        for (const auto& a : s.atoms()) atoms.push_back({w * a.weight, a.posterior});
    return SignalStructure(std::move(atoms));
}

/// E_P[H(mu) - H(nu)], the expected entropy reduction of P.
inline double information(const SignalStructure& p) {
    double h = 0.0;
    for (const auto& a : p.atoms()) h += a.weight * entropy(a.posterior.probs());
    return entropy(barycenter(p).probs()) - h;
}

} // namespace infodesign
