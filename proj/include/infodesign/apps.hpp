#pragma once

// Two structured applications: persuading m of n voters who each pay a cost
// to listen, and screening a privately informed receiver with a menu of
// signal structures.

#include "concavify.hpp"
#include "core.hpp"
#include "errors.hpp"
#include "simplex_lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace infodesign {

// *******************************************************
// Voters
// *******************************************************

struct Voter {
    ValueFunction utility;
    double cost = 0.0;
    double threshold = 0.5;
};

/// Binary state; mu is Pr(x1). The proposal passes with `required` votes.
struct VoterSpec {
    std::vector<Voter> voters;
    std::size_t required = 1;
    double mu = 0.5;

    void validate() const {
        if (voters.empty()) throw SchemaError("at least one voter is required");
        if (required < 1 || required > voters.size())
            throw SchemaError("required votes must lie between 1 and the number of voters");
        if (!(mu > 0.0 && mu < 1.0)) throw SchemaError("prior must lie in (0,1)");
        for (std::size_t i = 0; i < voters.size(); ++i) {
            const auto& v = voters[i];
            const std::string who = "voter " + std::to_string(i);
            if (!(v.threshold > 0.0 && v.threshold < 1.0)) throw SchemaError(who + ": threshold must lie in (0,1)");
            if (!(v.cost >= 0.0) || !std::isfinite(v.cost)) throw SchemaError(who + ": cost must be finite and nonnegative");
            if (const auto* d = std::get_if<DecisionUtility>(&v.utility.kind()))
                for (const auto& row : d->payoffs)
                    if (row.size() != 2) throw SchemaError(who + ": voters need a binary state space");
        }
    }
};

/// Expected utility of the structure {0, x} with mean mu.
inline double participation_value(const ValueFunction& f, double mu, double x) {
    const double prior[2] = {1.0 - mu, mu}, at0[2] = {1.0, 0.0}, atx[2] = {1.0 - x, x};
    if (x <= mu) return f(std::span<const double>(prior));
    return (1.0 - mu / x) * f(std::span<const double>(at0)) + (mu / x) * f(std::span<const double>(atx));
}

/// Points of (mu, 1] where participation_value - cost changes sign, each
/// bisected to round-off and reported on its participating side. A scan of
/// 2000 steps brackets the sign changes.
inline std::vector<double> participation_crossings(const Voter& v, double mu) {
    auto in = [&](double x) { return participation_value(v.utility, mu, x) >= v.cost; };
    const int scan = 2000;
    std::vector<double> out;
    double prev = mu;
    bool prev_in = in(mu);
    for (int i = 1; i <= scan; ++i) {
        const double x = i == scan ? 1.0 : mu + (1.0 - mu) * i / scan;
        const bool x_in = in(x);
        if (x_in != prev_in) {
            double lo = prev, hi = x;
            while (true) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                (in(mid) == prev_in ? lo : hi) = mid;
            }
            out.push_back(prev_in ? lo : hi);
        }
        prev = x;
        prev_in = x_in;
    }
    return out;
}

/**
 * The critical belief: where the voter is indifferent about participating
 * under {0, nu}. Returns mu when the prior is itself a root, the first sign
 * change otherwise, 1 when participation holds for every nu in [mu, 1] and
 * nothing when it holds for none.
 */
inline std::optional<double> critical_belief(const Voter& v, double mu) {
    const double gap = participation_value(v.utility, mu, mu) - v.cost;
    if (std::abs(gap) <= 1e-12) return mu;
    const auto roots = participation_crossings(v, mu);
    if (!roots.empty()) return roots.front();
    if (gap > 0.0) return 1.0;
    return std::nullopt;
}

struct VoterResult {
    SignalStructure structure;
    double value = 0.0;
    /// Lowest posterior at which the proposal passes.
    double mu_star = 0.0;
    /// Voters who participate and vote a1 wherever the proposal passes.
    std::vector<std::size_t> selected;
    std::vector<std::optional<double>> critical;
};

/**
 * Optimal persuasion of `required` voters.
 *
 * Under {0, nu} voter i qualifies when nu reaches its threshold and its
 * participation constraint holds at nu; mu* is the smallest nu with enough
 * qualifying voters, found among the thresholds and the participation sign
 * changes, and {0, mu*} passes with probability mu/mu*. Passing for sure
 * needs both posteriors above the pivotal threshold tau <= mu; the prior
 * itself and the spreads {tau, 1} are tried first. Both families are optimal
 * among two-point structures when the utilities are convex.
 */
inline VoterResult voters_solve(const VoterSpec& spec) {
    spec.validate();
    VoterResult out;
    const double mu = spec.mu;
    const std::size_t n = spec.voters.size();
    std::vector<double> nus{mu};
    for (const auto& v : spec.voters) {
        out.critical.push_back(critical_belief(v, mu));
        if (v.threshold >= mu) nus.push_back(v.threshold);
        for (double x : participation_crossings(v, mu)) nus.push_back(x);
    }

    std::vector<double> taus{mu};
    for (const auto& v : spec.voters)
        if (v.threshold < mu) taus.push_back(v.threshold);
    std::sort(taus.begin() + 1, taus.end(), std::greater<>());
    for (double tau : taus) {
        const double w1 = (mu - tau) / (1.0 - tau);
        const SignalStructure p = w1 <= 0.0 ? SignalStructure::degenerate(Belief::binary(mu))
                                            : SignalStructure({Atom{1.0 - w1, Belief::binary(tau)}, Atom{w1, Belief::binary(1.0)}});
        std::vector<std::size_t> in;
        for (std::size_t i = 0; i < n; ++i)
            if (spec.voters[i].threshold <= tau && expected_value(p, spec.voters[i].utility) >= spec.voters[i].cost)
                in.push_back(i);
        if (in.size() >= spec.required) {
            out.structure = p;
            out.value = 1.0;
            out.mu_star = tau;
            out.selected = std::move(in);
            return out;
        }
    }

    std::sort(nus.begin(), nus.end());
    for (double nu : nus) {
        if (nu <= mu) continue;
        std::vector<std::size_t> in;
        for (std::size_t i = 0; i < n; ++i)
            if (nu >= spec.voters[i].threshold && participation_value(spec.voters[i].utility, mu, nu) >= spec.voters[i].cost)
                in.push_back(i);
        if (in.size() < spec.required) continue;
        out.mu_star = nu;
        out.value = mu / nu;
        out.structure = SignalStructure({Atom{1.0 - out.value, Belief::binary(0.0)}, Atom{out.value, Belief::binary(nu)}});
        out.selected = std::move(in);
        return out;
    }
    throw Unpersuadable("no posterior brings " + std::to_string(spec.required) + " voters to participate and vote a1");
}

// *******************************************************
// Screening
// *******************************************************

struct ScreenType {
    ValueFunction receiver;
    ValueFunction sender;
    double probability = 1.0;
};

struct ScreenSpec {
    std::vector<ScreenType> types;
    Belief mu;

    void validate() const {
        if (types.empty()) throw SchemaError("at least one type is required");
        if (mu.size() < 2) throw SchemaError("prior must have at least two states");
        double total = 0.0;
        for (const auto& t : types) {
            if (!(t.probability >= 0.0) || !std::isfinite(t.probability))
                throw SchemaError("type probabilities must be nonnegative");
            total += t.probability;
        }
        if (std::abs(total - 1.0) > 1e-9) throw SchemaError("type probabilities must sum to one");
    }
};

struct ScreenResult {
    std::vector<SignalStructure> menu;
    double value = 0.0;
    /// Best single structure offered to every type.
    double pooled_value = 0.0;
    /// ic_slack[t][s] = E_{P_t}[F_t] - E_{P_s}[F_t].
    std::vector<std::vector<double>> ic_slack;
    std::size_t nodes = 0;
};

namespace detail {

struct ScreenLp {
    std::vector<Belief> candidates;
    std::vector<std::vector<double>> receiver;  // [type][candidate]
    std::vector<std::vector<double>> sender;
};

inline std::vector<std::vector<double>> screen_weights(const ScreenLp& s, const ScreenSpec& spec,
                                                       const std::vector<std::vector<bool>>& banned, LpResult& r) {
    const std::size_t n = spec.types.size(), k = s.candidates.size(), states = spec.mu.size();
    LinearProgram lp(n * k);
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t g = 0; g < k; ++g) lp.objective[t * k + g] = spec.types[t].probability * s.sender[t][g];
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t x = 0; x < states; ++x) {
            std::vector<double> row(n * k, 0.0);
            for (std::size_t g = 0; g < k; ++g) row[t * k + g] = s.candidates[g][x];
            lp.add_row(std::move(row), RowSense::Equal, spec.mu[x]);
        }
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t u = 0; u < n; ++u) {
            if (t == u) continue;
            std::vector<double> row(n * k, 0.0);
            for (std::size_t g = 0; g < k; ++g) {
                row[t * k + g] += s.receiver[t][g];
                row[u * k + g] -= s.receiver[t][g];
            }
            lp.add_row(std::move(row), RowSense::GreaterEqual, 0.0);
        }
    // Banned columns are removed by forcing them to zero.
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t g = 0; g < k; ++g)
            if (banned[t][g]) {
                std::vector<double> row(n * k, 0.0);
                row[t * k + g] = 1.0;
                lp.add_row(std::move(row), RowSense::LessEqual, 0.0);
            }
    r = solve_lp(lp);
    std::vector<std::vector<double>> w(n, std::vector<double>(k, 0.0));
    if (r.status != LpStatus::Optimal) return w;
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t g = 0; g < k; ++g) w[t][g] = r.x[t * k + g] > kWeightFloor ? r.x[t * k + g] : 0.0;
    return w;
}

/// Fewer atoms for one type with the same mean, the same value of every
/// receiver utility and the same sender value.
inline std::vector<double> reduce_type(const ScreenLp& s, std::size_t t, const std::vector<double>& w) {
    const std::size_t n = s.receiver.size(), states = s.candidates.front().size();
    auto features = [&](std::size_t g) {
        Point p;
        for (std::size_t x = 0; x + 1 < states; ++x) p.push_back(s.candidates[g][x]);
        for (std::size_t u = 0; u < n; ++u) p.push_back(s.receiver[u][g]);
        p.push_back(s.sender[t][g]);
        return p;
    };
    std::vector<WeightedPoint> atoms;
    std::vector<std::size_t> index;
    double total = 0.0;
    for (std::size_t g = 0; g < w.size(); ++g)
        if (w[g] > 0.0) total += w[g];
    Point target;
    for (std::size_t g = 0; g < w.size(); ++g) {
        if (w[g] <= 0.0) continue;
        atoms.push_back({w[g] / total, features(g)});
        index.push_back(g);
        const Point f = atoms.back().point;
        if (target.empty()) target.assign(f.size(), 0.0);
        for (std::size_t i = 0; i < f.size(); ++i) target[i] += atoms.back().weight * f[i];
    }
    if (atoms.size() <= target.size() + 1) return w;
    // Features start with the posterior, so they identify the candidate.
    const auto reduced = caratheodory_reduce(atoms, target);
    std::vector<double> out(w.size(), 0.0);
    for (const auto& a : reduced)
        for (std::size_t j = 0; j < atoms.size(); ++j)
            if (atoms[j].point == a.point) {
                out[index[j]] += a.weight * total;
                break;
            }
    return out;
}

} // namespace detail

/**
 * Sender-optimal incentive-compatible menu on grid(d) plus the prior. Solves
 * the linear program over per-type weights exactly; when some type needs
 * more than atoms_cap posteriors, first tries a Carathéodory reduction that
 * keeps every IC quantity, then branches on which posterior to drop.
 * atoms_cap = 0 means (N + 2)|X|.
 */
inline ScreenResult screening_solve(const ScreenSpec& spec, std::size_t d, std::size_t atoms_cap = 0,
                                    std::size_t max_nodes = 100000) {
    spec.validate();
    const std::size_t n = spec.types.size(), states = spec.mu.size();
    if (atoms_cap == 0) atoms_cap = (n + 2) * states;

    detail::ScreenLp s;
    s.candidates = candidate_posteriors(spec.mu, {}, ConcavifyOptions{d, false});
    const std::size_t k = s.candidates.size();
    s.receiver.assign(n, std::vector<double>(k));
    s.sender.assign(n, std::vector<double>(k));
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t g = 0; g < k; ++g) {
            s.receiver[t][g] = spec.types[t].receiver(s.candidates[g]);
            s.sender[t][g] = spec.types[t].sender(s.candidates[g]);
        }

    ScreenResult out;
    {
        std::vector<double> pooled(k, 0.0);
        for (std::size_t t = 0; t < n; ++t)
            for (std::size_t g = 0; g < k; ++g) pooled[g] += spec.types[t].probability * s.sender[t][g];
        out.pooled_value = solve_envelope(s.candidates, pooled, spec.mu).objective;
    }

    using Ban = std::vector<std::vector<bool>>;
    std::vector<Ban> stack{Ban(n, std::vector<bool>(k, false))};
    std::optional<std::vector<std::vector<double>>> best;
    double best_value = -std::numeric_limits<double>::infinity();
    while (!stack.empty()) {
        if (++out.nodes > max_nodes)
            throw MaxIterations("screening branch-and-bound exceeded " + std::to_string(max_nodes) + " nodes",
                                best ? 0.0 : std::numeric_limits<double>::infinity());
        Ban ban = std::move(stack.back());
        stack.pop_back();
        LpResult r;
        auto w = detail::screen_weights(s, spec, ban, r);
        if (r.status == LpStatus::Infeasible) continue;
        if (r.status != LpStatus::Optimal) throw NumericalError("screening linear program did not terminate");
        if (r.objective <= best_value + 1e-12 * (1.0 + std::abs(best_value))) continue;

        std::size_t worst = n, worst_count = atoms_cap;
        for (std::size_t t = 0; t < n; ++t) {
            auto count = [&] { return static_cast<std::size_t>(std::count_if(w[t].begin(), w[t].end(), [](double x) { return x > 0.0; })); };
            if (count() > atoms_cap) w[t] = detail::reduce_type(s, t, w[t]);
            if (count() > worst_count) {
                worst_count = count();
                worst = t;
            }
        }
        if (worst == n) {
            best = std::move(w);
            best_value = r.objective;
            continue;
        }
        for (std::size_t g = k; g-- > 0;) {
            if (w[worst][g] <= 0.0) continue;
            Ban child = ban;
            child[worst][g] = true;
            stack.push_back(std::move(child));
        }
    }
    if (!best) throw InfeasibleProblem("no menu satisfies the atom cap");

    for (std::size_t t = 0; t < n; ++t) {
        std::vector<Atom> atoms;
        for (std::size_t g = 0; g < k; ++g)
            if ((*best)[t][g] > 0.0) atoms.push_back({(*best)[t][g], s.candidates[g]});
        out.menu.emplace_back(std::move(atoms));
    }
    out.value = 0.0;
    for (std::size_t t = 0; t < n; ++t) out.value += spec.types[t].probability * expected_value(out.menu[t], spec.types[t].sender);
    out.ic_slack.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t t = 0; t < n; ++t) {
        const double own = expected_value(out.menu[t], spec.types[t].receiver);
        for (std::size_t u = 0; u < n; ++u)
            if (u != t) out.ic_slack[t][u] = own - expected_value(out.menu[u], spec.types[t].receiver);
    }
    return out;
}

} // namespace infodesign
