#pragma once

// Independent brute-force oracles shared by the unit tests and the
// acceptance binary.

#include "gen.hpp"

#include <infodesign/apps.hpp>
#include <infodesign/concavify.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace oracles {

using namespace infodesign;
using testing_util::Gen;

// Best value over all one- and two-point Bayes-plausible supports drawn from
// the grid points {k/d} (binary states).
inline double two_point_search(const ValueFunction& w, double mu, std::size_t d) {
    double best = w(Belief::binary(mu));
    for (std::size_t i = 0; i <= d; ++i)
        for (std::size_t j = 0; j <= d; ++j) {
            const double a = static_cast<double>(i) / static_cast<double>(d);
            const double b = static_cast<double>(j) / static_cast<double>(d);
            if (!(a <= mu && mu <= b) || a == b) continue;
            const double wb = (mu - a) / (b - a);
            best = std::max(best, (1.0 - wb) * w(Belief::binary(a)) + wb * w(Belief::binary(b)));
        }
    return best;
}

// max(1, 3p): a sure payoff of 1 or a bet on x1 that pays 3.
inline ValueFunction bet() { return ValueFunction::decision({{1, 1}, {0, 3}}); }

inline Voter voter(ValueFunction f, double cost, double threshold) { return Voter{std::move(f), cost, threshold}; }

// Roots of ((x - mu)/x) F(0) + (mu/x) F(x) = c on each linear piece of a
// decision or piecewise-linear utility, solved in closed form after
// multiplying through by x.
inline std::vector<double> closed_form_roots(const Voter& v, double mu) {
    const double f0 = v.utility(Belief::binary(0.0));
    std::vector<std::pair<double, double>> lines;  // F = alpha + beta x
    if (const auto* d = std::get_if<DecisionUtility>(&v.utility.kind())) {
        for (const auto& row : d->payoffs) lines.emplace_back(row[0], row[1] - row[0]);
    } else {
        const auto& k = std::get<PiecewiseLinear>(v.utility.kind()).knots;
        lines.emplace_back(k.front().second, 0.0);
        lines.emplace_back(k.back().second, 0.0);
        for (std::size_t i = 0; i + 1 < k.size(); ++i) {
            const double beta = (k[i + 1].second - k[i].second) / (k[i + 1].first - k[i].first);
            lines.emplace_back(k[i].second - beta * k[i].first, beta);
        }
    }
    std::vector<double> out;
    for (auto [alpha, beta] : lines) {
        const double a = f0 - v.cost + mu * beta;
        const double b = mu * (f0 - alpha);
        if (std::abs(a) < 1e-14) continue;
        const double x = b / a;
        if (x > mu && x <= 1.0) out.push_back(x);
    }
    return out;
}

// Best success probability over all two-point structures {a, b} with
// a <= mu <= b drawn from grid(d), the thresholds and the critical-belief
// candidates. Participation is judged ex ante for each voter separately.
inline double voters_brute_force(const VoterSpec& s, std::size_t d = 200) {
    std::vector<double> xs;
    for (std::size_t k = 0; k <= d; ++k) xs.push_back(double(k) / double(d));
    xs.push_back(s.mu);
    for (const auto& v : s.voters) {
        xs.push_back(v.threshold);
        for (double r : closed_form_roots(v, s.mu)) xs.push_back(r);
    }
    auto f = [](const ValueFunction& w, double p) { return w(Belief::binary(p)); };
    double best = 0.0;
    for (double a : xs) {
        if (a > s.mu) continue;
        for (double b : xs) {
            if (b < s.mu || (b == a && a != s.mu)) continue;
            const double wb = b == a ? 1.0 : (s.mu - a) / (b - a), wa = 1.0 - wb;
            std::vector<bool> in(s.voters.size());
            for (std::size_t i = 0; i < s.voters.size(); ++i)
                in[i] = wa * f(s.voters[i].utility, a) + wb * f(s.voters[i].utility, b) >= s.voters[i].cost - 1e-9;
            auto passes = [&](double x) {
                std::size_t votes = 0;
                for (std::size_t i = 0; i < s.voters.size(); ++i)
                    if (in[i] && x >= s.voters[i].threshold) ++votes;
                return votes >= s.required;
            };
            best = std::max(best, (passes(a) ? wa : 0.0) + (passes(b) ? wb : 0.0));
        }
    }
    return best;
}

inline Voter random_voter(Gen& g) {
    const double u00 = g.uniform(), u01 = g.uniform(), u10 = g.uniform(), u11 = u01 + g.uniform(0.1, 1.0);
    ValueFunction f = ValueFunction::decision({{u00, u01}, {u10, u11}});
    const double top = std::max(std::max(u00, u10), u11);
    return voter(f, g.uniform(0.0, top + 0.1), g.uniform(0.05, 0.95));
}

inline VoterSpec random_voters(Gen& g) {
    VoterSpec s;
    const int n = g.integer(1, 5);
    for (int i = 0; i < n; ++i) s.voters.push_back(random_voter(g));
    s.required = std::size_t(g.integer(1, n));
    s.mu = g.uniform(0.05, 0.7);
    return s;
}

struct Basic {
    std::vector<std::pair<double, double>> atoms;  // (Pr x1, weight)
};

struct Segment {
    Basic e0, e1;
};

inline double expect(const Basic& b, const ValueFunction& f) {
    double s = 0.0;
    for (auto [p, w] : b.atoms) s += w * f(Belief::binary(p));
    return s;
}

// Every Bayes-plausible structure on at most three of the points lies on a
// segment between two structures with at most two atoms each whose supports
// together use at most three points.
inline std::vector<Segment> three_atom_segments(const std::vector<double>& pts, double mu) {
    std::vector<Basic> basics;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (std::abs(pts[i] - mu) < 1e-14) basics.push_back({{{pts[i], 1.0}}});
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (pts[i] < mu - 1e-14 && pts[j] > mu + 1e-14) {
                const double wj = (mu - pts[i]) / (pts[j] - pts[i]);
                basics.push_back({{{pts[i], 1.0 - wj}, {pts[j], wj}}});
            }
    }
    std::vector<Segment> out;
    for (std::size_t a = 0; a < basics.size(); ++a)
        for (std::size_t b = a; b < basics.size(); ++b) {
            std::vector<double> support;
            for (const auto* e : {&basics[a], &basics[b]})
                for (auto [p, w] : e->atoms)
                    if (std::find(support.begin(), support.end(), p) == support.end()) support.push_back(p);
            if (support.size() <= 3) out.push_back({basics[a], basics[b]});
        }
    return out;
}

// Exhaustive search over two-type menus of at most three atoms per type on
// grid(d) plus the prior. For fixed segments the problem is a linear program
// in (t1, t2) in [0,1]^2, maximised over all pairwise line intersections.
inline double screening_oracle(const ScreenSpec& s, std::size_t d) {
    const double mu = s.mu[1];
    std::vector<double> pts;
    for (std::size_t k = 0; k <= d; ++k) pts.push_back(double(k) / double(d));
    bool on_grid = false;
    for (double p : pts) on_grid = on_grid || std::abs(p - mu) < 1e-12;
    if (!on_grid) pts.push_back(mu);
    const auto segs = three_atom_segments(pts, mu);

    struct Lin {
        double c0, c1, c2;
    };
    double best = -1e300;
    const auto& t1 = s.types[0];
    const auto& t2 = s.types[1];
    for (const auto& s1 : segs)
        for (const auto& s2 : segs) {
            // E_{P1}[h] = (1 - x) h(e0) + x h(e1), likewise for P2 with y.
            auto along = [](const Segment& g, const ValueFunction& h) {
                const double a = expect(g.e0, h);
                return std::pair{a, expect(g.e1, h) - a};
            };
            const auto [a11, b11] = along(s1, t1.receiver);
            const auto [a21, b21] = along(s2, t1.receiver);
            const auto [a12, b12] = along(s1, t2.receiver);
            const auto [a22, b22] = along(s2, t2.receiver);
            const auto [v1, w1] = along(s1, t1.sender);
            const auto [v2, w2] = along(s2, t2.sender);
            const Lin obj{t1.probability * v1 + t2.probability * v2, t1.probability * w1, t2.probability * w2};
            const std::array<Lin, 6> lines{{{0, 1, 0}, {-1, 1, 0}, {0, 0, 1}, {-1, 0, 1}, {a11 - a21, b11, -b21},
                                            {a22 - a12, -b12, b22}}};
            auto feasible = [&](double x, double y) {
                const double tol = 1e-12;
                if (x < -tol || x > 1 + tol || y < -tol || y > 1 + tol) return false;
                return lines[4].c0 + lines[4].c1 * x + lines[4].c2 * y >= -tol &&
                       lines[5].c0 + lines[5].c1 * x + lines[5].c2 * y >= -tol;
            };
            for (std::size_t i = 0; i < 6; ++i)
                for (std::size_t j = i + 1; j < 6; ++j) {
                    const Lin& p = lines[i];
                    const Lin& q = lines[j];
                    const double det = p.c1 * q.c2 - p.c2 * q.c1;
                    if (std::abs(det) < 1e-14) continue;
                    const double x = (-p.c0 * q.c2 + q.c0 * p.c2) / det;
                    const double y = (-p.c1 * q.c0 + q.c1 * p.c0) / det;
                    if (feasible(x, y)) best = std::max(best, obj.c0 + obj.c1 * x + obj.c2 * y);
                }
        }
    return best;
}

} // namespace oracles
