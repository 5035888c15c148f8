#pragma once

// Conditional-gradient maximisation of a smooth function over the
// achievable set, with the support oracle as linear maximisation oracle.

#include "core.hpp"
#include "linalg.hpp"
#include "posset.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace infodesign {

using Gradient = std::function<Point(std::span<const double>)>;

enum class StepRule {
    /// Re-optimise over the convex hull of all oracle points after each call.
    FullyCorrective,
    /// gamma_k = 2 / (k + 2).
    OpenLoop,
};

struct FwOptions {
    std::size_t max_iterations = 500;
    double gap_tol = 1e-7;
    StepRule rule = StepRule::FullyCorrective;
};

struct FwResult {
    std::vector<Point> points;
    std::vector<SignalStructure> witnesses;
    std::vector<double> weights;
    Point v;
    double gap = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    bool converged = false;

    SignalStructure structure() const { return combine_witnesses(points, witnesses, weights); }
};

namespace detail {

inline Point combination(const std::vector<Point>& points, const std::vector<double>& w) {
    Point v(points.front().size(), 0.0);
    for (std::size_t j = 0; j < points.size(); ++j)
        if (w[j] != 0.0)
            for (std::size_t i = 0; i < v.size(); ++i) v[i] += w[j] * points[j][i];
    return v;
}

/// Largest t in [0, tmax] where the directional derivative along d changes sign.
inline double line_search(const Gradient& grad, const Point& v, const Point& d, double tmax) {
    auto slope = [&](double t) {
        Point x = v;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += t * d[i];
        return dot(grad(x), d);
    };
    if (slope(tmax) >= 0.0) return tmax;
    if (slope(0.0) <= 0.0) return 0.0;
    double lo = 0.0, hi = tmax;
    for (int it = 0; it < 60 && hi - lo > 1e-15 * tmax; ++it) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Away-step Frank-Wolfe over conv(points), starting from weights w.
inline void correct(const Gradient& grad, const std::vector<Point>& points, std::vector<double>& w, double tol) {
    for (int it = 0; it < 10000; ++it) {
        const Point v = combination(points, w);
        const Point g = grad(v);
        const double gv = dot(g, v);
        std::size_t s = 0, a = points.size();
        double best = -std::numeric_limits<double>::infinity(), worst = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < points.size(); ++j) {
            const double sc = dot(g, points[j]);
            if (sc > best) {
                best = sc;
                s = j;
            }
            if (w[j] > 0.0 && sc < worst) {
                worst = sc;
                a = j;
            }
        }
        const double fw_gap = best - gv, away_gap = gv - worst;
        if (std::max(fw_gap, away_gap) <= tol) return;
        if (fw_gap >= away_gap) {
            const double t = line_search(grad, v, subtract(points[s], v), 1.0);
            if (t <= 0.0) return;
            for (double& x : w) x *= 1.0 - t;
            w[s] += t;
        } else {
            const double tmax = w[a] / (1.0 - w[a]);
            const double t = line_search(grad, v, subtract(v, points[a]), tmax);
            if (t <= 0.0) return;
            for (double& x : w) x *= 1.0 + t;
            w[a] = t >= tmax ? 0.0 : w[a] - t;
        }
    }
}

} // namespace detail

/**
 * Maximises a differentiable function over the achievable set of `oracle`.
 * Each iteration queries the oracle along the current gradient; the
 * Frank-Wolfe gap grad.(s - v) bounds the first-order suboptimality and
 * stops the run at opt.gap_tol. Starts from the no-information point.
 */
inline FwResult frank_wolfe(const SupportOracle& oracle, const Gradient& grad, const FwOptions& opt = {}) {
    FwResult r;
    r.points.push_back(oracle.no_information_point());
    r.witnesses.push_back(SignalStructure::degenerate(oracle.mu()));
    r.weights.push_back(1.0);
    r.v = r.points.front();
    for (std::size_t k = 0;; ++k) {
        const Point g = grad(r.v);
        if (norm2(g) == 0.0) {
            r.gap = 0.0;
            r.converged = true;
            break;
        }
        SupportSample s = oracle(g);
        r.gap = std::max(0.0, dot(g, subtract(s.point, r.v)));
        if (r.gap <= opt.gap_tol) {
            r.converged = true;
            break;
        }
        if (k >= opt.max_iterations) break;
        std::size_t idx = r.points.size();
        for (std::size_t j = 0; j < r.points.size(); ++j)
            if (norm_inf(subtract(r.points[j], s.point)) <= 1e-12) idx = j;
        if (idx == r.points.size()) {
            r.points.push_back(s.point);
            r.witnesses.push_back(std::move(s.witness));
            r.weights.push_back(0.0);
        }
        if (opt.rule == StepRule::OpenLoop) {
            const double t = 2.0 / (static_cast<double>(k) + 2.0);
            for (double& w : r.weights) w *= 1.0 - t;
            r.weights[idx] += t;
        } else {
            detail::correct(grad, r.points, r.weights, 1e-2 * opt.gap_tol);
        }
        r.v = detail::combination(r.points, r.weights);
        r.iterations = k + 1;
    }
    return r;
}

} // namespace infodesign
