#pragma once

// Derivative-free maximisation over a polytope given by its vertices,
// optionally cut by extra halfspaces.

#include "errors.hpp"
#include "geometry.hpp"
#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace infodesign {

using Objective = std::function<double(std::span<const double>)>;

/// Nelder-Mead maximisation from x0 with an axis-aligned initial simplex.
inline Point nelder_mead(const std::function<double(const Point&)>& f, Point x0, double step, std::size_t max_evals,
                         double xtol) {
    const std::size_t k = x0.size();
    if (k == 0) return x0;
    std::vector<Point> x(k + 1, x0);
    std::vector<double> fx(k + 1);
    for (std::size_t i = 0; i < k; ++i) x[i + 1][i] += step;
    for (std::size_t i = 0; i <= k; ++i) fx[i] = f(x[i]);
    std::size_t evals = k + 1;
    std::vector<std::size_t> order(k + 1);

    auto along = [&](const Point& c, const Point& p, double t) {
        Point r(k);
        for (std::size_t d = 0; d < k; ++d) r[d] = c[d] + t * (p[d] - c[d]);
        return r;
    };
    while (evals < max_evals) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fx[a] > fx[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[k - 1];
        double size = 0.0;
        for (std::size_t i = 0; i <= k; ++i) size = std::max(size, norm_inf(subtract(x[i], x[best])));
        if (size <= xtol) break;

        Point c(k, 0.0);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t d = 0; d < k; ++d) c[d] += x[order[i]][d] / static_cast<double>(k);
        const Point xr = along(c, x[worst], -1.0);
        const double fr = f(xr);
        ++evals;
        if (fr > fx[best]) {
            const Point xe = along(c, x[worst], -2.0);
            const double fe = f(xe);
            ++evals;
            if (fe > fr) {
                x[worst] = xe;
                fx[worst] = fe;
            } else {
                x[worst] = xr;
                fx[worst] = fr;
            }
            continue;
        }
        if (fr > fx[second]) {
            x[worst] = xr;
            fx[worst] = fr;
            continue;
        }
        const bool outside = fr > fx[worst];
        const Point xc = outside ? along(c, xr, 0.5) : along(c, x[worst], 0.5);
        const double fc = f(xc);
        ++evals;
        if (outside ? fc >= fr : fc > fx[worst]) {
            x[worst] = xc;
            fx[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= k; ++i) {
            if (i == best) continue;
            x[i] = along(x[best], x[i], 0.5);
            fx[i] = f(x[i]);
            ++evals;
        }
    }
    const auto it = std::max_element(fx.begin(), fx.end());
    return x[static_cast<std::size_t>(it - fx.begin())];
}

/**
 * Vertices of conv(vertices) intersected with the given halfspaces (in the
 * ambient space). Empty when the intersection is empty.
 */
inline std::vector<Point> clip_polytope(const std::vector<Point>& vertices, const std::vector<Halfspace>& cuts,
                                        double tol = 1e-12) {
    if (vertices.empty() || cuts.empty()) return vertices;
    const AffineHull hull(vertices);
    const std::size_t k = hull.dimension();
    auto satisfied = [&](const Point& p) {
        for (const auto& c : cuts)
            if (dot(c.normal, p) - c.offset > tol * (1.0 + std::abs(c.offset))) return false;
        return true;
    };
    if (k == 0) {
        if (satisfied(vertices.front())) return {vertices.front()};
        return {};
    }
    std::vector<Point> coords;
    coords.reserve(vertices.size());
    for (const auto& v : vertices) coords.push_back(hull.coordinates(v));
    std::vector<Halfspace> hs = hull_facets(coords);
    for (const auto& c : cuts) {
        Point a(k);
        for (std::size_t i = 0; i < k; ++i) a[i] = dot(hull.basis()[i], c.normal);
        const double b = c.offset - dot(c.normal, hull.origin());
        const double len = norm2(a);
        if (len <= 1e-12) {
            if (b < -tol * (1.0 + std::abs(c.offset))) return {};
            continue;
        }
        for (double& x : a) x /= len;
        hs.push_back({a, b / len});
    }
    std::vector<Point> out;
    for (const auto& y : halfspace_vertices(hs, 1e-11)) out.push_back(hull.lift(y));
    return out;
}

struct PolytopeSearch {
    std::size_t points_per_dim = 50;
    std::size_t max_grid_points = 200000;
    std::size_t starts = 4;
    bool dense = true;
};

struct PolytopeArgmax {
    Point point;
    double value = -std::numeric_limits<double>::infinity();
};

/**
 * Maximises f over conv(vertices): dense evaluation on a grid of the
 * polytope's affine hull (plus the vertices), then Nelder-Mead from the best
 * few points on f composed with projection onto the polytope. f may return
 * -inf outside its domain. Extra start points (ambient) are polished too.
 */
inline PolytopeArgmax maximize_over_polytope(const std::vector<Point>& vertices, const Objective& f,
                                             const PolytopeSearch& opt = {}, const std::vector<Point>& extra_starts = {}) {
    PolytopeArgmax best;
    if (vertices.empty()) return best;
    const AffineHull hull(vertices);
    const std::size_t k = hull.dimension();
    if (k == 0) {
        best.point = vertices.front();
        best.value = f(best.point);
        return best;
    }
    std::vector<Point> ys;
    ys.reserve(vertices.size());
    for (const auto& v : vertices) ys.push_back(hull.coordinates(v));
    const std::vector<Halfspace> facets = hull_facets(ys);
    Point lo = ys.front(), hi = ys.front();
    for (const auto& y : ys)
        for (std::size_t i = 0; i < k; ++i) {
            lo[i] = std::min(lo[i], y[i]);
            hi[i] = std::max(hi[i], y[i]);
        }
    double extent = 0.0;
    for (std::size_t i = 0; i < k; ++i) extent = std::max(extent, hi[i] - lo[i]);

    auto inside = [&](const Point& y) {
        for (const auto& h : facets)
            if (dot(h.normal, y) - h.offset > 1e-12 * (1.0 + std::abs(h.offset))) return false;
        return true;
    };
    auto project = [&](const Point& y) { return inside(y) ? y : nearest_point(ys, y).point; };
    auto lifted = [&](const Point& y) {
        const Point p = project(y);
        return f(hull.lift(p)) - distance(p, y);
    };

    struct Start {
        double value;
        Point y;
    };
    std::vector<Start> starts;
    for (const auto& y : ys) starts.push_back({f(hull.lift(y)), y});
    for (const auto& s : extra_starts) {
        const Point y = project(hull.coordinates(s));
        starts.push_back({f(hull.lift(y)), y});
    }
    if (opt.dense) {
        const double cap = std::pow(static_cast<double>(opt.max_grid_points), 1.0 / static_cast<double>(k));
        const std::size_t per = std::max<std::size_t>(2, std::min<std::size_t>(opt.points_per_dim, static_cast<std::size_t>(cap)));
        std::vector<std::size_t> idx(k, 0);
        Point y(k);
        while (true) {
            for (std::size_t i = 0; i < k; ++i)
                y[i] = lo[i] + (hi[i] - lo[i]) * static_cast<double>(idx[i]) / static_cast<double>(per - 1);
            if (inside(y)) starts.push_back({f(hull.lift(y)), y});
            std::size_t i = 0;
            while (i < k && ++idx[i] == per) idx[i++] = 0;
            if (i == k) break;
        }
    }
    std::stable_sort(starts.begin(), starts.end(), [](const Start& a, const Start& b) { return a.value > b.value; });
    if (!(starts.front().value > -std::numeric_limits<double>::infinity())) return best;

    const double scale = extent > 0.0 ? extent : 1.0;
    const std::size_t max_evals = 400 * (k + 1);
    std::vector<Point> polished;
    for (const auto& s : starts) {
        if (polished.size() >= opt.starts + extra_starts.size()) break;
        if (!(s.value > -std::numeric_limits<double>::infinity())) break;
        bool seen = false;
        for (const auto& p : polished)
            if (norm_inf(subtract(p, s.y)) <= 1e-3 * scale) seen = true;
        if (seen) continue;
        polished.push_back(s.y);
        if (s.value > best.value) {
            best.value = s.value;
            best.point = s.y;
        }
        Point y = s.y;
        for (double step : {0.05, 0.005, 0.0005}) {
            y = project(nelder_mead(lifted, y, step * scale, max_evals, 1e-12 * (1.0 + scale)));
            const double v = f(hull.lift(y));
            if (v > best.value) {
                best.value = v;
                best.point = y;
            }
        }
    }
    // Vertices win round-off ties: they are implemented by a single witness.
    for (const auto& y : ys) {
        const double v = f(hull.lift(y));
        if (v >= best.value - 1e-12 * (1.0 + std::abs(best.value))) {
            best.point = y;
            best.value = v;
            break;
        }
    }
    best.point = hull.lift(best.point);
    return best;
}

} // namespace infodesign
