#pragma once

// Polytope utilities in low dimension: nearest points, affine hulls, facet
// and vertex enumeration, Hausdorff distances.

#include "errors.hpp"
#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace infodesign {

struct NearestPoint {
    double distance = 0.0;
    Point point;
    /// Convex weights over the input vertices (zero for unused ones).
    std::vector<double> weights;
};

/**
 * Nearest point of conv(vertices) to x by Wolfe's minimum-norm-point
 * algorithm, run on the translated points v_i - x.
 */
inline NearestPoint nearest_point(const std::vector<Point>& vertices, std::span<const double> x) {
    if (vertices.empty()) throw std::invalid_argument("nearest point of an empty hull");
    const std::size_t k = vertices.size();
    std::vector<Point> p(k);
    double scale = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        p[i] = subtract(vertices[i], x);
        scale = std::max(scale, dot(p[i], p[i]));
    }
    scale = std::max(scale, 1e-300);

    std::vector<std::size_t> s;
    std::vector<double> w;
    {
        std::size_t best = 0;
        for (std::size_t i = 1; i < k; ++i)
            if (dot(p[i], p[i]) < dot(p[best], p[best])) best = i;
        s = {best};
        w = {1.0};
    }
    auto combine = [&](const std::vector<double>& coef) {
        Point y(x.size(), 0.0);
        for (std::size_t j = 0; j < s.size(); ++j)
            for (std::size_t d = 0; d < y.size(); ++d) y[d] += coef[j] * p[s[j]][d];
        return y;
    };
    // Affine minimiser of |sum a_j p_j| subject to sum a_j = 1 over the set s.
    auto affine_min = [&]() -> std::vector<double> {
        const std::size_t r = s.size();
        Matrix m(r + 1, r + 1);
        Point rhs(r + 1, 0.0);
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < r; ++j) m(i, j) = dot(p[s[i]], p[s[j]]);
            m(i, i) += 1e-14 * scale;
            m(i, r) = 1.0;
            m(r, i) = 1.0;
        }
        rhs[r] = 1.0;
        auto sol = solve_linear(m, rhs, 1e-18);
        if (!sol) return {};
        sol->resize(r);
        return *sol;
    };

    bool stalled = false;
    for (int outer = 0; outer < 2000 && !stalled; ++outer) {
        const Point y = combine(w);
        std::size_t j = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < k; ++i) {
            const double v = dot(p[i], y);
            if (v < best) {
                best = v;
                j = i;
            }
        }
        if (dot(y, y) - best <= 1e-13 * scale) break;
        if (std::find(s.begin(), s.end(), j) != s.end()) break;
        s.push_back(j);
        w.push_back(0.0);
        for (int inner = 0; inner < 1000; ++inner) {
            const auto a = affine_min();
            if (a.empty()) {
                s.pop_back();
                w.pop_back();
                stalled = true;
                break;
            }
            bool positive = true;
            for (double v : a)
                if (v <= 1e-14) positive = false;
            if (positive) {
                w = a;
                break;
            }
            double theta = 1.0;
            for (std::size_t i = 0; i < a.size(); ++i)
                if (a[i] <= 1e-14 && w[i] - a[i] > 0.0) theta = std::min(theta, w[i] / (w[i] - a[i]));
            for (std::size_t i = 0; i < w.size(); ++i) w[i] = (1.0 - theta) * w[i] + theta * a[i];
            std::vector<std::size_t> s2;
            std::vector<double> w2;
            for (std::size_t i = 0; i < w.size(); ++i)
                if (w[i] > 1e-14) {
                    s2.push_back(s[i]);
                    w2.push_back(w[i]);
                }
            s = std::move(s2);
            w = std::move(w2);
        }
    }
    NearestPoint out;
    out.weights.assign(k, 0.0);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t j = 0; j < s.size(); ++j) out.weights[s[j]] += w[j] / total;
    out.point.assign(x.size(), 0.0);
    for (std::size_t i = 0; i < k; ++i)
        if (out.weights[i] > 0.0)
            for (std::size_t d = 0; d < x.size(); ++d) out.point[d] += out.weights[i] * vertices[i][d];
    out.distance = distance(out.point, x);
    return out;
}

inline double distance_to_hull(const std::vector<Point>& vertices, std::span<const double> x) {
    return nearest_point(vertices, x).distance;
}

/// Hausdorff distance between conv(a) and conv(b), both given by vertices.
inline double hausdorff(const std::vector<Point>& a, const std::vector<Point>& b) {
    double d = 0.0;
    for (const auto& p : a) d = std::max(d, distance_to_hull(b, p));
    for (const auto& p : b) d = std::max(d, distance_to_hull(a, p));
    return d;
}

/// Affine hull of a point set: origin plus an orthonormal basis.
class AffineHull {
public:
    AffineHull() = default;
    AffineHull(const std::vector<Point>& points, double tol = 1e-9) {
        if (points.empty()) throw std::invalid_argument("affine hull of no points");
        origin_.assign(points.front().size(), 0.0);
        for (const auto& p : points)
            for (std::size_t i = 0; i < origin_.size(); ++i) origin_[i] += p[i] / static_cast<double>(points.size());
        std::vector<Point> diffs;
        diffs.reserve(points.size());
        for (const auto& p : points) diffs.push_back(subtract(p, origin_));
        basis_ = orthonormal_basis(diffs, tol);
        // Absolute floor so that a cloud of numerically identical points is a point.
        double spread = 0.0;
        for (const auto& d : diffs) spread = std::max(spread, norm2(d));
        if (spread <= 1e-12) basis_.clear();
    }

    std::size_t dimension() const noexcept { return basis_.size(); }
    std::size_t ambient() const noexcept { return origin_.size(); }
    const Point& origin() const noexcept { return origin_; }
    const std::vector<Point>& basis() const noexcept { return basis_; }

    Point coordinates(std::span<const double> x) const {
        const Point d = subtract(x, origin_);
        Point c(basis_.size());
        for (std::size_t i = 0; i < basis_.size(); ++i) c[i] = dot(basis_[i], d);
        return c;
    }
    Point lift(std::span<const double> c) const {
        Point x = origin_;
        for (std::size_t i = 0; i < basis_.size(); ++i)
            for (std::size_t d = 0; d < x.size(); ++d) x[d] += c[i] * basis_[i][d];
        return x;
    }
    /// Maps a direction in hull coordinates to the ambient space.
    Point lift_direction(std::span<const double> c) const {
        Point x(origin_.size(), 0.0);
        for (std::size_t i = 0; i < basis_.size(); ++i)
            for (std::size_t d = 0; d < x.size(); ++d) x[d] += c[i] * basis_[i][d];
        return x;
    }
    /// Orthonormal basis of the orthogonal complement of the hull directions.
    std::vector<Point> complement() const {
        std::vector<Point> all = basis_;
        const std::size_t n = origin_.size();
        for (std::size_t i = 0; i < n; ++i) {
            Point e(n, 0.0);
            e[i] = 1.0;
            all.push_back(e);
        }
        std::vector<Point> full = orthonormal_basis_ordered(all);
        full.erase(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(basis_.size()));
        return full;
    }

private:
    static std::vector<Point> orthonormal_basis_ordered(const std::vector<Point>& vs) {
        std::vector<Point> out;
        for (const auto& v : vs) {
            Point q = v;
            for (const auto& b : out) {
                const double c = dot(q, b);
                for (std::size_t i = 0; i < q.size(); ++i) q[i] -= c * b[i];
            }
            const double nq = norm2(q);
            if (nq > 1e-9) {
                for (double& x : q) x /= nq;
                out.push_back(std::move(q));
            }
        }
        return out;
    }

    Point origin_;
    std::vector<Point> basis_;
};

/// { y : normal . y <= offset }.
struct Halfspace {
    Point normal;
    double offset = 0.0;
};

namespace detail {

inline void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& fn) {
    if (k > n) return;
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        fn(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

inline bool same_halfspace(const Halfspace& a, const Halfspace& b) {
    return norm_inf(subtract(a.normal, b.normal)) <= 1e-9 && std::abs(a.offset - b.offset) <= 1e-9;
}

} // namespace detail

/**
 * Facets of conv(points) for full-dimensional point sets in R^k (the caller
 * passes hull coordinates). Normals are unit and outward.
 */
inline std::vector<Halfspace> hull_facets(const std::vector<Point>& points, double tol = 1e-9) {
    std::vector<Halfspace> out;
    if (points.empty()) return out;
    const std::size_t k = points.front().size();
    if (k == 0) return out;
    double scale = 1.0;
    for (const auto& p : points) scale = std::max(scale, norm_inf(p));
    if (k == 1) {
        double lo = points.front()[0], hi = lo;
        for (const auto& p : points) {
            lo = std::min(lo, p[0]);
            hi = std::max(hi, p[0]);
        }
        out.push_back({{1.0}, hi});
        out.push_back({{-1.0}, -lo});
        return out;
    }
    if (k == 2) {
        // Andrew's monotone chain, counter-clockwise.
        std::vector<Point> pts = points;
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end(),
                              [](const Point& a, const Point& b) { return norm_inf(subtract(a, b)) <= 1e-12; }),
                  pts.end());
        auto cross = [](const Point& o, const Point& a, const Point& b) {
            return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
        };
        std::vector<Point> hull(2 * pts.size());
        std::size_t h = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            while (h >= 2 && cross(hull[h - 2], hull[h - 1], pts[i]) <= tol * scale * scale) --h;
            hull[h++] = pts[i];
        }
        for (std::size_t i = pts.size() - 1, t = h + 1; i-- > 0;) {
            while (h >= t && cross(hull[h - 2], hull[h - 1], pts[i]) <= tol * scale * scale) --h;
            hull[h++] = pts[i];
        }
        hull.resize(h > 1 ? h - 1 : h);
        for (std::size_t i = 0; i < hull.size(); ++i) {
            const Point& a = hull[i];
            const Point& b = hull[(i + 1) % hull.size()];
            Point nrm{b[1] - a[1], a[0] - b[0]};
            const double len = norm2(nrm);
            if (len <= 1e-15) continue;
            for (double& x : nrm) x /= len;
            out.push_back({nrm, dot(nrm, a)});
        }
        return out;
    }
    detail::for_each_subset(points.size(), k, [&](const std::vector<std::size_t>& idx) {
        Matrix m(k, k + 1);
        for (std::size_t r = 0; r < k; ++r) {
            for (std::size_t c = 0; c < k; ++c) m(r, c) = points[idx[r]][c];
            m(r, k) = -1.0;
        }
        const auto nv = null_vector(m, 1e-10);
        if (!nv) return;
        Point nrm(nv->begin(), nv->begin() + static_cast<std::ptrdiff_t>(k));
        const double len = norm2(nrm);
        if (len <= 1e-12) return;
        double off = (*nv)[k] / len;
        for (double& x : nrm) x /= len;
        bool any_above = false, any_below = false;
        for (const auto& p : points) {
            const double s = dot(nrm, p) - off;
            if (s > tol * scale) any_above = true;
            if (s < -tol * scale) any_below = true;
        }
        if (any_above && any_below) return;
        if (any_above) {
            for (double& x : nrm) x = -x;
            off = -off;
        }
        Halfspace hs{nrm, off};
        for (const auto& e : out)
            if (detail::same_halfspace(e, hs)) return;
        out.push_back(std::move(hs));
    });
    return out;
}

/// Vertices of the bounded polyhedron { y : a_i . y <= b_i } in R^k.
inline std::vector<Point> halfspace_vertices(const std::vector<Halfspace>& hs, double tol = 1e-9) {
    std::vector<Point> out;
    if (hs.empty()) return out;
    const std::size_t k = hs.front().normal.size();
    if (k == 0) return out;
    double scale = 1.0;
    for (const auto& h : hs) scale = std::max(scale, std::abs(h.offset));
    detail::for_each_subset(hs.size(), k, [&](const std::vector<std::size_t>& idx) {
        Matrix m(k, k);
        Point b(k);
        for (std::size_t r = 0; r < k; ++r) {
            for (std::size_t c = 0; c < k; ++c) m(r, c) = hs[idx[r]].normal[c];
            b[r] = hs[idx[r]].offset;
        }
        auto y = solve_linear(m, b, 1e-10);
        if (!y) return;
        for (const auto& h : hs)
            if (dot(h.normal, *y) - h.offset > tol * scale) return;
        for (const auto& e : out)
            if (norm_inf(subtract(e, *y)) <= 1e-10 * scale) return;
        out.push_back(std::move(*y));
    });
    return out;
}

} // namespace infodesign
