#pragma once

// Small dense linear algebra used by the LP, the geometry routines and the
// solvers. Every problem here has at most a few hundred entries, so nothing
// is blocked or vectorised.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace infodesign {

using Point = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

inline Point subtract(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    Point r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    return norm2(subtract(a, b));
}

/// Returns a/|a|; a zero vector is returned unchanged.
inline Point normalized(std::span<const double> a) {
    Point r(a.begin(), a.end());
    const double n = norm2(a);
    if (n > 0.0)
        for (double& x : r) x /= n;
    return r;
}

/// Row-major dense matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Solves the square system A x = b by Gaussian elimination with partial
/// pivoting. Returns nullopt when a pivot falls below `pivot_tol` times the
/// largest entry of A.
inline std::optional<Point> solve_linear(Matrix a, Point b, double pivot_tol = 1e-13) {
    const std::size_t n = a.rows();
    assert(a.cols() == n && b.size() == n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, norm_inf(a.row(i)));
    if (scale == 0.0) return n == 0 ? std::optional<Point>(Point{}) : std::nullopt;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (std::abs(a(piv, k)) <= pivot_tol * scale) return std::nullopt;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    Point x(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
        x[k] = s / a(k, k);
    }
    return x;
}

/// Reduced row echelon form in place; returns the pivot column of each
/// pivot row. Entries below `tol` (relative to the largest entry) count as zero.
inline std::vector<std::size_t> row_reduce(Matrix& a, double tol) {
    std::vector<std::size_t> pivots;
    double scale = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) scale = std::max(scale, norm_inf(a.row(i)));
    if (scale == 0.0) return pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < a.cols() && r < a.rows(); ++c) {
        std::size_t piv = r;
        for (std::size_t i = r + 1; i < a.rows(); ++i)
            if (std::abs(a(i, c)) > std::abs(a(piv, c))) piv = i;
        if (std::abs(a(piv, c)) <= tol * scale) {
            for (std::size_t i = r; i < a.rows(); ++i) a(i, c) = 0.0;
            continue;
        }
        if (piv != r)
            for (std::size_t j = 0; j < a.cols(); ++j) std::swap(a(r, j), a(piv, j));
        const double p = a(r, c);
        for (std::size_t j = 0; j < a.cols(); ++j) a(r, j) /= p;
        for (std::size_t i = 0; i < a.rows(); ++i) {
            if (i == r) continue;
            const double f = a(i, c);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) -= f * a(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

/// A nonzero vector x with A x = 0, or nullopt when A has full column rank
/// at tolerance `tol`. The first free column gets coefficient one.
inline std::optional<Point> null_vector(Matrix a, double tol) {
    const auto pivots = row_reduce(a, tol);
    if (pivots.size() >= a.cols()) return std::nullopt;
    std::vector<bool> is_pivot(a.cols(), false);
    for (auto c : pivots) is_pivot[c] = true;
    std::size_t free_col = 0;
    while (is_pivot[free_col]) ++free_col;
    Point x(a.cols(), 0.0);
    x[free_col] = 1.0;
    for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = -a(r, free_col);
    return x;
}

/// Orthonormal basis of span(vectors) by modified Gram-Schmidt; vectors whose
/// residual norm is below `tol` times the largest input norm are dropped.
inline std::vector<Point> orthonormal_basis(const std::vector<Point>& vectors, double tol) {
    std::vector<Point> basis;
    double scale = 0.0;
    for (const auto& v : vectors) scale = std::max(scale, norm2(v));
    if (scale == 0.0) return basis;
    // Largest residual first gives a better-conditioned basis.
    std::vector<Point> rest = vectors;
    while (!rest.empty()) {
        std::size_t best = 0;
        double best_norm = -1.0;
        for (std::size_t i = 0; i < rest.size(); ++i) {
            const double n = norm2(rest[i]);
            if (n > best_norm) {
                best_norm = n;
                best = i;
            }
        }
        if (best_norm <= tol * scale) break;
        Point q = rest[best];
        for (double& x : q) x /= best_norm;
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(best));
        for (auto& v : rest) {
            const double c = dot(v, q);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
        }
        basis.push_back(std::move(q));
    }
    return basis;
}

} // namespace infodesign
