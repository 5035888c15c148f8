#pragma once

// Dense two-phase primal simplex with Bland's anti-cycling rule.
//
// Problems in this library are small and dense (a handful of rows, at most a
// few thousand columns), so a full tableau is simpler than a revised method
// and loses nothing. After termination the basic solution is recomputed from
// the original rows so reported values do not carry pivoting drift.

#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace infodesign {

enum class RowSense { Equal, LessEqual, GreaterEqual };

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

/// maximise objective . x  subject to  rows x (sense) rhs,  x >= 0.
struct LinearProgram {
    std::size_t num_vars = 0;
    std::vector<double> objective;
    std::vector<std::vector<double>> rows;
    std::vector<RowSense> senses;
    std::vector<double> rhs;

    LinearProgram() = default;
    explicit LinearProgram(std::size_t n) : num_vars(n), objective(n, 0.0) {}

    void add_row(std::vector<double> coeffs, RowSense sense, double b) {
        if (coeffs.size() != num_vars) throw std::invalid_argument("LP row has wrong length");
        rows.push_back(std::move(coeffs));
        senses.push_back(sense);
        rhs.push_back(b);
    }
};

struct LpOptions {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-11;
    double pivot_tol = 1e-11;
    std::size_t max_pivots = 200000;
};

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    Point x;
    /// A zero-length step occurred or a basic variable ended at zero.
    bool degenerate = false;
    std::size_t pivots = 0;
};

namespace detail {

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : t_(rows, cols + 1), basis_(rows) {}

    Matrix& table() { return t_; }
    std::vector<std::size_t>& basis() { return basis_; }
    std::size_t rows() const { return t_.rows(); }
    std::size_t cols() const { return t_.cols() - 1; }
    double rhs(std::size_t r) const { return t_(r, t_.cols() - 1); }

    void pivot(std::size_t r, std::size_t e, std::vector<double>& reduced) {
        const std::size_t w = t_.cols();
        const double p = t_(r, e);
        for (std::size_t j = 0; j < w; ++j) t_(r, j) /= p;
        t_(r, e) = 1.0;
        for (std::size_t i = 0; i < t_.rows(); ++i) {
            if (i == r) continue;
            const double f = t_(i, e);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < w; ++j) t_(i, j) -= f * t_(r, j);
            t_(i, e) = 0.0;
            double& b = t_(i, w - 1);
            if (b < 0.0 && b > -1e-12) b = 0.0;
        }
        const double f = reduced[e];
        if (f != 0.0) {
            for (std::size_t j = 0; j < w; ++j) reduced[j] -= f * t_(r, j);
            reduced[e] = 0.0;
        }
        basis_[r] = e;
    }

    void erase_row(std::size_t r) {
        Matrix next(t_.rows() - 1, t_.cols());
        for (std::size_t i = 0, k = 0; i < t_.rows(); ++i) {
            if (i == r) continue;
            for (std::size_t j = 0; j < t_.cols(); ++j) next(k, j) = t_(i, j);
            ++k;
        }
        t_ = std::move(next);
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
        if (!row_ids_.empty()) row_ids_.erase(row_ids_.begin() + static_cast<std::ptrdiff_t>(r));
    }

    /// Keeps the current table as the original system for refactor().
    void snapshot() {
        original_ = t_;
        row_ids_.resize(t_.rows());
        for (std::size_t i = 0; i < row_ids_.size(); ++i) row_ids_[i] = i;
    }

    /// Rebuilds the table as B^-1 [A | b] from the original rows and the
    /// current basis, discarding accumulated pivoting error. Keeps the table
    /// when the basis matrix is numerically singular.
    bool refactor() {
        const std::size_t r = t_.rows(), w = t_.cols();
        if (row_ids_.size() != r) return false;
        Matrix b(r, r);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t k = 0; k < r; ++k) b(i, k) = original_(row_ids_[i], basis_[k]);
        Matrix inv(r, r);
        for (std::size_t j = 0; j < r; ++j) {
            Point e(r, 0.0);
            e[j] = 1.0;
            const auto col = solve_linear(b, e);
            if (!col) return false;
            for (std::size_t i = 0; i < r; ++i) inv(i, j) = (*col)[i];
        }
        Matrix next(r, w);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t k = 0; k < r; ++k) {
                const double f = inv(i, k);
                if (f == 0.0) continue;
                const std::size_t src = row_ids_[k];
                for (std::size_t j = 0; j < w; ++j) next(i, j) += f * original_(src, j);
            }
        for (std::size_t i = 0; i < r; ++i) {
            next(i, basis_[i]) = 1.0;
            for (std::size_t k = 0; k < r; ++k)
                if (k != i) next(i, basis_[k]) = 0.0;
            double& rhs = next(i, w - 1);
            if (rhs < 0.0 && rhs > -1e-12) rhs = 0.0;
        }
        t_ = std::move(next);
        return true;
    }

private:
    Matrix t_;
    std::vector<std::size_t> basis_;
    Matrix original_{0, 0};
    std::vector<std::size_t> row_ids_;
};

/// Reduced-cost row (last entry holds minus the objective value).
inline std::vector<double> reduced_costs(Tableau& tab, const std::vector<double>& cost) {
    const std::size_t w = tab.cols() + 1;
    std::vector<double> rc(w, 0.0);
    for (std::size_t j = 0; j < tab.cols(); ++j) rc[j] = cost[j];
    for (std::size_t i = 0; i < tab.rows(); ++i) {
        const double cb = cost[tab.basis()[i]];
        if (cb == 0.0) continue;
        for (std::size_t j = 0; j < w; ++j) rc[j] -= cb * tab.table()(i, j);
    }
    return rc;
}

/// Runs Bland-rule pivots until no improving column remains. Long pivot
/// sequences drift, so the table is refactored every 100 pivots and before
/// optimality is accepted.
inline LpStatus iterate(Tableau& tab, const std::vector<double>& cost, const std::vector<bool>& allowed,
                        const LpOptions& opt, double cost_scale, std::size_t& pivots, bool& degenerate) {
    const double rc_tol = opt.optimality_tol * cost_scale;
    std::vector<double> rc = reduced_costs(tab, cost);
    std::vector<bool> in_basis(tab.cols(), false);
    for (auto b : tab.basis()) in_basis[b] = true;
    std::size_t fresh_at = pivots;
    while (true) {
        std::size_t enter = tab.cols();
        for (std::size_t j = 0; j < tab.cols(); ++j)
            if (allowed[j] && !in_basis[j] && rc[j] > rc_tol) {
                enter = j;
                break;
            }
        if (enter == tab.cols() || pivots >= fresh_at + 100) {
            if (enter == tab.cols() && fresh_at == pivots) return LpStatus::Optimal;
            tab.refactor();
            rc = reduced_costs(tab, cost);
            fresh_at = pivots;
            continue;
        }
        if (pivots >= opt.max_pivots) return LpStatus::IterationLimit;

        std::size_t leave = tab.rows();
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < tab.rows(); ++i) {
            const double a = tab.table()(i, enter);
            if (a <= opt.pivot_tol) continue;
            const double ratio = std::max(0.0, tab.rhs(i)) / a;
            if (leave == tab.rows()) {
                best = ratio;
                leave = i;
                continue;
            }
            const double slack = 1e-12 * (1.0 + best);
            if (ratio < best - slack || (ratio <= best + slack && tab.basis()[i] < tab.basis()[leave])) {
                best = std::min(best, ratio);
                leave = i;
            }
        }
        if (leave == tab.rows()) return LpStatus::Unbounded;
        if (best <= 1e-13) degenerate = true;
        in_basis[tab.basis()[leave]] = false;
        in_basis[enter] = true;
        tab.pivot(leave, enter, rc);
        ++pivots;
    }
}

} // namespace detail

/**
 * Solves a linear program by the two-phase simplex method.
 *
 * Phase one minimises the sum of artificial variables; rows whose artificial
 * cannot be driven out of the basis are redundant and dropped. Entering and
 * leaving variables follow Bland's rule, so the method terminates on
 * degenerate problems and the optimal basis is reproducible.
 */
inline LpResult solve_lp(const LinearProgram& lp, const LpOptions& opt = {}) {
    const std::size_t m = lp.rows.size();
    const std::size_t n = lp.num_vars;
    if (lp.objective.size() != n) throw std::invalid_argument("LP objective has wrong length");

    std::size_t slacks = 0;
    for (auto s : lp.senses)
        if (s != RowSense::Equal) ++slacks;

    // Sign-normalised constraint matrix over [x | slacks], rhs >= 0.
    const std::size_t base_cols = n + slacks;
    Matrix a(m, base_cols);
    Point b(m);
    std::vector<bool> needs_artificial(m, true);
    std::vector<std::size_t> slack_of(m, base_cols);
    {
        std::size_t s = n;
        for (std::size_t i = 0; i < m; ++i) {
            const double sign = lp.rhs[i] < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < n; ++j) a(i, j) = sign * lp.rows[i][j];
            b[i] = sign * lp.rhs[i];
            if (lp.senses[i] != RowSense::Equal) {
                const double coef = lp.senses[i] == RowSense::LessEqual ? 1.0 : -1.0;
                a(i, s) = sign * coef;
                if (a(i, s) > 0.0) needs_artificial[i] = false;
                slack_of[i] = s;
                ++s;
            }
        }
    }
    std::size_t artificials = 0;
    for (bool need : needs_artificial)
        if (need) ++artificials;
    const std::size_t total = base_cols + artificials;

    detail::Tableau tab(m, total);
    {
        std::size_t art = base_cols;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < base_cols; ++j) tab.table()(i, j) = a(i, j);
            tab.table()(i, total) = b[i];
            if (needs_artificial[i]) {
                tab.table()(i, art) = 1.0;
                tab.basis()[i] = art++;
            } else {
                tab.basis()[i] = slack_of[i];
            }
        }
    }

    tab.snapshot();
    LpResult result;
    std::vector<bool> allowed(total, true);
    const double b_scale = 1.0 + norm_inf(b);

    if (artificials > 0) {
        std::vector<double> cost(total, 0.0);
        for (std::size_t j = base_cols; j < total; ++j) cost[j] = -1.0;
        const auto status = detail::iterate(tab, cost, allowed, opt, 1.0, result.pivots, result.degenerate);
        if (status == LpStatus::IterationLimit) {
            result.status = status;
            return result;
        }
        double infeasibility = 0.0;
        for (std::size_t i = 0; i < tab.rows(); ++i)
            if (tab.basis()[i] >= base_cols) infeasibility += std::max(0.0, tab.rhs(i));
        if (infeasibility > opt.feasibility_tol * b_scale) {
            result.status = LpStatus::Infeasible;
            return result;
        }
        // Drive remaining (zero-level) artificials out; drop redundant rows.
        for (std::size_t i = 0; i < tab.rows();) {
            if (tab.basis()[i] < base_cols) {
                ++i;
                continue;
            }
            std::size_t best = base_cols;
            double mag = 1e-9;
            for (std::size_t j = 0; j < base_cols; ++j) {
                const double v = std::abs(tab.table()(i, j));
                if (v > mag) {
                    mag = v;
                    best = j;
                }
            }
            if (best == base_cols) {
                tab.erase_row(i);
                continue;
            }
            std::vector<double> dummy(total + 1, 0.0);
            tab.pivot(i, best, dummy);
            ++i;
        }
        for (std::size_t j = base_cols; j < total; ++j) allowed[j] = false;
    }

    std::vector<double> cost(total, 0.0);
    for (std::size_t j = 0; j < n; ++j) cost[j] = lp.objective[j];
    const auto status =
        detail::iterate(tab, cost, allowed, opt, 1.0 + norm_inf(lp.objective), result.pivots, result.degenerate);
    result.status = status;
    if (status != LpStatus::Optimal) return result;

    // Recompute the basic solution from the original rows of the final basis.
    Point full(total, 0.0);
    for (std::size_t i = 0; i < tab.rows(); ++i) full[tab.basis()[i]] = std::max(0.0, tab.rhs(i));
    {
        const std::size_t r = tab.rows();
        // Identify which original rows survive: a row survives if its
        // residual under the tableau solution is tiny; all rows do unless
        // redundant rows were dropped, and those are implied by the others.
        bool basis_is_structural = true;
        for (auto j : tab.basis())
            if (j >= base_cols) basis_is_structural = false;
        if (basis_is_structural && r == m) {
            Matrix bm(r, r);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t k = 0; k < r; ++k) bm(i, k) = a(i, tab.basis()[k]);
            if (auto xb = solve_linear(bm, b)) {
                bool ok = true;
                for (double v : *xb)
                    if (!std::isfinite(v) || v < -1e-9) ok = false;
                if (ok)
                    for (std::size_t k = 0; k < r; ++k) full[tab.basis()[k]] = std::max(0.0, (*xb)[k]);
            }
        }
    }
    for (std::size_t i = 0; i < tab.rows(); ++i)
        if (full[tab.basis()[i]] <= 1e-13) result.degenerate = true;

    result.x.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(n));
    result.objective = dot(lp.objective, result.x);
    return result;
}

} // namespace infodesign
