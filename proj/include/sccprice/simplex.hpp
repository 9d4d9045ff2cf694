#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <tuple>
#include <vector>

#include "sccprice/common.hpp"
#include "sccprice/lp.hpp"

namespace sccprice::opt {

enum class VarStatus : unsigned char { Basic, AtLower, AtUpper, Free };

struct SimplexOptions {
    int max_iterations = 200000;
    double tol_feas = 1e-9;
    double tol_dual = 1e-9;
    double tol_pivot = 1e-9;
    int refactor_every = 100;
    int bland_after = 5000;
};

namespace detail {

struct SingularBasis {};

struct SparseCol {
    std::vector<std::pair<int, double>> entries;  // (row, value)
};

/// LU factorization of a simplex basis that exploits singleton +-1 columns
/// (slacks and artificials). Only the block of structural basic columns is
/// factored densely, so solve cost scales with the structural basis size
/// rather than the full row count.
class BasisFactor {
public:
    // Returns false when the basis is numerically singular.
    bool factor(const std::vector<SparseCol>& cols, const std::vector<int>& basic, int m) {
        m_ = m;
        owner_pos_.assign(static_cast<std::size_t>(m), -1);
        owner_sigma_.assign(static_cast<std::size_t>(m), 0.0);
        t_index_.assign(static_cast<std::size_t>(m), -1);
        t_rows_.clear();
        struct_pos_.clear();
        e_cols_.clear();
        if (m == 0) return true;

        for (int p = 0; p < m; ++p) {
            const auto& col = cols[static_cast<std::size_t>(basic[static_cast<std::size_t>(p)])];
            if (col.entries.size() == 1 && std::abs(std::abs(col.entries[0].second) - 1.0) == 0.0) {
                int r = col.entries[0].first;
                if (owner_pos_[static_cast<std::size_t>(r)] < 0) {
                    owner_pos_[static_cast<std::size_t>(r)] = p;
                    owner_sigma_[static_cast<std::size_t>(r)] = col.entries[0].second;
                    continue;
                }
            }
            struct_pos_.push_back(p);
        }
        for (int r = 0; r < m; ++r) {
            if (owner_pos_[static_cast<std::size_t>(r)] < 0) {
                t_index_[static_cast<std::size_t>(r)] = static_cast<int>(t_rows_.size());
                t_rows_.push_back(r);
            }
        }
        const int nt = static_cast<int>(t_rows_.size());
        if (nt != static_cast<int>(struct_pos_.size())) return false;

        Eigen::MatrixXd f = Eigen::MatrixXd::Zero(nt, nt);
        e_cols_.resize(struct_pos_.size());
        for (std::size_t k = 0; k < struct_pos_.size(); ++k) {
            int col_id = basic[static_cast<std::size_t>(struct_pos_[k])];
            e_cols_[k].clear();
            for (auto [r, v] : cols[static_cast<std::size_t>(col_id)].entries) {
                int ti = t_index_[static_cast<std::size_t>(r)];
                if (ti >= 0)
                    f(ti, static_cast<Eigen::Index>(k)) = v;
                else
                    e_cols_[k].emplace_back(r, v);
            }
        }
        if (nt > 0) {
            lu_.compute(f);
            const auto& lu_mat = lu_.matrixLU();
            double umax = 0.0, umin = kInf;
            for (int i = 0; i < nt; ++i) {
                double d = std::abs(lu_mat(i, i));
                umax = std::max(umax, d);
                umin = std::min(umin, d);
            }
            if (umin <= 1e-12 * std::max(1.0, umax)) return false;
        }
        return true;
    }

    // Solve B z = a; input indexed by row, output by basis position.
    void ftran(const std::vector<double>& a, std::vector<double>& z) const {
        z.assign(static_cast<std::size_t>(m_), 0.0);
        const int nt = static_cast<int>(t_rows_.size());
        Eigen::VectorXd zt;
        if (nt > 0) {
            Eigen::VectorXd at(nt);
            for (int i = 0; i < nt; ++i) at(i) = a[static_cast<std::size_t>(t_rows_[static_cast<std::size_t>(i)])];
            zt = lu_.solve(at);
            for (std::size_t k = 0; k < struct_pos_.size(); ++k)
                z[static_cast<std::size_t>(struct_pos_[k])] = zt(static_cast<Eigen::Index>(k));
        }
        scratch_.assign(static_cast<std::size_t>(m_), 0.0);
        for (std::size_t k = 0; k < struct_pos_.size(); ++k) {
            double zk = z[static_cast<std::size_t>(struct_pos_[k])];
            if (zk == 0.0) continue;
            for (auto [r, v] : e_cols_[k]) scratch_[static_cast<std::size_t>(r)] += v * zk;
        }
        for (int r = 0; r < m_; ++r) {
            int p = owner_pos_[static_cast<std::size_t>(r)];
            if (p >= 0)
                z[static_cast<std::size_t>(p)] =
                    owner_sigma_[static_cast<std::size_t>(r)] *
                    (a[static_cast<std::size_t>(r)] - scratch_[static_cast<std::size_t>(r)]);
        }
    }

    // Solve y' B = c'; input indexed by basis position, output by row.
    void btran(const std::vector<double>& c, std::vector<double>& y) const {
        y.assign(static_cast<std::size_t>(m_), 0.0);
        for (int r = 0; r < m_; ++r) {
            int p = owner_pos_[static_cast<std::size_t>(r)];
            if (p >= 0)
                y[static_cast<std::size_t>(r)] =
                    owner_sigma_[static_cast<std::size_t>(r)] * c[static_cast<std::size_t>(p)];
        }
        const int nt = static_cast<int>(t_rows_.size());
        if (nt == 0) return;
        Eigen::VectorXd rhs(nt);
        for (std::size_t k = 0; k < struct_pos_.size(); ++k) {
            double acc = c[static_cast<std::size_t>(struct_pos_[k])];
            for (auto [r, v] : e_cols_[k]) acc -= v * y[static_cast<std::size_t>(r)];
            rhs(static_cast<Eigen::Index>(k)) = acc;
        }
        Eigen::VectorXd yt = lu_.transpose().solve(rhs);
        for (int i = 0; i < nt; ++i)
            y[static_cast<std::size_t>(t_rows_[static_cast<std::size_t>(i)])] = yt(i);
    }

private:
    int m_ = 0;
    std::vector<int> owner_pos_;      // row -> basis position of its singleton column, or -1
    std::vector<double> owner_sigma_;
    std::vector<int> t_index_;        // row -> dense-block row index, or -1
    std::vector<int> t_rows_;
    std::vector<int> struct_pos_;     // basis positions factored densely
    std::vector<std::vector<std::pair<int, double>>> e_cols_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    mutable std::vector<double> scratch_;
};

}  // namespace detail

struct BoundChange {
    int var = 0;
    double lower = 0.0;
    double upper = 0.0;
};

/// Bounded-variable revised simplex with a product-form update between
/// refactorizations. Supports cold starts (artificial phase 1) and dual
/// simplex warm starts after bound changes.
class SimplexSolver {
public:
    struct Basis {
        std::vector<int> basic;
        std::vector<VarStatus> status;  // sized num structural + num rows
        bool usable = false;
    };

    explicit SimplexSolver(const LinearProgram& p, SimplexOptions opt = {})
        : prog_(&p), opt_(opt), m_(static_cast<int>(p.rows.size())), n_(p.num_vars) {
        ncols_base_ = n_ + m_;
        cols_base_.resize(static_cast<std::size_t>(ncols_base_));
        for (int i = 0; i < m_; ++i) {
            const auto& row = p.rows[static_cast<std::size_t>(i)];
            for (auto [v, a] : row.coeffs) {
                if (a != 0.0) cols_base_[static_cast<std::size_t>(v)].entries.emplace_back(i, a);
            }
            cols_base_[static_cast<std::size_t>(n_ + i)].entries.emplace_back(i, 1.0);
        }
        rhs_.resize(static_cast<std::size_t>(m_));
        for (int i = 0; i < m_; ++i) rhs_[static_cast<std::size_t>(i)] = p.rows[static_cast<std::size_t>(i)].rhs;
    }

    LpSolution solve(const std::vector<BoundChange>& changes = {}, const Basis* warm = nullptr) {
        try {
            reset_bounds(changes);
            iters_ = 0;
            bland_always_ = false;
            if (warm != nullptr && warm->usable && load_warm(*warm)) {
                LpSolution sol;
                if (run_dual(sol)) {
                    if (sol.status == LpStatus::Infeasible) return fill_infeasible(sol);
                    return finish();
                }
            }
            return solve_cold();
        } catch (const detail::SingularBasis&) {
            // Numerical breakdown: restart cold with the conservative pivot rule.
            reset_bounds(changes);
            iters_ = 0;
            bland_always_ = true;
            try {
                return solve_cold();
            } catch (const detail::SingularBasis&) {
                throw Error("simplex basis is numerically singular beyond repair");
            }
        }
    }

    Basis basis() const {
        Basis b;
        b.basic = basic_;
        b.status.assign(status_.begin(), status_.begin() + ncols_base_);
        b.usable = true;
        for (int c : b.basic)
            if (c >= ncols_base_) b.usable = false;
        return b;
    }

    int iterations() const { return iters_; }

private:
    // --- setup -----------------------------------------------------------

    void reset_bounds(const std::vector<BoundChange>& changes) {
        lower_.assign(prog_->lower.begin(), prog_->lower.end());
        upper_.assign(prog_->upper.begin(), prog_->upper.end());
        lower_.resize(static_cast<std::size_t>(ncols_base_));
        upper_.resize(static_cast<std::size_t>(ncols_base_));
        for (int i = 0; i < m_; ++i) {
            switch (prog_->rows[static_cast<std::size_t>(i)].sense) {
                case Sense::LessEq:
                    lower_[static_cast<std::size_t>(n_ + i)] = 0.0;
                    upper_[static_cast<std::size_t>(n_ + i)] = kInf;
                    break;
                case Sense::GreaterEq:
                    lower_[static_cast<std::size_t>(n_ + i)] = -kInf;
                    upper_[static_cast<std::size_t>(n_ + i)] = 0.0;
                    break;
                case Sense::Equal:
                    lower_[static_cast<std::size_t>(n_ + i)] = 0.0;
                    upper_[static_cast<std::size_t>(n_ + i)] = 0.0;
                    break;
            }
        }
        for (const auto& c : changes) {
            if (c.var < 0 || c.var >= n_) throw ValidationError("bound change on unknown variable");
            if (c.lower > c.upper) throw ValidationError("bound change with lower > upper");
            lower_[static_cast<std::size_t>(c.var)] = c.lower;
            upper_[static_cast<std::size_t>(c.var)] = c.upper;
        }
        cost_.assign(static_cast<std::size_t>(ncols_base_), 0.0);
        for (int j = 0; j < n_; ++j) cost_[static_cast<std::size_t>(j)] = prog_->cost[static_cast<std::size_t>(j)];
        cols_ = cols_base_;
    }

    int ncols() const { return static_cast<int>(cols_.size()); }
    bool is_artificial(int j) const { return j >= ncols_base_; }
    bool is_fixed(int j) const {
        return lower_[static_cast<std::size_t>(j)] == upper_[static_cast<std::size_t>(j)];
    }

    double nonbasic_value(int j) const {
        switch (status_[static_cast<std::size_t>(j)]) {
            case VarStatus::AtLower: return lower_[static_cast<std::size_t>(j)];
            case VarStatus::AtUpper: return upper_[static_cast<std::size_t>(j)];
            case VarStatus::Free: return 0.0;
            case VarStatus::Basic: break;
        }
        return 0.0;
    }

    VarStatus default_nonbasic(int j) const {
        double l = lower_[static_cast<std::size_t>(j)], u = upper_[static_cast<std::size_t>(j)];
        if (std::isfinite(l) && (!std::isfinite(u) || std::abs(l) <= std::abs(u))) return VarStatus::AtLower;
        if (std::isfinite(u)) return VarStatus::AtUpper;
        return VarStatus::Free;
    }

    void cold_basis() {
        status_.assign(static_cast<std::size_t>(ncols()), VarStatus::AtLower);
        for (int j = 0; j < n_; ++j) status_[static_cast<std::size_t>(j)] = default_nonbasic(j);
        basic_.resize(static_cast<std::size_t>(m_));
        for (int i = 0; i < m_; ++i) {
            basic_[static_cast<std::size_t>(i)] = n_ + i;
            status_[static_cast<std::size_t>(n_ + i)] = VarStatus::Basic;
        }
    }

    bool load_warm(const Basis& b) {
        if (static_cast<int>(b.basic.size()) != m_ ||
            static_cast<int>(b.status.size()) != ncols_base_)
            return false;
        status_.assign(b.status.begin(), b.status.end());
        basic_ = b.basic;
        for (int c : basic_) {
            if (c < 0 || c >= ncols_base_) return false;
            if (status_[static_cast<std::size_t>(c)] != VarStatus::Basic) return false;
        }
        // Nonbasic free variables of fixed kind are fine; nothing else to map.
        if (!refactor()) return false;
        compute_xb();
        return true;
    }

    // --- factorization and richer solves ----------------------------------

    struct Eta {
        int pos;
        double pivot;
        std::vector<double> w;
    };

    bool refactor() {
        etas_.clear();
        return factor_.factor(cols_, basic_, m_);
    }

    void ftran(const std::vector<double>& a, std::vector<double>& z) const {
        factor_.ftran(a, z);
        for (const auto& e : etas_) {
            double zp = z[static_cast<std::size_t>(e.pos)] / e.pivot;
            z[static_cast<std::size_t>(e.pos)] = zp;
            if (zp != 0.0) {
                for (int i = 0; i < m_; ++i) {
                    if (i == e.pos) continue;
                    z[static_cast<std::size_t>(i)] -= e.w[static_cast<std::size_t>(i)] * zp;
                }
            }
        }
    }

    void btran(std::vector<double> c, std::vector<double>& y) const {
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double dot = 0.0;
            for (int i = 0; i < m_; ++i) dot += it->w[static_cast<std::size_t>(i)] * c[static_cast<std::size_t>(i)];
            double cp = c[static_cast<std::size_t>(it->pos)];
            c[static_cast<std::size_t>(it->pos)] = cp - (dot - cp) / it->pivot;
        }
        factor_.btran(c, y);
    }

    void dense_column(int j, std::vector<double>& out) const {
        out.assign(static_cast<std::size_t>(m_), 0.0);
        for (auto [r, v] : cols_[static_cast<std::size_t>(j)].entries) out[static_cast<std::size_t>(r)] = v;
    }

    void compute_xb() {
        std::vector<double> r = rhs_;
        for (int j = 0; j < ncols(); ++j) {
            if (status_[static_cast<std::size_t>(j)] == VarStatus::Basic) continue;
            double v = nonbasic_value(j);
            if (v == 0.0) continue;
            for (auto [row, a] : cols_[static_cast<std::size_t>(j)].entries)
                r[static_cast<std::size_t>(row)] -= a * v;
        }
        ftran(r, xb_);
        refine_xb();
    }

    void refine_xb() {
        // One step of iterative refinement on B xb = rhs - N x_N.
        std::vector<double> res = rhs_;
        for (int j = 0; j < ncols(); ++j) {
            double v;
            if (status_[static_cast<std::size_t>(j)] == VarStatus::Basic)
                continue;
            v = nonbasic_value(j);
            if (v == 0.0) continue;
            for (auto [row, a] : cols_[static_cast<std::size_t>(j)].entries)
                res[static_cast<std::size_t>(row)] -= a * v;
        }
        for (int p = 0; p < m_; ++p) {
            double v = xb_[static_cast<std::size_t>(p)];
            if (v == 0.0) continue;
            for (auto [row, a] : cols_[static_cast<std::size_t>(basic_[static_cast<std::size_t>(p)])].entries)
                res[static_cast<std::size_t>(row)] -= a * v;
        }
        std::vector<double> delta;
        ftran(res, delta);
        for (int p = 0; p < m_; ++p) xb_[static_cast<std::size_t>(p)] += delta[static_cast<std::size_t>(p)];
    }

    std::vector<double> basic_costs(const std::vector<double>& c) const {
        std::vector<double> cb(static_cast<std::size_t>(m_));
        for (int p = 0; p < m_; ++p) cb[static_cast<std::size_t>(p)] = c[static_cast<std::size_t>(basic_[static_cast<std::size_t>(p)])];
        return cb;
    }

    double col_dot(int j, const std::vector<double>& y) const {
        double d = 0.0;
        for (auto [r, v] : cols_[static_cast<std::size_t>(j)].entries) d += v * y[static_cast<std::size_t>(r)];
        return d;
    }

    // --- primal simplex ----------------------------------------------------

    enum class LoopResult { Optimal, Unbounded };

    LoopResult primal_loop(const std::vector<double>& c) {
        std::vector<double> y, w, acol;
        while (true) {
            if (++iters_ > opt_.max_iterations)
                throw BudgetError("simplex iteration budget exhausted after " +
                                      std::to_string(iters_) + " iterations",
                                  current_objective(c), std::nan(""));
            bool bland = bland_always_ || iters_ > opt_.bland_after;

            btran(basic_costs(c), y);
            int q = -1;
            double best = 0.0;
            int dirn = 0;
            for (int j = 0; j < ncols(); ++j) {
                if (status_[static_cast<std::size_t>(j)] == VarStatus::Basic) continue;
                if (is_fixed(j)) continue;
                if (is_artificial(j)) continue;
                double d = c[static_cast<std::size_t>(j)] - col_dot(j, y);
                int dir = 0;
                double viol = 0.0;
                switch (status_[static_cast<std::size_t>(j)]) {
                    case VarStatus::AtLower:
                        if (d < -opt_.tol_dual) { dir = 1; viol = -d; }
                        break;
                    case VarStatus::AtUpper:
                        if (d > opt_.tol_dual) { dir = -1; viol = d; }
                        break;
                    case VarStatus::Free:
                        if (std::abs(d) > opt_.tol_dual) { dir = d < 0 ? 1 : -1; viol = std::abs(d); }
                        break;
                    case VarStatus::Basic: break;
                }
                if (dir == 0) continue;
                if (bland) { q = j; dirn = dir; break; }
                if (viol > best + 1e-15) { best = viol; q = j; dirn = dir; }
            }
            if (q < 0) return LoopResult::Optimal;

            dense_column(q, acol);
            ftran(acol, w);

            double self_gap = upper_[static_cast<std::size_t>(q)] - lower_[static_cast<std::size_t>(q)];
            if (status_[static_cast<std::size_t>(q)] == VarStatus::Free) self_gap = kInf;

            auto basic_ratio = [&](int p) -> double {
                double wp = w[static_cast<std::size_t>(p)];
                if (std::abs(wp) <= opt_.tol_pivot) return kInf;
                int jb = basic_[static_cast<std::size_t>(p)];
                double delta = dirn * wp;
                double t;
                if (delta > 0.0) {
                    double lb = lower_[static_cast<std::size_t>(jb)];
                    if (!std::isfinite(lb)) return kInf;
                    t = (xb_[static_cast<std::size_t>(p)] - lb) / delta;
                } else {
                    double ub = upper_[static_cast<std::size_t>(jb)];
                    if (!std::isfinite(ub)) return kInf;
                    t = (xb_[static_cast<std::size_t>(p)] - ub) / delta;
                }
                return std::max(t, 0.0);
            };

            double tmin = kInf;
            for (int p = 0; p < m_; ++p) tmin = std::min(tmin, basic_ratio(p));

            if (!std::isfinite(tmin) && !std::isfinite(self_gap)) return LoopResult::Unbounded;

            if (self_gap <= tmin) {
                // Bound flip: entering variable runs to its opposite bound.
                double t = self_gap;
                for (int p = 0; p < m_; ++p)
                    xb_[static_cast<std::size_t>(p)] -= dirn * t * w[static_cast<std::size_t>(p)];
                status_[static_cast<std::size_t>(q)] =
                    dirn > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
                continue;
            }

            // Second pass: among near-minimal ratios prefer the largest pivot.
            int block = -1;
            for (int p = 0; p < m_; ++p) {
                if (basic_ratio(p) > tmin + 1e-10) continue;
                if (block < 0) { block = p; continue; }
                double wp = std::abs(w[static_cast<std::size_t>(p)]);
                double wb = std::abs(w[static_cast<std::size_t>(block)]);
                if (wp > wb + 1e-15 ||
                    (std::abs(wp - wb) <= 1e-15 &&
                     basic_[static_cast<std::size_t>(p)] < basic_[static_cast<std::size_t>(block)]))
                    block = p;
            }

            double t = basic_ratio(block);
            double enter_val = nonbasic_value(q) + dirn * t;
            for (int p = 0; p < m_; ++p)
                xb_[static_cast<std::size_t>(p)] -= dirn * t * w[static_cast<std::size_t>(p)];
            int jl = basic_[static_cast<std::size_t>(block)];
            double delta = dirn * w[static_cast<std::size_t>(block)];
            status_[static_cast<std::size_t>(jl)] = delta > 0.0 ? VarStatus::AtLower : VarStatus::AtUpper;
            basic_[static_cast<std::size_t>(block)] = q;
            status_[static_cast<std::size_t>(q)] = VarStatus::Basic;
            xb_[static_cast<std::size_t>(block)] = enter_val;

            double piv = w[static_cast<std::size_t>(block)];
            if (std::abs(piv) < 1e-7 || static_cast<int>(etas_.size()) >= opt_.refactor_every) {
                if (!refactor()) throw detail::SingularBasis{};
                compute_xb();
            } else {
                etas_.push_back(Eta{block, piv, w});
            }
        }
    }

    // --- dual simplex ------------------------------------------------------

    // Runs dual iterations from the loaded basis. Returns false when the
    // start is not dual feasible (caller falls back to a cold solve). On
    // success `sol.status` is set to Infeasible when primal infeasibility is
    // proven; otherwise the basis is primal feasible and still dual feasible.
    bool run_dual(LpSolution& sol) {
        std::vector<double> y, rho, w, acol, epos;
        const std::vector<double>& c = cost_;
        while (true) {
            if (++iters_ > opt_.max_iterations)
                throw BudgetError("simplex iteration budget exhausted after " +
                                      std::to_string(iters_) + " iterations",
                                  current_objective(c), std::nan(""));
            btran(basic_costs(c), y);
            std::vector<double> d(static_cast<std::size_t>(ncols()), 0.0);
            for (int j = 0; j < ncols(); ++j) {
                if (status_[static_cast<std::size_t>(j)] == VarStatus::Basic) continue;
                d[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)] - col_dot(j, y);
                if (is_fixed(j)) continue;
                double v = d[static_cast<std::size_t>(j)];
                switch (status_[static_cast<std::size_t>(j)]) {
                    case VarStatus::AtLower:
                        if (v < -1e-7) return false;
                        break;
                    case VarStatus::AtUpper:
                        if (v > 1e-7) return false;
                        break;
                    case VarStatus::Free:
                        if (std::abs(v) > 1e-7) return false;
                        break;
                    case VarStatus::Basic: break;
                }
            }

            int pstar = -1;
            double worst = opt_.tol_feas;
            bool below = false;
            for (int p = 0; p < m_; ++p) {
                int jb = basic_[static_cast<std::size_t>(p)];
                double v = xb_[static_cast<std::size_t>(p)];
                double lo = lower_[static_cast<std::size_t>(jb)], up = upper_[static_cast<std::size_t>(jb)];
                if (v < lo - worst) { worst = lo - v; pstar = p; below = true; }
                if (v > up + worst) { worst = v - up; pstar = p; below = false; }
            }
            if (pstar < 0) return true;  // primal feasible

            epos.assign(static_cast<std::size_t>(m_), 0.0);
            epos[static_cast<std::size_t>(pstar)] = 1.0;
            btran(epos, rho);

            int q = -1;
            double best_ratio = kInf;
            double best_alpha = 0.0;
            for (int j = 0; j < ncols(); ++j) {
                if (status_[static_cast<std::size_t>(j)] == VarStatus::Basic) continue;
                if (is_fixed(j) || is_artificial(j)) continue;
                double alpha = col_dot(j, rho);
                if (std::abs(alpha) <= opt_.tol_pivot) continue;
                bool ok = false;
                switch (status_[static_cast<std::size_t>(j)]) {
                    case VarStatus::AtLower: ok = below ? (alpha < 0) : (alpha > 0); break;
                    case VarStatus::AtUpper: ok = below ? (alpha > 0) : (alpha < 0); break;
                    case VarStatus::Free: ok = true; break;
                    case VarStatus::Basic: break;
                }
                if (!ok) continue;
                double ratio = std::abs(d[static_cast<std::size_t>(j)] / alpha);
                if (ratio < best_ratio - 1e-12 ||
                    (ratio <= best_ratio + 1e-12 &&
                     (std::abs(alpha) > std::abs(best_alpha) + 1e-15 ||
                      (std::abs(std::abs(alpha) - std::abs(best_alpha)) <= 1e-15 && (q < 0 || j < q))))) {
                    best_ratio = ratio;
                    best_alpha = alpha;
                    q = j;
                }
            }
            if (q < 0) {
                sol.status = LpStatus::Infeasible;
                sol.infeasibility = worst;
                sol.objective = kInf;
                return true;
            }

            dense_column(q, acol);
            ftran(acol, w);
            double piv = w[static_cast<std::size_t>(pstar)];
            if (std::abs(piv) <= opt_.tol_pivot) {
                if (!refactor()) throw detail::SingularBasis{};
                compute_xb();
                dense_column(q, acol);
                ftran(acol, w);
                piv = w[static_cast<std::size_t>(pstar)];
                if (std::abs(piv) <= opt_.tol_pivot) return false;
            }
            int jl = basic_[static_cast<std::size_t>(pstar)];
            double beta = below ? lower_[static_cast<std::size_t>(jl)] : upper_[static_cast<std::size_t>(jl)];
            double step = (xb_[static_cast<std::size_t>(pstar)] - beta) / piv;
            for (int p = 0; p < m_; ++p)
                xb_[static_cast<std::size_t>(p)] -= step * w[static_cast<std::size_t>(p)];
            status_[static_cast<std::size_t>(jl)] = below ? VarStatus::AtLower : VarStatus::AtUpper;
            double enter_val = nonbasic_value(q) + step;
            basic_[static_cast<std::size_t>(pstar)] = q;
            status_[static_cast<std::size_t>(q)] = VarStatus::Basic;
            xb_[static_cast<std::size_t>(pstar)] = enter_val;
            if (std::abs(piv) < 1e-7 || static_cast<int>(etas_.size()) >= opt_.refactor_every) {
                if (!refactor()) throw detail::SingularBasis{};
                compute_xb();
            } else {
                etas_.push_back(Eta{pstar, piv, w});
            }
        }
    }

    // --- driver ------------------------------------------------------------

    LpSolution solve_cold() {
        cold_basis();
        if (!refactor()) throw Error("initial slack basis failed to factorize");
        compute_xb();

        // Phase 1: cover bound violations of the slack basis with artificials.
        bool need_phase1 = false;
        for (int p = 0; p < m_; ++p) {
            int jb = basic_[static_cast<std::size_t>(p)];
            double v = xb_[static_cast<std::size_t>(p)];
            double lo = lower_[static_cast<std::size_t>(jb)], up = upper_[static_cast<std::size_t>(jb)];
            if (v > up + 1e-11) {
                int art = add_artificial(p, 1.0);
                status_[static_cast<std::size_t>(jb)] = VarStatus::AtUpper;
                basic_[static_cast<std::size_t>(p)] = art;
                xb_[static_cast<std::size_t>(p)] = v - up;
                need_phase1 = true;
            } else if (v < lo - 1e-11) {
                int art = add_artificial(p, -1.0);
                status_[static_cast<std::size_t>(jb)] = VarStatus::AtLower;
                basic_[static_cast<std::size_t>(p)] = art;
                xb_[static_cast<std::size_t>(p)] = lo - v;
                need_phase1 = true;
            }
        }
        if (need_phase1) {
            if (!refactor()) throw detail::SingularBasis{};
            std::vector<double> c1(static_cast<std::size_t>(ncols()), 0.0);
            for (int j = ncols_base_; j < ncols(); ++j) c1[static_cast<std::size_t>(j)] = 1.0;
            primal_loop(c1);
            double p1 = 0.0;
            for (int p = 0; p < m_; ++p)
                if (is_artificial(basic_[static_cast<std::size_t>(p)]))
                    p1 += std::max(0.0, xb_[static_cast<std::size_t>(p)]);
            double bscale = 1.0;
            for (double b : rhs_) bscale = std::max(bscale, std::abs(b));
            if (p1 > 1e-7 * bscale) {
                LpSolution sol;
                sol.status = LpStatus::Infeasible;
                sol.infeasibility = p1;
                sol.objective = kInf;
                sol.iterations = iters_;
                return sol;
            }
            for (int j = ncols_base_; j < ncols(); ++j) {
                lower_[static_cast<std::size_t>(j)] = 0.0;
                upper_[static_cast<std::size_t>(j)] = 0.0;
            }
        }

        LoopResult r = primal_loop(cost_);
        if (r == LoopResult::Unbounded) {
            LpSolution sol;
            sol.status = LpStatus::Unbounded;
            sol.objective = -kInf;
            sol.iterations = iters_;
            return sol;
        }
        return finish();
    }

    // Only valid right after cold_basis(), where basis position p holds row p.
    int add_artificial(int row, double sigma) {
        detail::SparseCol col;
        col.entries.emplace_back(row, sigma);
        cols_.push_back(std::move(col));
        lower_.push_back(0.0);
        upper_.push_back(kInf);
        cost_.push_back(0.0);
        status_.push_back(VarStatus::Basic);
        return ncols() - 1;
    }

    double current_objective(const std::vector<double>& c) const {
        double obj = 0.0;
        for (int j = 0; j < ncols(); ++j) {
            double v = status_[static_cast<std::size_t>(j)] == VarStatus::Basic
                           ? 0.0
                           : nonbasic_value(j);
            obj += c[static_cast<std::size_t>(j)] * v;
        }
        for (int p = 0; p < m_; ++p)
            obj += c[static_cast<std::size_t>(basic_[static_cast<std::size_t>(p)])] *
                   xb_[static_cast<std::size_t>(p)];
        return obj;
    }

    LpSolution finish() {
        // Cleanup: fresh factorization, recomputed values and duals, and a
        // couple of confirmation passes so reported quantities satisfy the
        // optimality checks tightly.
        for (int round = 0; round < 4; ++round) {
            if (!refactor()) throw detail::SingularBasis{};
            compute_xb();
            bool prim_ok = true;
            for (int p = 0; p < m_; ++p) {
                int jb = basic_[static_cast<std::size_t>(p)];
                double v = xb_[static_cast<std::size_t>(p)];
                if (v < lower_[static_cast<std::size_t>(jb)] - 1e-9 ||
                    v > upper_[static_cast<std::size_t>(jb)] + 1e-9) {
                    prim_ok = false;
                    break;
                }
            }
            if (!prim_ok) {
                LpSolution tmp;
                if (!run_dual(tmp)) throw detail::SingularBasis{};
                if (tmp.status == LpStatus::Infeasible) return fill_infeasible(tmp);
                continue;
            }
            std::vector<double> y;
            btran(basic_costs(cost_), y);
            bool dual_ok = true;
            for (int j = 0; j < ncols() && dual_ok; ++j) {
                if (status_[static_cast<std::size_t>(j)] == VarStatus::Basic || is_fixed(j)) continue;
                double d = cost_[static_cast<std::size_t>(j)] - col_dot(j, y);
                switch (status_[static_cast<std::size_t>(j)]) {
                    case VarStatus::AtLower: dual_ok = d >= -5e-9; break;
                    case VarStatus::AtUpper: dual_ok = d <= 5e-9; break;
                    case VarStatus::Free: dual_ok = std::abs(d) <= 5e-9; break;
                    case VarStatus::Basic: break;
                }
            }
            if (dual_ok) return extract();
            if (primal_loop(cost_) == LoopResult::Unbounded) {
                LpSolution sol;
                sol.status = LpStatus::Unbounded;
                sol.objective = -kInf;
                sol.iterations = iters_;
                return sol;
            }
        }
        return extract();
    }

    LpSolution fill_infeasible(LpSolution sol) {
        sol.iterations = iters_;
        return sol;
    }

    LpSolution extract() {
        LpSolution sol;
        sol.status = LpStatus::Optimal;
        sol.iterations = iters_;
        sol.x.assign(static_cast<std::size_t>(n_), 0.0);
        for (int j = 0; j < n_; ++j)
            if (status_[static_cast<std::size_t>(j)] != VarStatus::Basic)
                sol.x[static_cast<std::size_t>(j)] = nonbasic_value(j);
        for (int p = 0; p < m_; ++p) {
            int jb = basic_[static_cast<std::size_t>(p)];
            if (jb < n_) sol.x[static_cast<std::size_t>(jb)] = xb_[static_cast<std::size_t>(p)];
        }
        sol.objective = 0.0;
        for (int j = 0; j < n_; ++j)
            sol.objective += prog_->cost[static_cast<std::size_t>(j)] * sol.x[static_cast<std::size_t>(j)];

        std::vector<double> y;
        btran(basic_costs(cost_), y);
        sol.duals = y;
        sol.reduced_costs.assign(static_cast<std::size_t>(n_), 0.0);
        sol.dual_degenerate = false;
        for (int j = 0; j < n_; ++j) {
            if (status_[static_cast<std::size_t>(j)] == VarStatus::Basic) continue;
            double d = cost_[static_cast<std::size_t>(j)] - col_dot(j, y);
            sol.reduced_costs[static_cast<std::size_t>(j)] = d;
            if (!is_fixed(j) && std::abs(d) <= 1e-9) sol.dual_degenerate = true;
        }
        // Activity comes from the slack value, not a recomputed dot product:
        // a nonbasic slack sits exactly on its (zero) bound, so binding rows
        // report activity == rhs and complementary slackness holds exactly.
        sol.row_activity.assign(static_cast<std::size_t>(m_), 0.0);
        for (int i = 0; i < m_; ++i) {
            int js = n_ + i;
            double s = status_[static_cast<std::size_t>(js)] == VarStatus::Basic
                           ? 0.0
                           : nonbasic_value(js);
            sol.row_activity[static_cast<std::size_t>(i)] =
                prog_->rows[static_cast<std::size_t>(i)].rhs - s;
        }
        for (int p = 0; p < m_; ++p) {
            int jb = basic_[static_cast<std::size_t>(p)];
            if (jb >= n_ && jb < n_ + m_) {
                int i = jb - n_;
                sol.row_activity[static_cast<std::size_t>(i)] =
                    prog_->rows[static_cast<std::size_t>(i)].rhs -
                    xb_[static_cast<std::size_t>(p)];
            }
        }
        sol.row_degenerate.assign(static_cast<std::size_t>(m_), false);
        for (int i = 0; i < m_; ++i) {
            const auto& row = prog_->rows[static_cast<std::size_t>(i)];
            bool binding = std::abs(sol.row_activity[static_cast<std::size_t>(i)] - row.rhs) <=
                           1e-7 * (1.0 + std::abs(row.rhs));
            if (binding && std::abs(y[static_cast<std::size_t>(i)]) <= 1e-9)
                sol.row_degenerate[static_cast<std::size_t>(i)] = true;
        }
        return sol;
    }

    const LinearProgram* prog_;
    SimplexOptions opt_;
    int m_;
    int n_;
    int ncols_base_ = 0;
    std::vector<detail::SparseCol> cols_base_;
    std::vector<detail::SparseCol> cols_;
    std::vector<double> rhs_;
    std::vector<double> lower_, upper_, cost_;
    std::vector<VarStatus> status_;
    std::vector<int> basic_;
    std::vector<double> xb_;
    std::vector<Eta> etas_;
    detail::BasisFactor factor_;
    int iters_ = 0;
    bool bland_always_ = false;
};

inline LpSolution solve_lp(const LinearProgram& p, SimplexOptions opt = {}) {
    p.validate();
    SimplexSolver s(p, opt);
    return s.solve();
}

}  // namespace sccprice::opt
