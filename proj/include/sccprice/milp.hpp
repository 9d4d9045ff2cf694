#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "sccprice/common.hpp"
#include "sccprice/lp.hpp"
#include "sccprice/simplex.hpp"

namespace sccprice::opt {

struct MilpOptions {
    long node_budget = 100000;
    double int_tol = 1e-7;
    double prune_gap = 1e-9;
    SimplexOptions lp;
    /// Optional starting point: values for every variable (only the binary
    /// entries are read). When it yields a feasible fixing, it seeds the
    /// incumbent so best-bound pruning starts immediately.
    std::optional<std::vector<double>> hint;
    bool tighten = true;  // activity-based bound tightening at every node
};

namespace detail {

/// Activity-based bound tightening over one node's boxes: any row whose
/// residual activity range already decides a variable narrows that variable's
/// box, binaries round to integer boxes, and the passes repeat until a
/// fixpoint. Returns false when some row cannot be satisfied at all, which
/// prunes the node without an LP solve. Only points violating a row are ever
/// cut, so the surviving box keeps every integer-feasible point.
inline bool tighten_bounds(const LinearProgram& lp, const std::vector<char>& is_binary,
                           std::vector<double>& lo, std::vector<double>& hi) {
    const int passes = 10;
    for (int pass = 0; pass < passes; ++pass) {
        bool changed = false;
        for (const auto& row : lp.rows) {
            double amin = 0.0, amax = 0.0;
            int min_inf = 0, max_inf = 0;
            for (const auto& [v, a] : row.coeffs) {
                if (a == 0.0) continue;
                const auto j = static_cast<std::size_t>(v);
                double cmin = a > 0.0 ? a * lo[j] : a * hi[j];
                double cmax = a > 0.0 ? a * hi[j] : a * lo[j];
                if (std::isinf(cmin)) ++min_inf; else amin += cmin;
                if (std::isinf(cmax)) ++max_inf; else amax += cmax;
            }
            const bool need_ge = row.sense != Sense::LessEq;
            const bool need_le = row.sense != Sense::GreaterEq;
            const double tol = 1e-9 * (1.0 + std::abs(row.rhs));
            if (need_ge && max_inf == 0 && amax < row.rhs - tol) return false;
            if (need_le && min_inf == 0 && amin > row.rhs + tol) return false;
            for (const auto& [v, a] : row.coeffs) {
                if (a == 0.0) continue;
                const auto j = static_cast<std::size_t>(v);
                double cmin = a > 0.0 ? a * lo[j] : a * hi[j];
                double cmax = a > 0.0 ? a * hi[j] : a * lo[j];
                if (need_ge && max_inf == 0 && !std::isinf(cmax)) {
                    double limit = (row.rhs - (amax - cmax)) / a;
                    if (a > 0.0) {
                        if (limit > lo[j] + 1e-7 * (1.0 + std::abs(limit))) {
                            lo[j] = limit;
                            changed = true;
                        }
                    } else if (limit < hi[j] - 1e-7 * (1.0 + std::abs(limit))) {
                        hi[j] = limit;
                        changed = true;
                    }
                }
                if (need_le && min_inf == 0 && !std::isinf(cmin)) {
                    double limit = (row.rhs - (amin - cmin)) / a;
                    if (a > 0.0) {
                        if (limit < hi[j] - 1e-7 * (1.0 + std::abs(limit))) {
                            hi[j] = limit;
                            changed = true;
                        }
                    } else if (limit > lo[j] + 1e-7 * (1.0 + std::abs(limit))) {
                        lo[j] = limit;
                        changed = true;
                    }
                }
            }
        }
        for (std::size_t j = 0; j < is_binary.size(); ++j) {
            if (!is_binary[j]) continue;
            double rl = std::ceil(lo[j] - 1e-9);
            double ru = std::floor(hi[j] + 1e-9);
            if (rl != lo[j]) { lo[j] = rl; changed = true; }
            if (ru != hi[j]) { hi[j] = ru; changed = true; }
        }
        for (std::size_t j = 0; j < lo.size(); ++j)
            if (lo[j] > hi[j] + 1e-9 * (1.0 + std::abs(hi[j]))) return false;
        if (!changed) break;
    }
    return true;
}

}  // namespace detail

/// Branch and bound over the binaries of a MixedProgram: best-bound node
/// selection with a depth-first plunge until the first incumbent,
/// most-fractional branching with ties broken by lowest variable index.
/// Returns the optimum with binaries snapped to exact integers and duals
/// taken from a final clean solve with all binaries fixed.
inline LpSolution solve_milp(const MixedProgram& mp, const MilpOptions& opts = {}) {
    mp.validate();
    SimplexSolver solver(mp.lp, opts.lp);

    struct Node {
        long id = 0;
        double bound = -kInf;
        std::vector<BoundChange> changes;
        SimplexSolver::Basis warm;
    };
    struct NodeOrder {
        bool operator()(const Node& a, const Node& b) const {
            if (a.bound != b.bound) return a.bound < b.bound;
            return a.id < b.id;
        }
    };

    std::set<Node, NodeOrder> pending;
    std::vector<Node> dive;
    long next_id = 0;
    long solved = 0;

    bool have_incumbent = false;
    double inc_obj = kInf;
    std::vector<double> inc_x;

    std::vector<char> is_binary(static_cast<std::size_t>(mp.lp.num_vars), 0);
    for (int b : mp.binary_vars) is_binary[static_cast<std::size_t>(b)] = 1;
    std::vector<double> lo, hi;
    auto materialize = [&](const std::vector<BoundChange>& changes) {
        lo = mp.lp.lower;
        hi = mp.lp.upper;
        for (const auto& c : changes) {
            lo[static_cast<std::size_t>(c.var)] = c.lower;
            hi[static_cast<std::size_t>(c.var)] = c.upper;
        }
    };
    auto repack = [&]() {
        std::vector<BoundChange> changes;
        for (int v = 0; v < mp.lp.num_vars; ++v) {
            const auto j = static_cast<std::size_t>(v);
            if (lo[j] != mp.lp.lower[j] || hi[j] != mp.lp.upper[j])
                changes.push_back(BoundChange{v, lo[j], hi[j]});
        }
        return changes;
    };

    auto fix_all_binaries = [&](const std::vector<double>& x) {
        std::vector<BoundChange> changes;
        changes.reserve(mp.binary_vars.size());
        for (int b : mp.binary_vars) {
            double v = x[static_cast<std::size_t>(b)] >= 0.5 ? 1.0 : 0.0;
            double lo = std::max(mp.lp.lower[static_cast<std::size_t>(b)], v);
            double hi = std::min(mp.lp.upper[static_cast<std::size_t>(b)], v);
            changes.push_back(BoundChange{b, lo, hi});
        }
        return changes;
    };

    if (opts.hint && static_cast<int>(opts.hint->size()) == mp.lp.num_vars) {
        bool in_bounds = true;
        for (int b : mp.binary_vars) {
            double v = (*opts.hint)[static_cast<std::size_t>(b)] >= 0.5 ? 1.0 : 0.0;
            if (v < mp.lp.lower[static_cast<std::size_t>(b)] - 1e-12 ||
                v > mp.lp.upper[static_cast<std::size_t>(b)] + 1e-12)
                in_bounds = false;
        }
        if (in_bounds) {
            LpSolution seeded = solver.solve(fix_all_binaries(*opts.hint));
            if (seeded.status == LpStatus::Optimal) {
                have_incumbent = true;
                inc_obj = seeded.objective;
                inc_x = seeded.x;
            }
        }
    }

    pending.insert(Node{next_id++, -kInf, {}, SimplexSolver::Basis{}});

    auto best_open_bound = [&]() {
        double b = kInf;
        if (!pending.empty()) b = std::min(b, pending.begin()->bound);
        for (const auto& n : dive) b = std::min(b, n.bound);
        return b;
    };

    while (!pending.empty() || !dive.empty()) {
        Node node;
        if (!have_incumbent && !dive.empty()) {
            node = std::move(dive.back());
            dive.pop_back();
        } else {
            if (!dive.empty()) {
                // An incumbent arrived: fold the remaining plunge nodes into
                // the best-bound frontier.
                for (auto& n : dive) pending.insert(std::move(n));
                dive.clear();
            }
            node = *pending.begin();
            pending.erase(pending.begin());
        }
        if (have_incumbent && node.bound >= inc_obj - opts.prune_gap) continue;

        if (++solved > opts.node_budget)
            throw BudgetError("branch-and-bound node budget exhausted after " +
                                  std::to_string(solved - 1) + " nodes",
                              have_incumbent ? inc_obj : std::nan(""),
                              std::min(node.bound, best_open_bound()));

        materialize(node.changes);
        if (opts.tighten) {
            if (!detail::tighten_bounds(mp.lp, is_binary, lo, hi)) continue;
            node.changes = repack();
        }

        LpSolution rel = solver.solve(node.changes, node.warm.usable ? &node.warm : nullptr);
        if (rel.status == LpStatus::Infeasible) continue;
        if (rel.status == LpStatus::Unbounded)
            throw UnboundedError("relaxation is unbounded; the integer program is ill-posed");
        if (have_incumbent && rel.objective >= inc_obj - opts.prune_gap) continue;

        int frac_var = -1;
        double frac_score = opts.int_tol;
        for (int b : mp.binary_vars) {
            double v = rel.x[static_cast<std::size_t>(b)];
            double frac = v - std::floor(v);
            double dist = std::min(frac, 1.0 - frac);
            if (dist > frac_score + 1e-15) {
                frac_score = dist;
                frac_var = b;
            }
        }

        if (frac_var < 0) {
            if (!have_incumbent || rel.objective < inc_obj - 1e-12) {
                have_incumbent = true;
                inc_obj = rel.objective;
                inc_x = rel.x;
            }
            continue;
        }

        SimplexSolver::Basis warm = solver.basis();
        double v = rel.x[static_cast<std::size_t>(frac_var)];
        bool up_first = v >= 0.5;
        // A child is viable only when the fixed value lies inside the node's
        // box for that variable; a binary boxed away from an integer value
        // simply loses that branch.
        auto viable = [&](double fix) {
            return fix >= lo[static_cast<std::size_t>(frac_var)] - 1e-12 &&
                   fix <= hi[static_cast<std::size_t>(frac_var)] + 1e-12;
        };
        auto make_child = [&](double fix) {
            Node child;
            child.id = next_id++;
            child.bound = rel.objective;
            child.changes = node.changes;
            child.changes.push_back(BoundChange{frac_var, fix, fix});
            child.warm = warm;
            return child;
        };
        std::vector<Node> children;
        if (viable(up_first ? 1.0 : 0.0)) children.push_back(make_child(up_first ? 1.0 : 0.0));
        if (viable(up_first ? 0.0 : 1.0)) children.push_back(make_child(up_first ? 0.0 : 1.0));
        if (!have_incumbent) {
            for (auto it = children.rbegin(); it != children.rend(); ++it)
                dive.push_back(std::move(*it));
        } else {
            for (auto& c : children) pending.insert(std::move(c));
        }
    }

    if (!have_incumbent) {
        LpSolution sol;
        sol.status = LpStatus::Infeasible;
        sol.objective = kInf;
        return sol;
    }

    LpSolution final_sol = solver.solve(fix_all_binaries(inc_x));
    if (final_sol.status != LpStatus::Optimal)
        throw Error("final fixed-binary solve lost feasibility");
    for (int b : mp.binary_vars)
        final_sol.x[static_cast<std::size_t>(b)] =
            inc_x[static_cast<std::size_t>(b)] >= 0.5 ? 1.0 : 0.0;
    return final_sol;
}

}  // namespace sccprice::opt
