#pragma once

// KKT and duality checks shared by the LP unit tests and the acceptance
// runner. Everything is recomputed from the LinearProgram and the reported
// solution, never from solver internals.

#include <cmath>
#include <optional>
#include <string>

#include "sccprice/lp.hpp"

namespace oracle {

struct KktTolerances {
    double primal = 1e-8;         // bound/row violation, scaled by 1 + |rhs|
    double dual = 1e-8;           // reduced-cost / dual sign, scaled by 1 + |c| or 1 + |y|
    double comp_slack = 1e-8;     // |dual * slack|, scaled by 1 + |rhs|
    double strong_duality = 1e-7; // relative gap between primal and dual objectives
};

/// Returns a description of the first KKT violation, or nullopt if the
/// reported optimal solution passes primal feasibility, dual feasibility,
/// complementary slackness and strong duality.
inline std::optional<std::string> check_kkt(const sccprice::opt::LinearProgram& p,
                                            const sccprice::opt::LpSolution& sol,
                                            const KktTolerances& tol = {}) {
    using sccprice::opt::Sense;
    namespace opt = sccprice::opt;
    auto fail = [](const std::string& what) { return std::optional<std::string>(what); };
    if (sol.status != opt::LpStatus::Optimal) return fail("status is not Optimal");
    if (static_cast<int>(sol.x.size()) != p.num_vars) return fail("x size mismatch");
    if (sol.duals.size() != p.rows.size()) return fail("dual size mismatch");
    if (static_cast<int>(sol.reduced_costs.size()) != p.num_vars)
        return fail("reduced cost size mismatch");

    // Primal feasibility: variable bounds.
    for (int j = 0; j < p.num_vars; ++j) {
        double x = sol.x[static_cast<std::size_t>(j)];
        double scale = 1.0 + std::abs(x);
        if (x < p.lower[static_cast<std::size_t>(j)] - tol.primal * scale ||
            x > p.upper[static_cast<std::size_t>(j)] + tol.primal * scale)
            return fail("bound violated for " + p.var_names[static_cast<std::size_t>(j)]);
    }
    // Primal feasibility: rows, using the reported activity and re-checking
    // that activity against a fresh dot product.
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        const auto& row = p.rows[i];
        double act = sol.row_activity[i];
        double fresh = 0.0;
        for (auto [v, a] : row.coeffs) fresh += a * sol.x[static_cast<std::size_t>(v)];
        double scale = 1.0 + std::abs(row.rhs) + std::abs(fresh);
        if (std::abs(fresh - act) > 1e-6 * scale)
            return fail("reported activity drifts from a'x in row " + row.name);
        double lo = act - tol.primal * scale;
        double hi = act + tol.primal * scale;
        switch (row.sense) {
            case Sense::LessEq:
                if (lo > row.rhs) return fail("<= row violated: " + row.name);
                break;
            case Sense::GreaterEq:
                if (hi < row.rhs) return fail(">= row violated: " + row.name);
                break;
            case Sense::Equal:
                if (lo > row.rhs || hi < row.rhs) return fail("= row violated: " + row.name);
                break;
        }
    }
    // Dual feasibility: row dual signs under the convention that a positive
    // dual means increasing the RHS increases the minimized objective.
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        double y = sol.duals[i];
        double scale = 1.0 + std::abs(y);
        if (p.rows[i].sense == Sense::LessEq && y > tol.dual * scale)
            return fail("positive dual on <= row " + p.rows[i].name);
        if (p.rows[i].sense == Sense::GreaterEq && y < -tol.dual * scale)
            return fail("negative dual on >= row " + p.rows[i].name);
    }
    // Dual feasibility: reduced costs d = c - A'y, with the correct sign for
    // the bound the variable sits on.
    for (int j = 0; j < p.num_vars; ++j) {
        double d = p.cost[static_cast<std::size_t>(j)];
        for (std::size_t i = 0; i < p.rows.size(); ++i)
            for (auto [v, a] : p.rows[i].coeffs)
                if (v == j) d -= a * sol.duals[i];
        double scale = 1.0 + std::abs(p.cost[static_cast<std::size_t>(j)]) + std::abs(d);
        if (std::abs(d - sol.reduced_costs[static_cast<std::size_t>(j)]) > 1e-6 * scale)
            return fail("reported reduced cost drifts for " +
                        p.var_names[static_cast<std::size_t>(j)]);
        double x = sol.x[static_cast<std::size_t>(j)];
        double lb = p.lower[static_cast<std::size_t>(j)];
        double ub = p.upper[static_cast<std::size_t>(j)];
        bool at_lb = std::isfinite(lb) && x <= lb + 1e-7 * (1.0 + std::abs(lb));
        bool at_ub = std::isfinite(ub) && x >= ub - 1e-7 * (1.0 + std::abs(ub));
        if (at_lb && at_ub) continue;  // fixed: any sign
        if (at_lb) {
            if (d < -tol.dual * scale)
                return fail("negative reduced cost at lower bound for " +
                            p.var_names[static_cast<std::size_t>(j)]);
        } else if (at_ub) {
            if (d > tol.dual * scale)
                return fail("positive reduced cost at upper bound for " +
                            p.var_names[static_cast<std::size_t>(j)]);
        } else {
            if (std::abs(d) > tol.dual * scale)
                return fail("nonzero reduced cost at interior point for " +
                            p.var_names[static_cast<std::size_t>(j)]);
        }
    }
    // Complementary slackness on rows: dual * slack ~ 0.
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        if (p.rows[i].sense == Sense::Equal) continue;
        double slack = p.rows[i].rhs - sol.row_activity[i];
        double prod = std::abs(sol.duals[i] * slack);
        if (prod > tol.comp_slack * (1.0 + std::abs(p.rows[i].rhs)))
            return fail("complementary slackness fails on row " + p.rows[i].name);
    }
    // Complementary slackness on bounds: reduced cost * distance-to-bound ~ 0.
    for (int j = 0; j < p.num_vars; ++j) {
        double d = sol.reduced_costs[static_cast<std::size_t>(j)];
        if (std::abs(d) <= 1e-12 * (1.0 + std::abs(p.cost[static_cast<std::size_t>(j)])))
            continue;
        double x = sol.x[static_cast<std::size_t>(j)];
        double lb = p.lower[static_cast<std::size_t>(j)];
        double ub = p.upper[static_cast<std::size_t>(j)];
        double dist = d > 0.0 ? (std::isfinite(lb) ? x - lb : sccprice::opt::kInf)
                              : (std::isfinite(ub) ? ub - x : sccprice::opt::kInf);
        if (!std::isfinite(dist)) return fail("reduced cost points at an infinite bound for " +
                                              p.var_names[static_cast<std::size_t>(j)]);
        if (std::abs(d * dist) > tol.comp_slack * (1.0 + std::abs(x)) * (1.0 + std::abs(d)))
            return fail("bound complementary slackness fails for " +
                        p.var_names[static_cast<std::size_t>(j)]);
    }
    // Strong duality: primal objective equals the Lagrangian dual objective
    // y'b + sum_j d_j * (active bound of j).
    double dual_obj = 0.0;
    for (std::size_t i = 0; i < p.rows.size(); ++i) dual_obj += sol.duals[i] * p.rows[i].rhs;
    for (int j = 0; j < p.num_vars; ++j) {
        double d = sol.reduced_costs[static_cast<std::size_t>(j)];
        if (std::abs(d) <= 1e-12 * (1.0 + std::abs(p.cost[static_cast<std::size_t>(j)])))
            continue;
        dual_obj += d * (d > 0.0 ? p.lower[static_cast<std::size_t>(j)]
                                 : p.upper[static_cast<std::size_t>(j)]);
    }
    if (std::abs(sol.objective - dual_obj) >
        tol.strong_duality * (1.0 + std::abs(sol.objective)))
        return fail("strong duality gap");
    // Reported objective matches c'x.
    double cx = 0.0;
    for (int j = 0; j < p.num_vars; ++j)
        cx += p.cost[static_cast<std::size_t>(j)] * sol.x[static_cast<std::size_t>(j)];
    if (std::abs(cx - sol.objective) > 1e-7 * (1.0 + std::abs(cx)))
        return fail("objective drifts from c'x");
    return std::nullopt;
}

}  // namespace oracle
