#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sccprice/common.hpp"

namespace sccprice::opt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEq, Equal, GreaterEq };

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct Row {
    std::vector<std::pair<int, double>> coeffs;  // (variable, coefficient), no duplicates
    Sense sense = Sense::LessEq;
    double rhs = 0.0;
    std::string name;
};

/// Dense-solver-friendly LP: minimize cost'x subject to rows and bounds.
struct LinearProgram {
    int num_vars = 0;
    std::vector<double> cost;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::string> var_names;
    std::vector<Row> rows;

    int add_variable(const std::string& name, double lb, double ub, double c) {
        var_names.push_back(name);
        lower.push_back(lb);
        upper.push_back(ub);
        cost.push_back(c);
        return num_vars++;
    }

    int add_row(Row r) {
        rows.push_back(std::move(r));
        return static_cast<int>(rows.size()) - 1;
    }

    int row_index(const std::string& name) const {
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i].name == name) return static_cast<int>(i);
        return -1;
    }

    void validate() const {
        if (static_cast<int>(cost.size()) != num_vars ||
            static_cast<int>(lower.size()) != num_vars ||
            static_cast<int>(upper.size()) != num_vars)
            throw ValidationError("LP: inconsistent variable array sizes");
        for (int j = 0; j < num_vars; ++j) {
            if (lower[j] > upper[j])
                throw ValidationError("LP: lower > upper for variable " + var_names[j]);
            if (std::isnan(lower[j]) || std::isnan(upper[j]) || !std::isfinite(cost[j]))
                throw ValidationError("LP: bad bound/cost for variable " + var_names[j]);
        }
        for (const auto& r : rows) {
            if (!std::isfinite(r.rhs)) throw ValidationError("LP: non-finite rhs in row " + r.name);
            std::vector<char> seen(static_cast<std::size_t>(num_vars), 0);
            for (auto [v, a] : r.coeffs) {
                if (v < 0 || v >= num_vars)
                    throw ValidationError("LP: bad variable index in row " + r.name);
                if (seen[static_cast<std::size_t>(v)])
                    throw ValidationError("LP: duplicate variable in row " + r.name);
                seen[static_cast<std::size_t>(v)] = 1;
                if (!std::isfinite(a))
                    throw ValidationError("LP: non-finite coefficient in row " + r.name);
            }
        }
    }
};

/// A mixed-binary program: an LP plus the indices restricted to {0,1}.
struct MixedProgram {
    LinearProgram lp;
    std::vector<int> binary_vars;

    void validate() const {
        lp.validate();
        for (int v : binary_vars) {
            if (v < 0 || v >= lp.num_vars)
                throw ValidationError("MILP: binary index out of range");
            if (lp.lower[v] < -1e-12 || lp.upper[v] > 1.0 + 1e-12)
                throw ValidationError("MILP: binary variable must be bounded within [0,1]");
        }
    }
};

struct LpSolution {
    LpStatus status = LpStatus::Optimal;
    std::vector<double> x;
    double objective = 0.0;
    /// Per-row duals. Sign convention: positive dual means increasing the RHS
    /// increases the minimized objective.
    std::vector<double> duals;
    std::vector<double> reduced_costs;
    std::vector<double> row_activity;
    /// Row is binding with a (near) zero dual: sensitivity not trustworthy.
    std::vector<bool> row_degenerate;
    /// Some nonbasic variable has zero reduced cost: alternate optima exist.
    bool dual_degenerate = false;
    int iterations = 0;
    double infeasibility = 0.0;  // measured phase-1 objective when infeasible

    double slack(const LinearProgram& p, int row) const {
        return p.rows[static_cast<std::size_t>(row)].rhs -
               row_activity[static_cast<std::size_t>(row)];
    }
};

}  // namespace sccprice::opt
