#pragma once

// Textbook two-phase full-tableau simplex, written independently of the
// library solver. Bounds are eliminated by shifting/mirroring/splitting
// variables into the standard form min c'z, Az = b, z >= 0, upper bounds
// becoming explicit rows. Bland's rule throughout, so it cannot cycle.
// Intended for small reference problems only.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sccprice/lp.hpp"

namespace oracle {

struct TabResult {
    enum Status { Optimal, Infeasible, Unbounded } status = Optimal;
    double objective = 0.0;
    std::vector<double> x;
};

inline TabResult tableau_solve(const sccprice::opt::LinearProgram& p) {
    using sccprice::opt::Sense;
    const double inf = std::numeric_limits<double>::infinity();

    enum class Kind { Shift, Mirror, Split };
    struct VarMap {
        Kind kind;
        double base;
        int col;
        int col2;
    };
    std::vector<VarMap> vmap;
    int nz = 0;
    struct StdRow {
        std::vector<double> a;
        Sense sense;
        double rhs;
    };
    std::vector<StdRow> srows;

    for (int j = 0; j < p.num_vars; ++j) {
        double l = p.lower[static_cast<std::size_t>(j)], u = p.upper[static_cast<std::size_t>(j)];
        if (std::isfinite(l)) {
            vmap.push_back({Kind::Shift, l, nz++, -1});
        } else if (std::isfinite(u)) {
            vmap.push_back({Kind::Mirror, u, nz++, -1});
        } else {
            vmap.push_back({Kind::Split, 0.0, nz, nz + 1});
            nz += 2;
        }
    }

    auto add_terms = [&](StdRow& row, int j, double a) {
        const VarMap& vm = vmap[static_cast<std::size_t>(j)];
        switch (vm.kind) {
            case Kind::Shift:
                row.a[static_cast<std::size_t>(vm.col)] += a;
                row.rhs -= a * vm.base;
                break;
            case Kind::Mirror:
                row.a[static_cast<std::size_t>(vm.col)] -= a;
                row.rhs -= a * vm.base;
                break;
            case Kind::Split:
                row.a[static_cast<std::size_t>(vm.col)] += a;
                row.a[static_cast<std::size_t>(vm.col2)] -= a;
                break;
        }
    };

    for (const auto& r : p.rows) {
        StdRow row{std::vector<double>(static_cast<std::size_t>(nz), 0.0), r.sense, r.rhs};
        for (auto [j, a] : r.coeffs) add_terms(row, j, a);
        srows.push_back(std::move(row));
    }
    for (int j = 0; j < p.num_vars; ++j) {
        double l = p.lower[static_cast<std::size_t>(j)], u = p.upper[static_cast<std::size_t>(j)];
        if (std::isfinite(l) && std::isfinite(u)) {
            StdRow row{std::vector<double>(static_cast<std::size_t>(nz), 0.0), Sense::LessEq, u - l};
            row.a[static_cast<std::size_t>(vmap[static_cast<std::size_t>(j)].col)] = 1.0;
            srows.push_back(std::move(row));
        }
    }

    const int m = static_cast<int>(srows.size());
    const int nslack = m;
    const int nart = m;
    const int width = nz + nslack + nart;
    std::vector<std::vector<double>> t(static_cast<std::size_t>(m),
                                       std::vector<double>(static_cast<std::size_t>(width), 0.0));
    std::vector<double> rhs(static_cast<std::size_t>(m), 0.0);
    std::vector<int> basis(static_cast<std::size_t>(m), -1);

    for (int i = 0; i < m; ++i) {
        auto& row = srows[static_cast<std::size_t>(i)];
        double sign = row.rhs < 0 ? -1.0 : 1.0;
        for (int k = 0; k < nz; ++k)
            t[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
                sign * row.a[static_cast<std::size_t>(k)];
        if (row.sense == Sense::LessEq)
            t[static_cast<std::size_t>(i)][static_cast<std::size_t>(nz + i)] = sign;
        else if (row.sense == Sense::GreaterEq)
            t[static_cast<std::size_t>(i)][static_cast<std::size_t>(nz + i)] = -sign;
        t[static_cast<std::size_t>(i)][static_cast<std::size_t>(nz + nslack + i)] = 1.0;
        rhs[static_cast<std::size_t>(i)] = sign * row.rhs;
        basis[static_cast<std::size_t>(i)] = nz + nslack + i;
    }

    std::vector<double> cost1(static_cast<std::size_t>(width), 0.0);
    for (int i = 0; i < m; ++i) cost1[static_cast<std::size_t>(nz + nslack + i)] = 1.0;
    std::vector<double> cost2(static_cast<std::size_t>(width), 0.0);
    for (int j = 0; j < p.num_vars; ++j) {
        const VarMap& vm = vmap[static_cast<std::size_t>(j)];
        double c = p.cost[static_cast<std::size_t>(j)];
        if (vm.kind == Kind::Shift)
            cost2[static_cast<std::size_t>(vm.col)] += c;
        else if (vm.kind == Kind::Mirror)
            cost2[static_cast<std::size_t>(vm.col)] -= c;
        else {
            cost2[static_cast<std::size_t>(vm.col)] += c;
            cost2[static_cast<std::size_t>(vm.col2)] -= c;
        }
    }

    auto run = [&](const std::vector<double>& cost, bool phase2) -> int {
        // 0 optimal, 2 unbounded
        for (long iter = 0; iter < 200000; ++iter) {
            int enter = -1;
            for (int j = 0; j < width; ++j) {
                if (phase2 && j >= nz + nslack) continue;
                double d = cost[static_cast<std::size_t>(j)];
                for (int i = 0; i < m; ++i)
                    d -= cost[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])] *
                         t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                if (d < -1e-9) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return 0;
            int leave = -1;
            double best = inf;
            for (int i = 0; i < m; ++i) {
                double a = t[static_cast<std::size_t>(i)][static_cast<std::size_t>(enter)];
                if (a <= 1e-9) continue;
                double ratio = rhs[static_cast<std::size_t>(i)] / a;
                if (ratio < best - 1e-12 ||
                    (ratio <= best + 1e-12 && leave >= 0 &&
                     basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                    best = ratio;
                    leave = i;
                }
            }
            if (leave < 0) return 2;
            double piv = t[static_cast<std::size_t>(leave)][static_cast<std::size_t>(enter)];
            for (int j = 0; j < width; ++j) t[static_cast<std::size_t>(leave)][static_cast<std::size_t>(j)] /= piv;
            rhs[static_cast<std::size_t>(leave)] /= piv;
            for (int i = 0; i < m; ++i) {
                if (i == leave) continue;
                double f = t[static_cast<std::size_t>(i)][static_cast<std::size_t>(enter)];
                if (f == 0.0) continue;
                for (int j = 0; j < width; ++j)
                    t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -=
                        f * t[static_cast<std::size_t>(leave)][static_cast<std::size_t>(j)];
                rhs[static_cast<std::size_t>(i)] -= f * rhs[static_cast<std::size_t>(leave)];
            }
            basis[static_cast<std::size_t>(leave)] = enter;
        }
        throw std::runtime_error("oracle simplex: iteration limit");
    };

    TabResult res;
    run(cost1, false);
    double p1 = 0.0;
    for (int i = 0; i < m; ++i)
        if (basis[static_cast<std::size_t>(i)] >= nz + nslack) p1 += rhs[static_cast<std::size_t>(i)];
    if (p1 > 1e-7) {
        res.status = TabResult::Infeasible;
        return res;
    }
    if (run(cost2, true) == 2) {
        res.status = TabResult::Unbounded;
        return res;
    }

    std::vector<double> z(static_cast<std::size_t>(width), 0.0);
    for (int i = 0; i < m; ++i)
        z[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])] = rhs[static_cast<std::size_t>(i)];
    res.x.assign(static_cast<std::size_t>(p.num_vars), 0.0);
    for (int j = 0; j < p.num_vars; ++j) {
        const VarMap& vm = vmap[static_cast<std::size_t>(j)];
        double v = 0.0;
        if (vm.kind == Kind::Shift)
            v = vm.base + z[static_cast<std::size_t>(vm.col)];
        else if (vm.kind == Kind::Mirror)
            v = vm.base - z[static_cast<std::size_t>(vm.col)];
        else
            v = z[static_cast<std::size_t>(vm.col)] - z[static_cast<std::size_t>(vm.col2)];
        res.x[static_cast<std::size_t>(j)] = v;
        res.objective += p.cost[static_cast<std::size_t>(j)] * v;
    }
    res.status = TabResult::Optimal;
    return res;
}

}  // namespace oracle
