#pragma once

// Seeded random LP instances for cross-checking the production solver
// against the textbook tableau oracle.

#include <random>
#include <string>

#include "sccprice/lp.hpp"

namespace oracle {

inline sccprice::opt::LinearProgram random_lp(std::mt19937& rng) {
    using sccprice::opt::kInf;
    namespace opt = sccprice::opt;
    std::uniform_int_distribution<int> nvars(2, 8);
    std::uniform_int_distribution<int> nrows(1, 6);
    std::uniform_real_distribution<double> coeff(-5.0, 5.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    opt::LinearProgram p;
    int n = nvars(rng);
    for (int j = 0; j < n; ++j) {
        double c = coeff(rng);
        double kind = unit(rng);
        double lo = -5.0 * unit(rng);
        double width = 1.0 + 8.0 * unit(rng);
        if (kind < 0.55)
            p.add_variable("x" + std::to_string(j), lo, lo + width, c);
        else if (kind < 0.80)
            p.add_variable("x" + std::to_string(j), lo, kInf, c);
        else if (kind < 0.92)
            p.add_variable("x" + std::to_string(j), -kInf, lo + width, c);
        else
            p.add_variable("x" + std::to_string(j), -kInf, kInf, c);
    }
    int m = nrows(rng);
    for (int i = 0; i < m; ++i) {
        opt::Row r;
        r.name = "r" + std::to_string(i);
        std::uniform_int_distribution<int> nnz(1, n);
        int k = nnz(rng);
        std::vector<int> vars(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) vars[static_cast<std::size_t>(j)] = j;
        std::shuffle(vars.begin(), vars.end(), rng);
        for (int q = 0; q < k; ++q) {
            double a = coeff(rng);
            if (std::abs(a) < 0.2) a = a < 0.0 ? -0.2 : 0.2;
            r.coeffs.emplace_back(vars[static_cast<std::size_t>(q)], a);
        }
        double s = unit(rng);
        r.sense = s < 0.45 ? opt::Sense::LessEq
                           : (s < 0.85 ? opt::Sense::GreaterEq : opt::Sense::Equal);
        r.rhs = 2.0 * coeff(rng);
        p.add_row(std::move(r));
    }
    return p;
}

}  // namespace oracle
