#pragma once

#include <sstream>
#include <string>

#include "sccprice/common.hpp"
#include "sccprice/lp.hpp"

namespace sccprice::opt {

/// Serialize a program in LP text format for inspection with external tools.
inline std::string to_lp_text(const LinearProgram& p, const std::string& obj_name = "obj") {
    std::ostringstream out;
    auto var = [&](int j) {
        const std::string& n = p.var_names[static_cast<std::size_t>(j)];
        return n.empty() ? "x" + std::to_string(j) : n;
    };
    auto term = [&](double a, int j, bool first) {
        std::string s;
        if (first)
            s = a < 0 ? "- " : "";
        else
            s = a < 0 ? " - " : " + ";
        double mag = std::abs(a);
        if (mag != 1.0) s += fmt_double(mag) + " ";
        return s + var(j);
    };

    out << "Minimize\n " << obj_name << ":";
    bool first = true;
    for (int j = 0; j < p.num_vars; ++j) {
        double c = p.cost[static_cast<std::size_t>(j)];
        if (c == 0.0) continue;
        out << " " << term(c, j, first);
        first = false;
    }
    if (first) out << " 0";
    out << "\nSubject To\n";
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        const Row& r = p.rows[i];
        out << " " << (r.name.empty() ? "c" + std::to_string(i) : r.name) << ":";
        bool f = true;
        for (auto [j, a] : r.coeffs) {
            if (a == 0.0) continue;
            out << " " << term(a, j, f);
            f = false;
        }
        if (f) out << " 0";
        const char* rel = r.sense == Sense::LessEq ? "<=" : (r.sense == Sense::Equal ? "=" : ">=");
        out << " " << rel << " " << fmt_double(r.rhs) << "\n";
    }
    out << "Bounds\n";
    for (int j = 0; j < p.num_vars; ++j) {
        double l = p.lower[static_cast<std::size_t>(j)], u = p.upper[static_cast<std::size_t>(j)];
        if (!std::isfinite(l) && !std::isfinite(u)) {
            out << " " << var(j) << " free\n";
        } else if (!std::isfinite(l)) {
            out << " -inf <= " << var(j) << " <= " << fmt_double(u) << "\n";
        } else if (!std::isfinite(u)) {
            out << " " << var(j) << " >= " << fmt_double(l) << "\n";
        } else if (l == u) {
            out << " " << var(j) << " = " << fmt_double(l) << "\n";
        } else {
            out << " " << fmt_double(l) << " <= " << var(j) << " <= " << fmt_double(u) << "\n";
        }
    }
    out << "End\n";
    return out.str();
}

}  // namespace sccprice::opt
