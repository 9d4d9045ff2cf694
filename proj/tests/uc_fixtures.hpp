#pragma once

// Small hand-sized commitment fixtures shared by the UC and pricing tests.

#include <string>
#include <utility>
#include <vector>

#include "sccprice/fit.hpp"
#include "sccprice/lp.hpp"
#include "sccprice/network.hpp"

namespace fixtures {

struct GenSpec {
    double p_max = 100.0;
    double p_min = 0.0;
    double cm = 10.0;
    double cn = 50.0;
    double cs = 100.0;
};

/// Chain network with one SG per leading bus and an optional IBR plus the
/// whole demand on the last bus.
inline sccprice::grid::NetworkCase toy_net(const std::vector<GenSpec>& specs, double ibr_cap,
                                           const std::vector<double>& demand,
                                           std::vector<double> avail = {}) {
    sccprice::grid::NetworkCase net;
    const int ng = static_cast<int>(specs.size());
    const int nb = ng + 1;
    net.horizon = static_cast<int>(demand.size());
    for (int b = 0; b < nb; ++b) net.buses.push_back({b, "b" + std::to_string(b)});
    for (int b = 0; b + 1 < nb; ++b) net.lines.push_back({b, b + 1, {0.01, 0.1}});
    for (int g = 0; g < ng; ++g) {
        const auto& s = specs[static_cast<std::size_t>(g)];
        sccprice::grid::SynchGen gen;
        gen.id = g;
        gen.bus = g;
        gen.x_d2 = 0.2;
        gen.fault_current = 5.0;
        gen.p_min = s.p_min;
        gen.p_max = s.p_max;
        gen.cost_marginal = s.cm;
        gen.cost_noload = s.cn;
        gen.cost_startup = s.cs;
        net.gens.push_back(gen);
    }
    if (avail.empty()) avail.assign(demand.size(), 1.0);
    if (ibr_cap > 0.0) net.ibrs.push_back({0, ng, ibr_cap, 1.5, avail});
    net.demand[ng] = demand;
    net.scc_limits[ng] = 1.0;
    net.validate();
    return net;
}

inline sccprice::fit::CoefficientSet make_coeffs(const sccprice::grid::NetworkCase& net,
                                                 double limit, std::vector<double> k_g,
                                                 std::vector<double> k_c,
                                                 std::vector<double> k_m) {
    sccprice::fit::CoefficientSet k;
    k.sink = net.ibrs.empty() ? net.num_buses() - 1 : net.ibrs.front().bus;
    k.limit = limit;
    k.nu = 0.5;
    k.k_g = std::move(k_g);
    k.k_c = std::move(k_c);
    k.k_m = std::move(k_m);
    if (k.k_m.empty())
        k.k_m.assign(static_cast<std::size_t>(net.num_gens() * (net.num_gens() - 1) / 2), 0.0);
    return k;
}

inline int count_rows(const sccprice::opt::LinearProgram& p, const std::string& prefix) {
    int n = 0;
    for (const auto& r : p.rows)
        if (r.name.rfind(prefix, 0) == 0) ++n;
    return n;
}

inline int count_vars(const sccprice::opt::LinearProgram& p, const std::string& prefix) {
    int n = 0;
    for (const auto& v : p.var_names)
        if (v.rfind(prefix, 0) == 0) ++n;
    return n;
}

}  // namespace fixtures
