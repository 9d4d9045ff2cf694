#pragma once

#include <complex>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sccprice/common.hpp"

namespace sccprice::grid {

struct Bus {
    int id = 0;
    std::string name;
};

struct Line {
    int from_bus = 0;
    int to_bus = 0;
    std::complex<double> series_impedance;  // per-unit
};

struct SynchGen {
    int id = 0;
    int bus = 0;             // Psi(g)
    double x_d2 = 0.0;       // subtransient reactance, per-unit
    double fault_current = 0.0;  // per-unit magnitude; defaults to 1/x_d2
    double p_min = 0.0;      // MW
    double p_max = 0.0;      // MW
    double cost_marginal = 0.0;  // currency/MWh
    double cost_noload = 0.0;    // currency/h
    double cost_startup = 0.0;   // currency per start
    double ramp = 0.0;       // MW/h; 0 = unlimited (constraint only built when enabled)
    int min_up = 0;          // hours; 0 = none
    int min_down = 0;        // hours; 0 = none
};

struct Ibr {
    int id = 0;
    int bus = 0;                       // Phi(c)
    double capacity = 0.0;             // MW
    double fault_current = 0.0;        // per-unit per fully-online unit
    std::vector<double> availability;  // per-hour fraction in [0,1]
};

/// Static grid description: buses, lines, machines, profiles and SCC limits.
struct NetworkCase {
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<SynchGen> gens;
    std::vector<Ibr> ibrs;
    std::map<int, std::vector<double>> demand;  // bus id -> per-hour MW
    std::map<int, double> scc_limits;           // sink bus -> I''_lim per-unit
    double base_mva = 100.0;
    double shed_cost = 10000.0;  // currency/MWh
    int horizon = 24;

    int num_buses() const { return static_cast<int>(buses.size()); }
    int num_gens() const { return static_cast<int>(gens.size()); }
    int num_ibrs() const { return static_cast<int>(ibrs.size()); }

    double total_demand(int hour) const {
        double d = 0.0;
        for (const auto& [bus, profile] : demand) d += profile.at(static_cast<std::size_t>(hour));
        return d;
    }

    void validate() const;
};

inline void NetworkCase::validate() const {
    const int n = num_buses();
    if (n == 0) throw ValidationError("case has no buses");
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (const auto& b : buses) {
        if (b.id < 0 || b.id >= n)
            throw ValidationError("bus ids must be dense 0..N-1, got " + std::to_string(b.id));
        if (seen[static_cast<std::size_t>(b.id)])
            throw ValidationError("duplicate bus id " + std::to_string(b.id));
        seen[static_cast<std::size_t>(b.id)] = true;
    }
    auto check_bus = [&](int b, const char* what) {
        if (b < 0 || b >= n)
            throw ValidationError(std::string(what) + " references unknown bus " + std::to_string(b));
    };
    for (const auto& l : lines) {
        check_bus(l.from_bus, "line");
        check_bus(l.to_bus, "line");
        if (l.from_bus == l.to_bus) throw ValidationError("line from_bus == to_bus");
        if (std::abs(l.series_impedance) <= 0.0)
            throw ValidationError("line impedance magnitude must be positive");
    }
    if (gens.size() > 62) throw ValidationError("more than 62 SGs not supported (commitment bitmask)");
    for (const auto& g : gens) {
        check_bus(g.bus, "gen");
        if (g.x_d2 <= 0.0) throw ValidationError("gen x_d2 must be > 0");
        if (g.fault_current < 0.0) throw ValidationError("gen fault_current must be >= 0");
        if (g.p_min < 0.0 || g.p_min > g.p_max)
            throw ValidationError("gen requires 0 <= p_min <= p_max");
    }
    for (const auto& c : ibrs) {
        check_bus(c.bus, "ibr");
        if (c.capacity <= 0.0) throw ValidationError("ibr capacity must be > 0");
        if (static_cast<int>(c.availability.size()) != horizon)
            throw ValidationError("ibr availability length must equal horizon");
        for (double a : c.availability)
            if (a < 0.0 || a > 1.0) throw ValidationError("ibr availability must lie in [0,1]");
    }
    for (const auto& [bus, profile] : demand) {
        check_bus(bus, "demand");
        if (static_cast<int>(profile.size()) != horizon)
            throw ValidationError("demand profile length must equal horizon");
        for (double d : profile)
            if (d < 0.0) throw ValidationError("demand must be nonnegative");
    }
    for (const auto& [bus, lim] : scc_limits) {
        check_bus(bus, "scc_limit");
        if (lim <= 0.0) throw ValidationError("scc limit must be positive");
    }
    if (horizon <= 0) throw ValidationError("horizon must be positive");
    // Connectivity over lines.
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    std::vector<int> stack{0};
    comp[0] = 0;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (const auto& l : lines) {
            int v = -1;
            if (l.from_bus == u) v = l.to_bus;
            else if (l.to_bus == u) v = l.from_bus;
            if (v >= 0 && comp[static_cast<std::size_t>(v)] < 0) {
                comp[static_cast<std::size_t>(v)] = 0;
                stack.push_back(v);
            }
        }
    }
    for (int i = 0; i < n; ++i)
        if (comp[static_cast<std::size_t>(i)] < 0)
            throw ValidationError("network graph is disconnected at bus " + std::to_string(i));
}

// ---------------------------------------------------------------------------
// JSON case format (documented in docs/case_schema.md)
// ---------------------------------------------------------------------------

inline NetworkCase case_from_json(const nlohmann::json& j) {
    NetworkCase c;
    try {
        c.base_mva = j.value("base_mva", 100.0);
        c.shed_cost = j.value("shed_cost", 10000.0);
        c.horizon = j.at("horizon").get<int>();
        for (const auto& jb : j.at("buses")) {
            Bus b;
            b.id = jb.at("id").get<int>();
            b.name = jb.value("name", "bus" + std::to_string(b.id));
            c.buses.push_back(std::move(b));
        }
        for (const auto& jl : j.at("lines")) {
            Line l;
            l.from_bus = jl.at("from").get<int>();
            l.to_bus = jl.at("to").get<int>();
            l.series_impedance = {jl.value("r", 0.0), jl.at("x").get<double>()};
            c.lines.push_back(l);
        }
        for (const auto& jg : j.at("gens")) {
            SynchGen g;
            g.id = jg.at("id").get<int>();
            g.bus = jg.at("bus").get<int>();
            g.x_d2 = jg.at("x_d2").get<double>();
            g.fault_current = jg.value("fault_current", g.x_d2 > 0.0 ? 1.0 / g.x_d2 : 0.0);
            g.p_min = jg.at("p_min").get<double>();
            g.p_max = jg.at("p_max").get<double>();
            g.cost_marginal = jg.at("cost_marginal").get<double>();
            g.cost_noload = jg.at("cost_noload").get<double>();
            g.cost_startup = jg.at("cost_startup").get<double>();
            g.ramp = jg.value("ramp", 0.0);
            g.min_up = jg.value("min_up", 0);
            g.min_down = jg.value("min_down", 0);
            c.gens.push_back(std::move(g));
        }
        for (const auto& jc : j.at("ibrs")) {
            Ibr b;
            b.id = jc.at("id").get<int>();
            b.bus = jc.at("bus").get<int>();
            b.capacity = jc.at("capacity").get<double>();
            b.fault_current = jc.at("fault_current").get<double>();
            b.availability = jc.at("availability").get<std::vector<double>>();
            c.ibrs.push_back(std::move(b));
        }
        for (const auto& [key, profile] : j.at("demand").items())
            c.demand[std::stoi(key)] = profile.get<std::vector<double>>();
        for (const auto& [key, lim] : j.at("scc_limits").items())
            c.scc_limits[std::stoi(key)] = lim.get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("case JSON: ") + e.what());
    }
    c.validate();
    return c;
}

inline nlohmann::json case_to_json(const NetworkCase& c) {
    nlohmann::json j;
    j["base_mva"] = c.base_mva;
    j["shed_cost"] = c.shed_cost;
    j["horizon"] = c.horizon;
    j["buses"] = nlohmann::json::array();
    for (const auto& b : c.buses) j["buses"].push_back({{"id", b.id}, {"name", b.name}});
    j["lines"] = nlohmann::json::array();
    for (const auto& l : c.lines)
        j["lines"].push_back({{"from", l.from_bus},
                              {"to", l.to_bus},
                              {"r", l.series_impedance.real()},
                              {"x", l.series_impedance.imag()}});
    j["gens"] = nlohmann::json::array();
    for (const auto& g : c.gens) {
        nlohmann::json jg = {{"id", g.id},
                             {"bus", g.bus},
                             {"x_d2", g.x_d2},
                             {"fault_current", g.fault_current},
                             {"p_min", g.p_min},
                             {"p_max", g.p_max},
                             {"cost_marginal", g.cost_marginal},
                             {"cost_noload", g.cost_noload},
                             {"cost_startup", g.cost_startup}};
        if (g.ramp > 0.0) jg["ramp"] = g.ramp;
        if (g.min_up > 0) jg["min_up"] = g.min_up;
        if (g.min_down > 0) jg["min_down"] = g.min_down;
        j["gens"].push_back(std::move(jg));
    }
    j["ibrs"] = nlohmann::json::array();
    for (const auto& b : c.ibrs)
        j["ibrs"].push_back({{"id", b.id},
                             {"bus", b.bus},
                             {"capacity", b.capacity},
                             {"fault_current", b.fault_current},
                             {"availability", b.availability}});
    j["demand"] = nlohmann::json::object();
    for (const auto& [bus, profile] : c.demand) j["demand"][std::to_string(bus)] = profile;
    j["scc_limits"] = nlohmann::json::object();
    for (const auto& [bus, lim] : c.scc_limits) j["scc_limits"][std::to_string(bus)] = lim;
    return j;
}

inline NetworkCase load_case(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open case file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("case file " + path + ": " + e.what());
    }
    return case_from_json(j);
}

}  // namespace sccprice::grid
