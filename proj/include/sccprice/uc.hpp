#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sccprice/common.hpp"
#include "sccprice/csv.hpp"
#include "sccprice/fit.hpp"
#include "sccprice/lp.hpp"
#include "sccprice/network.hpp"
#include "sccprice/scc.hpp"

namespace sccprice::uc {

enum class Variant { FullMilp, Dispatchable, Restricted };

struct UcConfig {
    int active_sink = -1;
    bool include_scc = true;
    Variant variant = Variant::FullMilp;
    /// x*[t][g], required for the restricted variant.
    std::optional<std::vector<std::vector<double>>> fixed_commitment;
    bool enable_ramp = false;
    bool enable_min_updown = false;
};

/// Deterministic variable layout shared by the builders and the extractor.
/// Per hour: x,s,P per gen, alpha per IBR, shed, then eta per SG pair when
/// the variant carries pairwise terms.
struct UcLayout {
    int ng = 0, nc = 0, nt = 0, npairs = 0;
    bool has_eta = false;

    static UcLayout make(const grid::NetworkCase& net, const UcConfig& cfg) {
        UcLayout l;
        l.ng = net.num_gens();
        l.nc = net.num_ibrs();
        l.nt = net.horizon;
        l.npairs = l.ng * (l.ng - 1) / 2;
        l.has_eta = cfg.include_scc && cfg.variant != Variant::Dispatchable;
        return l;
    }

    int per_hour() const { return 3 * ng + nc + 1 + (has_eta ? npairs : 0); }
    int total() const { return per_hour() * nt; }
    int x(int g, int t) const { return t * per_hour() + 3 * g; }
    int s(int g, int t) const { return t * per_hour() + 3 * g + 1; }
    int P(int g, int t) const { return t * per_hour() + 3 * g + 2; }
    int alpha(int c, int t) const { return t * per_hour() + 3 * ng + c; }
    int shed(int t) const { return t * per_hour() + 3 * ng + nc; }
    int eta(int m, int t) const { return t * per_hour() + 3 * ng + nc + 1 + m; }
};

namespace detail {

inline std::string vn(const char* base, int a, int t) {
    return std::string(base) + "[" + std::to_string(a) + "," + std::to_string(t) + "]";
}

inline std::string hn(const char* base, int t) {
    return std::string(base) + "[" + std::to_string(t) + "]";
}

inline const fit::CoefficientSet& active_coeffs(
    const std::map<int, fit::CoefficientSet>& coeffs, const UcConfig& cfg) {
    auto it = coeffs.find(cfg.active_sink);
    if (it == coeffs.end())
        throw ValidationError("no coefficient set for sink " + std::to_string(cfg.active_sink));
    return it->second;
}

inline void check_config(const grid::NetworkCase& net,
                         const std::map<int, fit::CoefficientSet>& coeffs, const UcConfig& cfg) {
    if (cfg.include_scc) {
        const auto& k = active_coeffs(coeffs, cfg);
        if (static_cast<int>(k.k_g.size()) != net.num_gens() ||
            static_cast<int>(k.k_c.size()) != net.num_ibrs())
            throw ValidationError("coefficient set does not match the case dimensions");
    }
    if (cfg.variant == Variant::Restricted) {
        if (!cfg.fixed_commitment)
            throw ValidationError("restricted variant requires a fixed commitment");
        if (static_cast<int>(cfg.fixed_commitment->size()) != net.horizon)
            throw ValidationError("fixed commitment horizon mismatch");
        for (const auto& xs : *cfg.fixed_commitment)
            if (static_cast<int>(xs.size()) != net.num_gens())
                throw ValidationError("fixed commitment gen-count mismatch");
    }
}

/// Common body for all three variants.
inline opt::LinearProgram build_lp(const grid::NetworkCase& net,
                                   const std::map<int, fit::CoefficientSet>& coeffs,
                                   const UcConfig& cfg) {
    check_config(net, coeffs, cfg);
    const UcLayout l = UcLayout::make(net, cfg);
    const auto pairs = fit::gen_pairs(l.ng);
    const bool restricted = cfg.variant == Variant::Restricted;

    opt::LinearProgram p;
    for (int t = 0; t < l.nt; ++t) {
        for (int g = 0; g < l.ng; ++g) {
            const auto& gen = net.gens[static_cast<std::size_t>(g)];
            // Restricted drops the upper bounds on x and s: a pinned-on x
            // and its startup must then be basic, so the pin equality row,
            // not a bound or the startup's reduced cost, carries the dual; a
            // pinned-off x rests on the shared lower bound and its pin stays
            // at dual zero unless the LP actually fights it. Values are
            // unchanged: the pins and the startup cost still cap both at 1.
            p.add_variable(vn("x", g, t), 0.0, restricted ? opt::kInf : 1.0, gen.cost_noload);
            p.add_variable(vn("s", g, t), 0.0, restricted ? opt::kInf : 1.0, gen.cost_startup);
            p.add_variable(vn("P", g, t), 0.0, opt::kInf, gen.cost_marginal);
        }
        for (int c = 0; c < l.nc; ++c) {
            const auto& ibr = net.ibrs[static_cast<std::size_t>(c)];
            p.add_variable(vn("alpha", c, t), 0.0,
                           ibr.availability[static_cast<std::size_t>(t)], 0.0);
        }
        p.add_variable(hn("shed", t), 0.0, net.total_demand(t), net.shed_cost);
        if (l.has_eta) {
            for (int m = 0; m < l.npairs; ++m) {
                double lo = 0.0, hi = 1.0;
                if (restricted) {
                    const auto& xs = (*cfg.fixed_commitment)[static_cast<std::size_t>(t)];
                    double star = xs[static_cast<std::size_t>(pairs[static_cast<std::size_t>(m)].first)] *
                                  xs[static_cast<std::size_t>(pairs[static_cast<std::size_t>(m)].second)];
                    lo = hi = star;
                }
                p.add_variable(vn("eta", m, t), lo, hi, 0.0);
            }
        }
    }

    for (int t = 0; t < l.nt; ++t) {
        for (int g = 0; g < l.ng; ++g) {
            const auto& gen = net.gens[static_cast<std::size_t>(g)];
            p.add_row({{{l.P(g, t), 1.0}, {l.x(g, t), -gen.p_max}},
                       opt::Sense::LessEq,
                       0.0,
                       vn("cap", g, t)});
            if (gen.p_min > 0.0)
                p.add_row({{{l.P(g, t), 1.0}, {l.x(g, t), -gen.p_min}},
                           opt::Sense::GreaterEq,
                           0.0,
                           vn("floor", g, t)});
            opt::Row start{{{l.s(g, t), 1.0}, {l.x(g, t), -1.0}},
                           opt::Sense::GreaterEq,
                           0.0,
                           vn("start", g, t)};
            if (t > 0) start.coeffs.emplace_back(l.x(g, t - 1), 1.0);
            p.add_row(std::move(start));
            if (cfg.enable_ramp && gen.ramp > 0.0 && t > 0) {
                p.add_row({{{l.P(g, t), 1.0}, {l.P(g, t - 1), -1.0}},
                           opt::Sense::LessEq,
                           gen.ramp,
                           vn("ramp_up", g, t)});
                p.add_row({{{l.P(g, t - 1), 1.0}, {l.P(g, t), -1.0}},
                           opt::Sense::LessEq,
                           gen.ramp,
                           vn("ramp_dn", g, t)});
            }
            if (cfg.enable_min_updown && t > 0) {
                for (int tau = t + 1; tau < std::min(l.nt, t + gen.min_up); ++tau)
                    p.add_row({{{l.x(g, tau), 1.0}, {l.x(g, t), -1.0}, {l.x(g, t - 1), 1.0}},
                               opt::Sense::GreaterEq,
                               0.0,
                               vn(("up" + std::to_string(tau)).c_str(), g, t)});
                for (int tau = t + 1; tau < std::min(l.nt, t + gen.min_down); ++tau)
                    p.add_row({{{l.x(g, tau), 1.0}, {l.x(g, t), -1.0}, {l.x(g, t - 1), 1.0}},
                               opt::Sense::LessEq,
                               1.0,
                               vn(("dn" + std::to_string(tau)).c_str(), g, t)});
            }
        }

        opt::Row bal;
        bal.name = hn("balance", t);
        bal.sense = opt::Sense::Equal;
        bal.rhs = net.total_demand(t);
        for (int g = 0; g < l.ng; ++g) bal.coeffs.emplace_back(l.P(g, t), 1.0);
        for (int c = 0; c < l.nc; ++c)
            bal.coeffs.emplace_back(l.alpha(c, t), net.ibrs[static_cast<std::size_t>(c)].capacity);
        bal.coeffs.emplace_back(l.shed(t), 1.0);
        p.add_row(std::move(bal));

        if (l.has_eta && !restricted) {
            for (int m = 0; m < l.npairs; ++m) {
                int g1 = pairs[static_cast<std::size_t>(m)].first;
                int g2 = pairs[static_cast<std::size_t>(m)].second;
                p.add_row({{{l.eta(m, t), 1.0}, {l.x(g1, t), -1.0}},
                           opt::Sense::LessEq,
                           0.0,
                           vn("eta_a", m, t)});
                p.add_row({{{l.eta(m, t), 1.0}, {l.x(g2, t), -1.0}},
                           opt::Sense::LessEq,
                           0.0,
                           vn("eta_b", m, t)});
                p.add_row({{{l.eta(m, t), 1.0}, {l.x(g1, t), -1.0}, {l.x(g2, t), -1.0}},
                           opt::Sense::GreaterEq,
                           -1.0,
                           vn("eta_c", m, t)});
            }
        }

        if (cfg.include_scc) {
            const auto& k = active_coeffs(coeffs, cfg);
            opt::Row scc;
            scc.name = hn("scc", t);
            scc.sense = opt::Sense::GreaterEq;
            scc.rhs = k.limit;
            for (int g = 0; g < l.ng; ++g)
                if (k.k_g[static_cast<std::size_t>(g)] != 0.0)
                    scc.coeffs.emplace_back(l.x(g, t), k.k_g[static_cast<std::size_t>(g)]);
            for (int c = 0; c < l.nc; ++c)
                if (k.k_c[static_cast<std::size_t>(c)] != 0.0)
                    scc.coeffs.emplace_back(l.alpha(c, t), k.k_c[static_cast<std::size_t>(c)]);
            if (l.has_eta)
                for (int m = 0; m < l.npairs; ++m)
                    if (k.k_m[static_cast<std::size_t>(m)] != 0.0)
                        scc.coeffs.emplace_back(l.eta(m, t), k.k_m[static_cast<std::size_t>(m)]);
            p.add_row(std::move(scc));
        }

        if (restricted) {
            const auto& xs = (*cfg.fixed_commitment)[static_cast<std::size_t>(t)];
            for (int g = 0; g < l.ng; ++g)
                p.add_row({{{l.x(g, t), 1.0}},
                           opt::Sense::Equal,
                           xs[static_cast<std::size_t>(g)],
                           vn("pin", g, t)});
        }
    }
    return p;
}

}  // namespace detail

/// SCC-constrained unit commitment MILP: commitment binaries, startup
/// variables, dispatch, IBR fractions, shed, and the linearized SCC row per
/// hour with pairwise eta terms.
inline opt::MixedProgram build_uc(const grid::NetworkCase& net,
                                  const std::map<int, fit::CoefficientSet>& coeffs,
                                  UcConfig cfg = {}) {
    cfg.variant = Variant::FullMilp;
    opt::MixedProgram mp;
    mp.lp = detail::build_lp(net, coeffs, cfg);
    const UcLayout l = UcLayout::make(net, cfg);
    for (int t = 0; t < l.nt; ++t)
        for (int g = 0; g < l.ng; ++g) mp.binary_vars.push_back(l.x(g, t));
    return mp;
}

/// Commitment binaries relaxed to [0,1]; the SCC rows drop the pairwise
/// terms entirely.
inline opt::LinearProgram build_dispatchable(const grid::NetworkCase& net,
                                             const std::map<int, fit::CoefficientSet>& coeffs,
                                             UcConfig cfg = {}) {
    cfg.variant = Variant::Dispatchable;
    return detail::build_lp(net, coeffs, cfg);
}

/// Commitment variables pinned to x* by named equality rows (duals are the
/// commitment prices; a pin the LP would satisfy anyway stays at dual zero);
/// eta pinned to x*_g1 x*_g2 through fixed bounds; full SCC rows retained.
inline opt::LinearProgram build_restricted(const grid::NetworkCase& net,
                                           const std::map<int, fit::CoefficientSet>& coeffs,
                                           UcConfig cfg) {
    cfg.variant = Variant::Restricted;
    return detail::build_lp(net, coeffs, cfg);
}

// ---------------------------------------------------------------------------
// Solution extraction and export
// ---------------------------------------------------------------------------

struct UcSolution {
    std::vector<std::vector<double>> commitment;  // [t][g]
    std::vector<std::vector<double>> startup;     // [t][g]
    std::vector<std::vector<double>> dispatch;    // [t][g] MW
    std::vector<std::vector<double>> alpha;       // [t][c]
    std::vector<double> shed;                     // [t] MW
    double objective = 0.0;
    std::vector<double> duals;                    // aligned with row_names
    std::vector<std::string> row_names;
    std::map<std::string, int> row_index;

    double dual(const std::string& name) const {
        auto it = row_index.find(name);
        if (it == row_index.end()) throw ValidationError("no row named " + name);
        return duals[static_cast<std::size_t>(it->second)];
    }
};

inline UcSolution extract_solution(const grid::NetworkCase& net, const UcConfig& cfg,
                                   const opt::LinearProgram& p, const opt::LpSolution& sol) {
    if (sol.status != opt::LpStatus::Optimal)
        throw InfeasibleError("cannot extract a non-optimal UC solution");
    const UcLayout l = UcLayout::make(net, cfg);
    UcSolution u;
    u.objective = sol.objective;
    u.commitment.assign(static_cast<std::size_t>(l.nt), {});
    u.startup.assign(static_cast<std::size_t>(l.nt), {});
    u.dispatch.assign(static_cast<std::size_t>(l.nt), {});
    u.alpha.assign(static_cast<std::size_t>(l.nt), {});
    u.shed.assign(static_cast<std::size_t>(l.nt), 0.0);
    double cost = 0.0;
    for (int t = 0; t < l.nt; ++t) {
        double gen_sum = 0.0;
        for (int g = 0; g < l.ng; ++g) {
            const auto& gen = net.gens[static_cast<std::size_t>(g)];
            double x = sol.x[static_cast<std::size_t>(l.x(g, t))];
            double s = sol.x[static_cast<std::size_t>(l.s(g, t))];
            double P = sol.x[static_cast<std::size_t>(l.P(g, t))];
            u.commitment[static_cast<std::size_t>(t)].push_back(x);
            u.startup[static_cast<std::size_t>(t)].push_back(s);
            u.dispatch[static_cast<std::size_t>(t)].push_back(P);
            cost += gen.cost_noload * x + gen.cost_startup * s + gen.cost_marginal * P;
            gen_sum += P;
        }
        for (int c = 0; c < l.nc; ++c) {
            double a = sol.x[static_cast<std::size_t>(l.alpha(c, t))];
            u.alpha[static_cast<std::size_t>(t)].push_back(a);
            gen_sum += a * net.ibrs[static_cast<std::size_t>(c)].capacity;
        }
        double shed = sol.x[static_cast<std::size_t>(l.shed(t))];
        u.shed[static_cast<std::size_t>(t)] = shed;
        cost += net.shed_cost * shed;
        double demand = net.total_demand(t);
        if (shed < -1e-9 || shed > demand + 1e-6)
            throw Error("shed outside [0, demand] at hour " + std::to_string(t));
        if (std::abs(gen_sum + shed - demand) > 1e-6)
            throw Error("power balance violated by " + fmt_double(gen_sum + shed - demand) +
                        " MW at hour " + std::to_string(t));
    }
    if (std::abs(cost - sol.objective) > 1e-6 * (1.0 + std::abs(cost)))
        throw Error("objective does not match the re-evaluated cost expression");
    u.duals = sol.duals;
    for (const auto& r : p.rows) u.row_names.push_back(r.name);
    for (std::size_t i = 0; i < p.rows.size(); ++i)
        u.row_index[p.rows[i].name] = static_cast<int>(i);
    return u;
}

/// Per-hour CSV: commitment bits, dispatch, alpha, shed, the linearized SCC
/// value and the exact SCC recomputed from the grid at the (rounded)
/// commitment.
inline void write_solution_csv(const std::string& path, const UcSolution& u,
                               const grid::SccEngine& engine, const fit::CoefficientSet& k) {
    const grid::NetworkCase& net = engine.network();
    CsvWriter out(path);
    std::vector<std::string> header{"hour"};
    for (int g = 0; g < net.num_gens(); ++g) header.push_back("x" + std::to_string(g));
    for (int g = 0; g < net.num_gens(); ++g) header.push_back("P" + std::to_string(g));
    for (int c = 0; c < net.num_ibrs(); ++c) header.push_back("alpha" + std::to_string(c));
    header.emplace_back("shed");
    header.emplace_back("scc_linear");
    header.emplace_back("scc_exact");
    out.row(header);
    for (std::size_t t = 0; t < u.commitment.size(); ++t) {
        std::vector<std::string> row{std::to_string(t)};
        grid::Commitment rounded;
        for (double x : u.commitment[t]) {
            row.push_back(fmt_double(x));
            rounded.push_back(x >= 0.5 ? 1 : 0);
        }
        for (double P : u.dispatch[t]) row.push_back(fmt_double(P));
        for (double a : u.alpha[t]) row.push_back(fmt_double(a));
        row.push_back(fmt_double(u.shed[t]));
        row.push_back(fmt_double(fit::linearized_scc(k, rounded, u.alpha[t])));
        row.push_back(fmt_double(engine.compute_scc(rounded, u.alpha[t], k.sink)));
        out.row(row);
    }
}

}  // namespace sccprice::uc
