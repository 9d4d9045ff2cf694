#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sccprice/csv.hpp"
#include "sccprice/milp.hpp"
#include "sccprice/scc.hpp"
#include "sccprice/uc.hpp"

namespace sccprice::pricing {

struct PriceReport {
    std::string method;
    int sink = -1;
    std::vector<std::string> source_names;
    std::vector<double> sink_price;                   // per hour
    std::vector<std::vector<double>> source_price;    // [hour][source]
    std::vector<std::vector<double>> source_payment;  // [hour][source]
    std::vector<std::vector<double>> lambda_commit;   // [hour][gen]
    double commit_price_max = 0.0;
    double commit_price_median = 0.0;
    double commit_volatility = 0.0;
    std::vector<double> unit_price;        // per source
    std::vector<double> source_objective;  // per source
    double base_objective = 0.0;
    std::vector<bool> hour_degenerate;
    std::vector<std::string> flags;
    uc::UcSolution base;
};

inline std::vector<std::string> source_names(const grid::NetworkCase& net) {
    std::vector<std::string> names;
    for (int g = 0; g < net.num_gens(); ++g) names.push_back("SG" + std::to_string(g));
    for (int c = 0; c < net.num_ibrs(); ++c) names.push_back("IBR" + std::to_string(c));
    return names;
}

namespace detail {

inline void require_scc(const uc::UcConfig& cfg) {
    if (!cfg.include_scc) throw ValidationError("pricing requires the SCC constraint enabled");
}

/// Splits one hour's sink price over the online sources by their normalized
/// |Z_FE I_E| contribution, fractional commitments scaling their own weight.
/// Also evaluates the per-source payment p (|Z_FE|/|Z_FF|) I_E.
inline void allocate_hour(const grid::SccEngine& engine, const uc::UcSolution& u, int sink,
                          int t, double price, std::vector<double>& out_price,
                          std::vector<double>& out_payment) {
    const auto& net = engine.network();
    const auto& x = u.commitment[static_cast<std::size_t>(t)];
    const auto& a = u.alpha[static_cast<std::size_t>(t)];
    const int ng = net.num_gens(), nc = net.num_ibrs();
    out_price.assign(static_cast<std::size_t>(ng + nc), 0.0);
    out_payment.assign(static_cast<std::size_t>(ng + nc), 0.0);
    if (price == 0.0) return;

    grid::Commitment support;
    for (double v : x) support.push_back(v > 1e-9 ? 1 : 0);
    auto w = engine.z_row_weights(support, sink);
    std::vector<double> weight(static_cast<std::size_t>(ng + nc), 0.0);
    double total = 0.0;
    for (int g = 0; g < ng; ++g) {
        weight[static_cast<std::size_t>(g)] =
            x[static_cast<std::size_t>(g)] * std::abs(w.gen_terms[static_cast<std::size_t>(g)]);
        total += weight[static_cast<std::size_t>(g)];
    }
    for (int c = 0; c < nc; ++c) {
        weight[static_cast<std::size_t>(ng + c)] =
            a[static_cast<std::size_t>(c)] * std::abs(w.ibr_terms[static_cast<std::size_t>(c)]);
        total += weight[static_cast<std::size_t>(ng + c)];
    }
    if (total <= 0.0) throw Error("no online source to carry a nonzero SCC price");
    double zff = std::abs(w.z_ff);
    double check = 0.0;
    for (int e = 0; e < ng + nc; ++e) {
        double p = price * weight[static_cast<std::size_t>(e)] / total;
        out_price[static_cast<std::size_t>(e)] = p;
        out_payment[static_cast<std::size_t>(e)] = p * weight[static_cast<std::size_t>(e)] / zff;
        check += p;
    }
    if (std::abs(check - price) > 1e-9 * (1.0 + std::abs(price)))
        throw Error("source prices fail to add up to the sink price");
}

inline void check_complementarity(const opt::LinearProgram& lp, const opt::LpSolution& sol,
                                  int row, double price) {
    double surplus = sol.row_activity[static_cast<std::size_t>(row)] -
                     lp.rows[static_cast<std::size_t>(row)].rhs;
    if (surplus > 1e-8 && std::abs(price) > 1e-8)
        throw Error("nonzero price on a slack SCC row at " + lp.rows[static_cast<std::size_t>(row)].name);
}

}  // namespace detail

/// Prices from the relaxed-commitment LP: the sink price is each hour's SCC
/// row dual, split over sources by contribution weight.
inline PriceReport price_dispatchable(const grid::SccEngine& engine,
                                      const std::map<int, fit::CoefficientSet>& coeffs,
                                      uc::UcConfig cfg) {
    detail::require_scc(cfg);
    const auto& net = engine.network();
    auto lp = uc::build_dispatchable(net, coeffs, cfg);
    auto sol = opt::solve_lp(lp);
    if (sol.status != opt::LpStatus::Optimal)
        throw InfeasibleError("dispatchable pricing LP did not solve to optimality");
    cfg.variant = uc::Variant::Dispatchable;
    PriceReport r;
    r.method = "dispatchable";
    r.sink = cfg.active_sink;
    r.source_names = source_names(net);
    r.base_objective = sol.objective;
    r.base = uc::extract_solution(net, cfg, lp, sol);
    for (int t = 0; t < net.horizon; ++t) {
        int row = lp.row_index(uc::detail::hn("scc", t));
        double price = sol.duals[static_cast<std::size_t>(row)];
        detail::check_complementarity(lp, sol, row, price);
        r.sink_price.push_back(price);
        r.hour_degenerate.push_back(sol.row_degenerate[static_cast<std::size_t>(row)] ||
                                    sol.dual_degenerate);
        std::vector<double> ps, pay;
        detail::allocate_hour(engine, r.base, cfg.active_sink, t, price, ps, pay);
        r.source_price.push_back(std::move(ps));
        r.source_payment.push_back(std::move(pay));
    }
    return r;
}

/// Prices from the LP pinned at the commitment optimum: SCC duals collapse
/// (discreteness carries the scarcity) and the pin duals surface as
/// per-gen commitment prices.
inline PriceReport price_restricted(const grid::NetworkCase& net,
                                    const std::map<int, fit::CoefficientSet>& coeffs,
                                    uc::UcConfig cfg, const opt::MilpOptions& mopts = {}) {
    detail::require_scc(cfg);
    PriceReport r;
    r.method = "restricted";
    r.sink = cfg.active_sink;
    r.source_names = source_names(net);
    if (!cfg.fixed_commitment) {
        uc::UcConfig mcfg = cfg;
        mcfg.variant = uc::Variant::FullMilp;
        auto mp = uc::build_uc(net, coeffs, mcfg);
        auto msol = opt::solve_milp(mp, mopts);
        if (msol.status != opt::LpStatus::Optimal)
            throw InfeasibleError("commitment problem infeasible; nothing to pin");
        cfg.fixed_commitment = uc::extract_solution(net, mcfg, mp.lp, msol).commitment;
    }
    auto lp = uc::build_restricted(net, coeffs, cfg);
    auto sol = opt::solve_lp(lp);
    if (sol.status != opt::LpStatus::Optimal)
        throw InfeasibleError("pinned commitment is infeasible");
    cfg.variant = uc::Variant::Restricted;
    r.base_objective = sol.objective;
    r.base = uc::extract_solution(net, cfg, lp, sol);
    std::vector<double> mags;
    for (int t = 0; t < net.horizon; ++t) {
        int row = lp.row_index(uc::detail::hn("scc", t));
        double price = sol.duals[static_cast<std::size_t>(row)];
        detail::check_complementarity(lp, sol, row, price);
        r.sink_price.push_back(price);
        r.hour_degenerate.push_back(sol.row_degenerate[static_cast<std::size_t>(row)] ||
                                    sol.dual_degenerate);
        std::vector<double> lc;
        for (int g = 0; g < net.num_gens(); ++g) {
            int pin = lp.row_index(uc::detail::vn("pin", g, t));
            lc.push_back(-sol.duals[static_cast<std::size_t>(pin)]);
            mags.push_back(std::abs(lc.back()));
        }
        r.lambda_commit.push_back(std::move(lc));
    }
    if (!mags.empty()) {
        r.commit_price_max = *std::max_element(mags.begin(), mags.end());
        std::nth_element(mags.begin(), mags.begin() + static_cast<long>(mags.size() / 2),
                         mags.end());
        r.commit_price_median = mags[mags.size() / 2];
        // Median floored so an all-but-spikes-zero series reads as maximally
        // volatile instead of dividing by zero.
        r.commit_volatility = r.commit_price_max / std::max(r.commit_price_median, 1e-12);
    }
    return r;
}

struct MarginalOptions {
    std::vector<int> sources;  // indices into source_names order; empty = all
    bool zero_pairs = true;    // also drop pairwise terms touching a removed SG
    int jobs = 1;
    opt::MilpOptions milp;
};

namespace detail {

/// Appends a priced relaxation variable to every SCC row so removing a large
/// source can never make the program infeasible, only expensive.
inline void make_scc_elastic(opt::MixedProgram& mp, const grid::NetworkCase& net) {
    for (auto& row : mp.lp.rows) {
        if (row.name.rfind("scc[", 0) != 0) continue;
        int v = mp.lp.add_variable("relax_" + row.name, 0.0, opt::kInf, net.shed_cost);
        row.coeffs.emplace_back(v, 1.0);
    }
}

}  // namespace detail

/// Unit price of each source: objective delta from re-solving the commitment
/// problem with that source's SCC coefficients zeroed.
inline PriceReport price_marginal_unit(const grid::NetworkCase& net,
                                       const std::map<int, fit::CoefficientSet>& coeffs,
                                       uc::UcConfig cfg, MarginalOptions opts = {}) {
    detail::require_scc(cfg);
    cfg.variant = uc::Variant::FullMilp;
    const int ng = net.num_gens(), nc = net.num_ibrs();
    if (opts.sources.empty())
        for (int e = 0; e < ng + nc; ++e) opts.sources.push_back(e);
    for (int e : opts.sources)
        if (e < 0 || e >= ng + nc) throw ValidationError("marginal source index out of range");

    auto mp = uc::build_uc(net, coeffs, cfg);
    auto base = opt::solve_milp(mp, opts.milp);
    if (base.status != opt::LpStatus::Optimal)
        throw InfeasibleError("base commitment problem infeasible");

    PriceReport r;
    r.method = "marginal";
    r.sink = cfg.active_sink;
    r.base_objective = base.objective;
    r.base = uc::extract_solution(net, cfg, mp.lp, base);
    auto names = source_names(net);
    for (int e : opts.sources) r.source_names.push_back(names[static_cast<std::size_t>(e)]);
    r.unit_price.assign(opts.sources.size(), 0.0);
    r.source_objective.assign(opts.sources.size(), 0.0);
    std::vector<std::string> flag_slots(opts.sources.size());

    const auto& kbase = coeffs.at(cfg.active_sink);
    auto pairs = fit::gen_pairs(ng);
    auto solve_one = [&](std::size_t slot) {
        int e = opts.sources[slot];
        auto k = kbase;
        bool changed = false;
        if (e < ng) {
            if (k.k_g[static_cast<std::size_t>(e)] != 0.0) {
                k.k_g[static_cast<std::size_t>(e)] = 0.0;
                changed = true;
            }
            if (opts.zero_pairs)
                for (std::size_t m = 0; m < pairs.size(); ++m)
                    if ((pairs[m].first == e || pairs[m].second == e) && k.k_m[m] != 0.0) {
                        k.k_m[m] = 0.0;
                        changed = true;
                    }
        } else if (k.k_c[static_cast<std::size_t>(e - ng)] != 0.0) {
            k.k_c[static_cast<std::size_t>(e - ng)] = 0.0;
            changed = true;
        }
        if (!changed) {  // identical program, no point re-solving
            r.source_objective[slot] = base.objective;
            return;
        }
        std::map<int, fit::CoefficientSet> kmap{{cfg.active_sink, k}};
        auto emp = uc::build_uc(net, kmap, cfg);
        auto os = opts.milp;
        os.hint = base.x;
        auto sol = opt::solve_milp(emp, os);
        if (sol.status != opt::LpStatus::Optimal) {
            detail::make_scc_elastic(emp, net);
            sol = opt::solve_milp(emp, opts.milp);
            if (sol.status != opt::LpStatus::Optimal)
                throw InfeasibleError("elastic re-solve failed for source " +
                                      names[static_cast<std::size_t>(e)]);
            flag_slots[slot] = "infeasible-absorbed:" + names[static_cast<std::size_t>(e)];
        }
        r.source_objective[slot] = sol.objective;
    };

    int jobs = std::max(1, opts.jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < opts.sources.size(); ++i) solve_one(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < opts.sources.size();
                     i = next.fetch_add(1))
                    solve_one(i);
            });
        for (auto& th : pool) th.join();
    }

    for (std::size_t i = 0; i < opts.sources.size(); ++i) {
        r.unit_price[i] = r.source_objective[i] - base.objective;
        if (r.unit_price[i] < -1e-6)
            throw Error("negative unit price for source " + r.source_names[i]);
        if (!flag_slots[i].empty()) r.flags.push_back(flag_slots[i]);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Aggregation and export
// ---------------------------------------------------------------------------

struct PaymentMatrix {
    std::vector<int> sinks;
    std::vector<std::string> sources;
    std::vector<std::vector<double>> mean_payment;  // [sink][source], currency/h
};

/// Table of average hourly payments, one row per priced sink.
inline PaymentMatrix payments_table(const std::vector<PriceReport>& reports) {
    PaymentMatrix m;
    for (const auto& r : reports) {
        if (r.source_payment.empty())
            throw ValidationError("payments_table needs dispatchable reports");
        if (m.sources.empty())
            m.sources = r.source_names;
        else if (m.sources != r.source_names)
            throw ValidationError("payment reports disagree on the source set");
        m.sinks.push_back(r.sink);
        std::vector<double> row(m.sources.size(), 0.0);
        for (const auto& hour : r.source_payment)
            for (std::size_t e = 0; e < row.size(); ++e) row[e] += hour[e];
        for (auto& v : row) v /= static_cast<double>(r.source_payment.size());
        m.mean_payment.push_back(std::move(row));
    }
    return m;
}

inline double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Hour-series CSV; the column set follows the method that produced the
/// report.
inline void write_price_csv(const std::string& path, const PriceReport& r) {
    CsvWriter out(path);
    std::vector<std::string> header{"hour", "sink_price", "degenerate"};
    if (!r.source_price.empty())
        for (const auto& n : r.source_names) header.push_back("price_" + n);
    if (!r.source_payment.empty())
        for (const auto& n : r.source_names) header.push_back("payment_" + n);
    if (!r.lambda_commit.empty())
        for (std::size_t g = 0; g < r.lambda_commit.front().size(); ++g)
            header.push_back("commit_SG" + std::to_string(g));
    out.row(header);
    for (std::size_t t = 0; t < r.sink_price.size(); ++t) {
        std::vector<std::string> row{std::to_string(t), fmt_double(r.sink_price[t]),
                                     r.hour_degenerate[t] ? "1" : "0"};
        if (!r.source_price.empty())
            for (double v : r.source_price[t]) row.push_back(fmt_double(v));
        if (!r.source_payment.empty())
            for (double v : r.source_payment[t]) row.push_back(fmt_double(v));
        if (!r.lambda_commit.empty())
            for (double v : r.lambda_commit[t]) row.push_back(fmt_double(v));
        out.row(row);
    }
}

/// Per-source CSV for the marginal-unit method.
inline void write_unit_price_csv(const std::string& path, const PriceReport& r) {
    CsvWriter out(path);
    out.row({"source", "unit_price", "objective", "base_objective"});
    for (std::size_t i = 0; i < r.source_names.size(); ++i)
        out.row({r.source_names[i], fmt_double(r.unit_price[i]),
                 fmt_double(r.source_objective[i]), fmt_double(r.base_objective)});
}

inline void write_payment_matrix_csv(const std::string& path, const PaymentMatrix& m) {
    CsvWriter out(path);
    std::vector<std::string> header{"sink"};
    for (const auto& s : m.sources) header.push_back(s);
    out.row(header);
    for (std::size_t i = 0; i < m.sinks.size(); ++i) {
        std::vector<std::string> row{std::to_string(m.sinks[i])};
        for (double v : m.mean_payment[i]) row.push_back(fmt_double(v));
        out.row(row);
    }
}

inline nlohmann::json report_summary_json(const PriceReport& r) {
    nlohmann::json j;
    j["method"] = r.method;
    j["sink"] = r.sink;
    j["base_objective"] = r.base_objective;
    j["flags"] = r.flags;
    if (!r.sink_price.empty()) j["mean_sink_price"] = mean(r.sink_price);
    if (!r.lambda_commit.empty()) {
        j["commit_price_max"] = r.commit_price_max;
        j["commit_price_median"] = r.commit_price_median;
        j["commit_volatility"] = r.commit_volatility;
    }
    if (!r.unit_price.empty()) {
        nlohmann::json u = nlohmann::json::object();
        for (std::size_t i = 0; i < r.source_names.size(); ++i)
            u[r.source_names[i]] = r.unit_price[i];
        j["unit_price"] = u;
    }
    return j;
}

}  // namespace sccprice::pricing
