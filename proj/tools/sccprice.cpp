#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sccprice/csv.hpp"
#include "sccprice/fit.hpp"
#include "sccprice/milp.hpp"
#include "sccprice/network.hpp"
#include "sccprice/pricing.hpp"
#include "sccprice/scc.hpp"
#include "sccprice/scenarios.hpp"
#include "sccprice/uc.hpp"

namespace fs = std::filesystem;
using namespace sccprice;

namespace {

struct CommonOpts {
    std::string case_path;
    std::string out_dir;
    int jobs = 1;
    long seed = 0;
    bool plot_data = false;
};

std::string default_out_dir() {
    const char* env = std::getenv("SCCPRICE_OUT");
    return env && *env ? env : ".";
}

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--case", c.case_path, "network case JSON")->required();
    cmd->add_option("-o,--out", c.out_dir, "output directory (default: $SCCPRICE_OUT or .)");
    cmd->add_option("-j,--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed, "run identifier recorded in the manifest");
    cmd->add_flag("--plot-data", c.plot_data, "also write long-format CSVs for plotting");
}

fs::path prepare_out(const CommonOpts& c) {
    fs::path out = c.out_dir.empty() ? fs::path(default_out_dir()) : fs::path(c.out_dir);
    fs::create_directories(out);
    return out;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    std::ofstream f(path);
    if (!f) throw ParseError("cannot open for writing: " + path.string());
    f << j.dump(2) << '\n';
}

/// Every run drops a manifest next to its outputs naming the inputs, the
/// exact argv and the files written, so results stay attributable.
class Manifest {
public:
    Manifest(const std::string& command, const CommonOpts& c, int argc, char** argv) {
        j_["command"] = command;
        j_["case"] = c.case_path;
        j_["jobs"] = c.jobs;
        j_["seed"] = c.seed;
        j_["argv"] = std::vector<std::string>(argv, argv + argc);
        j_["outputs"] = nlohmann::json::array();
    }

    nlohmann::json& data() { return j_; }

    std::string file(const fs::path& out, const std::string& name) {
        j_["outputs"].push_back(name);
        return (out / name).string();
    }

    void write(const fs::path& out, const std::string& name) { write_json(out / name, j_); }

private:
    nlohmann::json j_;
};

grid::Commitment round_commitment(const std::vector<double>& xs) {
    grid::Commitment cm(xs.size());
    for (std::size_t g = 0; g < xs.size(); ++g) cm[g] = xs[g] >= 0.5 ? 1 : 0;
    return cm;
}

std::string sink_tag(int sink) { return "sink" + std::to_string(sink); }

fit::CoefficientSet load_coeffs_for(const grid::NetworkCase& net, const std::string& path) {
    auto k = fit::load_coefficients(path);
    if (k.k_g.size() != static_cast<std::size_t>(net.num_gens()) ||
        k.k_c.size() != static_cast<std::size_t>(net.num_ibrs()))
        throw ValidationError("coefficient file " + path + " does not match the case dimensions");
    return k;
}

// ---------------------------------------------------------------- fit

struct FitOpts {
    std::vector<int> sinks;
    std::vector<double> alpha_grid;
    std::vector<double> nu_grid;
    bool per_ibr_alpha = false;
};

int cmd_fit(const CommonOpts& c, const FitOpts& f, int argc, char** argv) {
    fs::path out = prepare_out(c);
    auto net = grid::load_case(c.case_path);
    grid::SccEngine engine(net);

    std::vector<int> sinks = f.sinks;
    if (sinks.empty())
        for (const auto& [bus, lim] : net.scc_limits) sinks.push_back(bus);
    if (sinks.empty()) throw ValidationError("case defines no SCC-limited buses; pass --sink");
    for (int sink : sinks)
        if (!net.scc_limits.count(sink))
            throw ValidationError("bus " + std::to_string(sink) + " has no SCC limit in the case");

    std::vector<double> agrid = f.alpha_grid;
    if (agrid.empty())
        for (int i = 1; i <= 10; ++i) agrid.push_back(0.1 * i);
    std::vector<double> ngrid = f.nu_grid.empty() ? fit::default_margin_grid() : f.nu_grid;

    auto samples = fit::enumerate_scenarios(engine, agrid, sinks, c.jobs, f.per_ibr_alpha);

    Manifest man("fit", c, argc, argv);
    man.data()["sinks"] = sinks;
    man.data()["alpha_grid"] = agrid;
    man.data()["per_ibr_alpha"] = f.per_ibr_alpha;
    man.data()["nu_grid"] = ngrid;
    man.data()["scenarios"] = samples.size();

    CsvWriter errors(man.file(out, "fit_errors.csv"));
    errors.row({"sink", "limit", "nu", "scenarios", "omega1", "omega2", "omega3", "type1_count",
                "type1_err", "type2_count", "type2_err"});
    for (int sink : sinks) {
        double limit = net.scc_limits.at(sink);
        double nu = fit::select_margin(samples, sink, limit, ngrid);
        auto k = fit::fit_coefficients(samples, sink, limit, nu);
        fit::save_coefficients(man.file(out, "coeffs_" + sink_tag(sink) + ".json"), k);

        auto part = fit::partition_omega(samples, sink, limit, nu);
        auto st = fit::classify_errors(samples, k, limit);
        errors.row({std::to_string(sink), fmt_double(limit), fmt_double(nu),
                    std::to_string(samples.size()), std::to_string(part.omega1.size()),
                    std::to_string(part.omega2.size()), std::to_string(part.omega3.size()),
                    std::to_string(st.type1_count), fmt_double(st.type1_err),
                    std::to_string(st.type2_count), fmt_double(st.type2_err)});

        CsvWriter series(man.file(out, "fit_series_" + sink_tag(sink) + ".csv"));
        series.row({"scenario", "observed", "linearized"});
        for (std::size_t i = 0; i < samples.size(); ++i)
            series.row({std::to_string(i), fmt_double(samples[i].scc.at(sink)),
                        fmt_double(fit::linearized_scc(k, samples[i].commitment, samples[i].alpha))});
    }
    man.write(out, "manifest_fit.json");
    return 0;
}

// ---------------------------------------------------------------- uc

struct UcOpts {
    std::string coeffs_path;
    bool unconstrained = false;
    long node_budget = 0;
};

int cmd_uc(const CommonOpts& c, const UcOpts& u, int argc, char** argv) {
    fs::path out = prepare_out(c);
    auto net = grid::load_case(c.case_path);
    grid::SccEngine engine(net);
    auto k = load_coeffs_for(net, u.coeffs_path);
    std::map<int, fit::CoefficientSet> coeffs{{k.sink, k}};

    uc::UcConfig cfg;
    cfg.active_sink = k.sink;
    opt::MilpOptions mo;
    if (u.node_budget > 0) mo.node_budget = u.node_budget;

    Manifest man("uc", c, argc, argv);
    man.data()["coeffs"] = u.coeffs_path;
    man.data()["sink"] = k.sink;

    std::optional<uc::UcSolution> off;
    if (u.unconstrained) {
        uc::UcConfig off_cfg = cfg;
        off_cfg.include_scc = false;
        auto mp_off = uc::build_uc(net, coeffs, off_cfg);
        off = uc::extract_solution(net, off_cfg, mp_off.lp, opt::solve_milp(mp_off, mo));
    }

    auto mp = uc::build_uc(net, coeffs, cfg);
    if (off) {
        // The unconstrained commitment seeds the constrained search; the two
        // layouts differ (pair variables), so map the x entries across.
        auto l = uc::UcLayout::make(net, cfg);
        std::vector<double> hint(static_cast<std::size_t>(mp.lp.num_vars), 0.0);
        for (int t = 0; t < net.horizon; ++t)
            for (int g = 0; g < net.num_gens(); ++g)
                hint[static_cast<std::size_t>(l.x(g, t))] = off->commitment[t][g];
        mo.hint = std::move(hint);
    }
    auto ucsol = uc::extract_solution(net, cfg, mp.lp, opt::solve_milp(mp, mo));
    uc::write_solution_csv(man.file(out, "uc_constrained.csv"), ucsol, engine, k);

    nlohmann::json summary;
    summary["sink"] = k.sink;
    summary["scc_limit"] = k.limit;
    summary["objective"] = ucsol.objective;
    double shed_total = 0.0;
    for (double s : ucsol.shed) shed_total += s;
    summary["shed_total"] = shed_total;

    if (off) {
        uc::write_solution_csv(man.file(out, "uc_unconstrained.csv"), *off, engine, k);
        summary["objective_unconstrained"] = off->objective;

        CsvWriter series(man.file(out, "uc_scc_series.csv"));
        series.row({"hour", "limit", "scc_unconstrained", "scc_constrained", "commitment_changed"});
        std::optional<CsvWriter> plot;
        if (c.plot_data) {
            plot.emplace(man.file(out, "plot_uc_scc.csv"));
            plot->row({"hour", "series", "value"});
        }
        for (int t = 0; t < net.horizon; ++t) {
            auto cm_off = round_commitment(off->commitment[static_cast<std::size_t>(t)]);
            auto cm_on = round_commitment(ucsol.commitment[static_cast<std::size_t>(t)]);
            double scc_off =
                engine.compute_scc(cm_off, off->alpha[static_cast<std::size_t>(t)], k.sink);
            double scc_on =
                engine.compute_scc(cm_on, ucsol.alpha[static_cast<std::size_t>(t)], k.sink);
            series.row({std::to_string(t), fmt_double(k.limit), fmt_double(scc_off),
                        fmt_double(scc_on), cm_off == cm_on ? "0" : "1"});
            if (plot) {
                plot->row({std::to_string(t), "limit", fmt_double(k.limit)});
                plot->row({std::to_string(t), "unconstrained", fmt_double(scc_off)});
                plot->row({std::to_string(t), "constrained", fmt_double(scc_on)});
            }
        }
    }

    write_json(fs::path(man.file(out, "uc_summary.json")), summary);
    man.write(out, "manifest_uc.json");
    return 0;
}

// ---------------------------------------------------------------- price

struct PriceOpts {
    std::string coeffs_path;
    std::string method;
    bool no_zero_pairs = false;
    long node_budget = 0;
};

void write_price_long_csv(const std::string& path, const pricing::PriceReport& r) {
    CsvWriter w(path);
    w.row({"hour", "series", "value"});
    for (std::size_t t = 0; t < r.sink_price.size(); ++t) {
        w.row({std::to_string(t), "sink_price", fmt_double(r.sink_price[t])});
        if (!r.source_price.empty())
            for (std::size_t e = 0; e < r.source_names.size(); ++e)
                w.row({std::to_string(t), "price_" + r.source_names[e],
                       fmt_double(r.source_price[t][e])});
        if (!r.lambda_commit.empty())
            for (std::size_t g = 0; g < r.lambda_commit[t].size(); ++g)
                w.row({std::to_string(t), "commit_SG" + std::to_string(g),
                       fmt_double(r.lambda_commit[t][g])});
    }
}

pricing::PriceReport run_method(const grid::NetworkCase& net, const grid::SccEngine& engine,
                                const fit::CoefficientSet& k, const std::string& method,
                                const opt::MilpOptions& mo, int jobs, bool zero_pairs) {
    std::map<int, fit::CoefficientSet> coeffs{{k.sink, k}};
    uc::UcConfig cfg;
    cfg.active_sink = k.sink;
    if (method == "dispatchable") return pricing::price_dispatchable(engine, coeffs, cfg);
    if (method == "restricted") return pricing::price_restricted(net, coeffs, cfg, mo);
    if (method == "marginal") {
        pricing::MarginalOptions po;
        po.jobs = jobs;
        po.zero_pairs = zero_pairs;
        po.milp = mo;
        return pricing::price_marginal_unit(net, coeffs, cfg, po);
    }
    throw ValidationError("unknown pricing method: " + method);
}

void write_method_outputs(Manifest& man, const fs::path& out, const pricing::PriceReport& r,
                          bool plot_data) {
    std::string tag = sink_tag(r.sink);
    if (r.method == "marginal") {
        pricing::write_unit_price_csv(man.file(out, "unit_price_" + tag + ".csv"), r);
    } else {
        pricing::write_price_csv(man.file(out, "price_" + r.method + "_" + tag + ".csv"), r);
        if (r.method == "dispatchable") {
            auto m = pricing::payments_table({r});
            pricing::write_payment_matrix_csv(man.file(out, "payments_" + tag + ".csv"), m);
        }
        if (plot_data)
            write_price_long_csv(man.file(out, "plot_price_" + r.method + "_" + tag + ".csv"), r);
    }
    write_json(fs::path(man.file(out, "price_" + r.method + "_" + tag + "_summary.json")),
               pricing::report_summary_json(r));
}

int cmd_price(const CommonOpts& c, const PriceOpts& p, int argc, char** argv) {
    fs::path out = prepare_out(c);
    auto net = grid::load_case(c.case_path);
    grid::SccEngine engine(net);
    auto k = load_coeffs_for(net, p.coeffs_path);
    opt::MilpOptions mo;
    if (p.node_budget > 0) mo.node_budget = p.node_budget;

    Manifest man("price", c, argc, argv);
    man.data()["coeffs"] = p.coeffs_path;
    man.data()["sink"] = k.sink;
    man.data()["method"] = p.method;

    auto r = run_method(net, engine, k, p.method, mo, c.jobs, !p.no_zero_pairs);
    write_method_outputs(man, out, r, c.plot_data);
    man.write(out, "manifest_price.json");
    return 0;
}

// ---------------------------------------------------------------- report

struct ReportOpts {
    std::vector<std::string> coeffs_paths;
    bool no_zero_pairs = false;
    long node_budget = 0;
};

int cmd_report(const CommonOpts& c, const ReportOpts& ro, int argc, char** argv) {
    fs::path out = prepare_out(c);
    auto net = grid::load_case(c.case_path);
    grid::SccEngine engine(net);
    opt::MilpOptions mo;
    if (ro.node_budget > 0) mo.node_budget = ro.node_budget;

    std::vector<fit::CoefficientSet> ks;
    for (const auto& path : ro.coeffs_paths) {
        auto k = load_coeffs_for(net, path);
        for (const auto& prev : ks)
            if (prev.sink == k.sink)
                throw ValidationError("duplicate coefficient set for sink " +
                                      std::to_string(k.sink));
        ks.push_back(std::move(k));
    }

    Manifest man("report", c, argc, argv);
    man.data()["coeffs"] = ro.coeffs_paths;

    nlohmann::json per_sink = nlohmann::json::object();
    std::vector<pricing::PriceReport> dispatchable;
    for (const auto& k : ks) {
        nlohmann::json entry;
        for (const char* method : {"dispatchable", "restricted", "marginal"}) {
            auto r = run_method(net, engine, k, method, mo, c.jobs, !ro.no_zero_pairs);
            write_method_outputs(man, out, r, c.plot_data);
            entry[method] = pricing::report_summary_json(r);
            if (r.method == "dispatchable") dispatchable.push_back(std::move(r));
        }
        per_sink[std::to_string(k.sink)] = entry;
    }

    nlohmann::json summary;
    summary["case"] = c.case_path;
    summary["per_sink"] = per_sink;
    auto m = pricing::payments_table(dispatchable);
    pricing::write_payment_matrix_csv(man.file(out, "payments_matrix.csv"), m);
    summary["payment_sinks"] = m.sinks;
    write_json(fs::path(man.file(out, "report_summary.json")), summary);
    man.write(out, "manifest_report.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"short-circuit current pricing toolkit"};
    app.require_subcommand(1);

    CommonOpts c;
    FitOpts fo;
    UcOpts uo;
    PriceOpts po;
    ReportOpts ro;
    int rc = 0;

    auto* fit_cmd = app.add_subcommand("fit", "fit SCC coefficients from exhaustive scenarios");
    add_common(fit_cmd, c);
    fit_cmd->add_option("--sink", fo.sinks, "sink buses (default: every SCC-limited bus)");
    fit_cmd->add_option("--alpha-grid", fo.alpha_grid, "IBR output fractions (default: 0.1..1.0)")
        ->delimiter(',');
    fit_cmd->add_option("--nu-grid", fo.nu_grid, "candidate margins (default: 0,0.1,..,2.0)")
        ->delimiter(',');
    fit_cmd->add_flag("--per-ibr-alpha", fo.per_ibr_alpha,
                      "rotate the alpha grid per IBR so per-IBR coefficients are identified");
    fit_cmd->callback([&] { rc = cmd_fit(c, fo, argc, argv); });

    auto* uc_cmd = app.add_subcommand("uc", "solve the SCC-constrained commitment problem");
    add_common(uc_cmd, c);
    uc_cmd->add_option("--coeffs", uo.coeffs_path, "fitted coefficient JSON")->required();
    uc_cmd->add_flag("--unconstrained", uo.unconstrained,
                     "also solve without the SCC constraint and compare");
    uc_cmd->add_option("--node-budget", uo.node_budget, "branch and bound node budget");
    uc_cmd->callback([&] { rc = cmd_uc(c, uo, argc, argv); });

    auto* price_cmd = app.add_subcommand("price", "extract SCC prices from a solved day");
    add_common(price_cmd, c);
    price_cmd->add_option("--coeffs", po.coeffs_path, "fitted coefficient JSON")->required();
    price_cmd->add_option("--method", po.method, "dispatchable, restricted or marginal")
        ->required()
        ->check(CLI::IsMember({"dispatchable", "restricted", "marginal"}));
    price_cmd->add_flag("--no-zero-pairs", po.no_zero_pairs,
                        "keep pair terms when zeroing a source's contribution");
    price_cmd->add_option("--node-budget", po.node_budget, "branch and bound node budget");
    price_cmd->callback([&] { rc = cmd_price(c, po, argc, argv); });

    auto* report_cmd = app.add_subcommand("report", "run every pricing method for every sink");
    add_common(report_cmd, c);
    report_cmd->add_option("--coeffs", ro.coeffs_paths, "fitted coefficient JSON, one per sink")
        ->required();
    report_cmd->add_flag("--no-zero-pairs", ro.no_zero_pairs,
                         "keep pair terms when zeroing a source's contribution");
    report_cmd->add_option("--node-budget", ro.node_budget, "branch and bound node budget");
    report_cmd->callback([&] { rc = cmd_report(c, ro, argc, argv); });

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            int code = app.exit(e);
            return code == 0 ? 0 : 2;
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const SingularMatrixError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const InfeasibleError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const BudgetError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return rc;
}
