#pragma once

#include <map>
#include <string>
#include <thread>
#include <vector>

#include "sccprice/common.hpp"
#include "sccprice/csv.hpp"
#include "sccprice/network.hpp"
#include "sccprice/scc.hpp"

namespace sccprice::fit {

/// One training scenario: a commitment pattern, per-IBR output fractions and
/// the exact short-circuit current per sink of interest.
struct ScenarioSample {
    grid::Commitment commitment;
    std::vector<double> alpha;
    std::map<int, double> scc;
};

/// Every nonzero commitment pattern crossed with every alpha-grid value
/// (applied uniformly to all IBRs), with the exact SCC evaluated at each
/// requested sink. Sinks default to the case's SCC-limited buses. `jobs`
/// splits the SCC evaluation across threads; the output order is fixed by
/// (commitment bitmask, grid index) regardless of parallelism. With
/// `per_ibr_alpha` each IBR reads the grid at its own rotated offset, so the
/// per-IBR fractions vary independently across samples (they are collinear
/// under the uniform default, which leaves the per-IBR split of the fitted
/// k_c undetermined); the sample count is unchanged.
inline std::vector<ScenarioSample> enumerate_scenarios(const grid::SccEngine& engine,
                                                       const std::vector<double>& alpha_grid,
                                                       std::vector<int> sinks = {},
                                                       int jobs = 1, bool per_ibr_alpha = false) {
    const grid::NetworkCase& net = engine.network();
    if (alpha_grid.empty()) throw ValidationError("alpha grid must be nonempty");
    for (double a : alpha_grid)
        if (a < 0.0 || a > 1.0) throw ValidationError("alpha grid values must lie in [0,1]");
    if (sinks.empty())
        for (const auto& [bus, lim] : net.scc_limits) sinks.push_back(bus);
    const int ng = net.num_gens();
    const int nc = net.num_ibrs();
    if (ng <= 0) throw ValidationError("scenario enumeration needs at least one SG");
    if (ng > 20) throw ValidationError("scenario enumeration supports at most 20 SGs");

    const std::uint64_t patterns = (std::uint64_t{1} << ng) - 1;  // skip all-off
    const std::size_t total = static_cast<std::size_t>(patterns) * alpha_grid.size();
    std::vector<ScenarioSample> samples(total);

    auto fill = [&](std::size_t idx) {
        const std::uint64_t mask = idx / alpha_grid.size() + 1;
        const std::size_t slot = idx % alpha_grid.size();
        ScenarioSample& s = samples[idx];
        s.commitment.assign(static_cast<std::size_t>(ng), 0);
        for (int g = 0; g < ng; ++g)
            if (mask & (std::uint64_t{1} << g)) s.commitment[static_cast<std::size_t>(g)] = 1;
        s.alpha.assign(static_cast<std::size_t>(nc), alpha_grid[slot]);
        if (per_ibr_alpha)
            for (int c = 1; c < nc; ++c)
                s.alpha[static_cast<std::size_t>(c)] =
                    alpha_grid[(slot + static_cast<std::size_t>(c)) % alpha_grid.size()];
        for (int sink : sinks) s.scc[sink] = engine.compute_scc(s.commitment, s.alpha, sink);
    };

    if (jobs <= 1) {
        for (std::size_t i = 0; i < total; ++i) fill(i);
    } else {
        // Contiguous stripes keep all alpha values of one commitment in the
        // same thread, so each Z inversion happens once.
        std::vector<std::thread> pool;
        const std::size_t nthreads = static_cast<std::size_t>(jobs);
        const std::size_t chunk = (total + nthreads - 1) / nthreads;
        for (std::size_t t = 0; t < nthreads; ++t) {
            std::size_t lo = t * chunk;
            std::size_t hi = std::min(total, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&fill, lo, hi] {
                for (std::size_t i = lo; i < hi; ++i) fill(i);
            });
        }
        for (auto& th : pool) th.join();
    }
    return samples;
}

inline void write_scenarios_csv(const std::string& path,
                                const std::vector<ScenarioSample>& samples,
                                const grid::NetworkCase& net) {
    CsvWriter out(path);
    std::vector<int> sinks;
    if (!samples.empty())
        for (const auto& [sink, v] : samples.front().scc) sinks.push_back(sink);
    std::vector<std::string> header;
    for (int g = 0; g < net.num_gens(); ++g) header.push_back("x" + std::to_string(g));
    for (int c = 0; c < net.num_ibrs(); ++c) header.push_back("alpha" + std::to_string(c));
    for (int sink : sinks) header.push_back("scc" + std::to_string(sink));
    out.row(header);
    for (const auto& s : samples) {
        std::vector<std::string> row;
        for (int b : s.commitment) row.push_back(std::to_string(b));
        for (double a : s.alpha) row.push_back(fmt_double(a));
        for (int sink : sinks) row.push_back(fmt_double(s.scc.at(sink)));
        out.row(row);
    }
}

inline std::vector<ScenarioSample> read_scenarios_csv(const std::string& path) {
    auto rows = read_csv(path);
    if (rows.empty()) throw ParseError("scenario CSV is empty: " + path);
    const auto& header = rows.front();
    std::size_t ng = 0, nc = 0;
    std::vector<int> sinks;
    for (const auto& col : header) {
        if (col.rfind("x", 0) == 0 && col.size() > 1 && std::isdigit(col[1]))
            ++ng;
        else if (col.rfind("alpha", 0) == 0)
            ++nc;
        else if (col.rfind("scc", 0) == 0)
            sinks.push_back(std::stoi(col.substr(3)));
        else
            throw ParseError("unrecognized scenario CSV column: " + col);
    }
    std::vector<ScenarioSample> samples;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != ng + nc + sinks.size())
            throw ParseError("scenario CSV row has wrong field count");
        ScenarioSample s;
        std::size_t f = 0;
        for (std::size_t g = 0; g < ng; ++g)
            s.commitment.push_back(static_cast<int>(csv_to_double(row[f++])));
        for (std::size_t c = 0; c < nc; ++c) s.alpha.push_back(csv_to_double(row[f++]));
        for (int sink : sinks) s.scc[sink] = csv_to_double(row[f++]);
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace sccprice::fit
