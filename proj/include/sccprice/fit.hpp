#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sccprice/common.hpp"
#include "sccprice/qp.hpp"
#include "sccprice/scenarios.hpp"

namespace sccprice::fit {

/// Strict classification inequalities are realized as <= limit - eps.
inline constexpr double kStrictEps = 1e-6;

/// Linearized SCC coefficients for one sink: per-SG terms, per-IBR terms and
/// per-SG-pair product terms, plus the margin and limit they were fitted for.
struct CoefficientSet {
    int sink = 0;
    double limit = 0.0;
    double nu = 0.0;
    std::vector<double> k_g;
    std::vector<double> k_c;
    std::vector<double> k_m;  // ordered as gen_pairs()
};

struct ErrorStats {
    long type1_count = 0;
    long type2_count = 0;
    double type1_err = std::numeric_limits<double>::quiet_NaN();
    double type2_err = std::numeric_limits<double>::quiet_NaN();
};

struct OmegaPartition {
    std::vector<std::size_t> omega1;  // scc < limit
    std::vector<std::size_t> omega2;  // limit <= scc < limit + nu
    std::vector<std::size_t> omega3;  // limit + nu <= scc
};

inline std::vector<std::pair<int, int>> gen_pairs(int ng) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < ng; ++a)
        for (int b = a + 1; b < ng; ++b) pairs.emplace_back(a, b);
    return pairs;
}

inline double linearized_scc(const CoefficientSet& k, const grid::Commitment& commitment,
                             const std::vector<double>& alpha) {
    double v = 0.0;
    for (std::size_t g = 0; g < k.k_g.size(); ++g)
        v += k.k_g[g] * static_cast<double>(commitment[g]);
    for (std::size_t c = 0; c < k.k_c.size(); ++c) v += k.k_c[c] * alpha[c];
    auto pairs = gen_pairs(static_cast<int>(k.k_g.size()));
    for (std::size_t m = 0; m < pairs.size(); ++m)
        v += k.k_m[m] * static_cast<double>(commitment[static_cast<std::size_t>(pairs[m].first)] *
                                            commitment[static_cast<std::size_t>(pairs[m].second)]);
    return v;
}

inline OmegaPartition partition_omega(const std::vector<ScenarioSample>& samples, int sink,
                                      double limit, double nu) {
    if (nu < 0.0) throw ValidationError("margin nu must be nonnegative");
    OmegaPartition part;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double scc = samples[i].scc.at(sink);
        if (scc < limit)
            part.omega1.push_back(i);
        else if (scc < limit + nu)
            part.omega2.push_back(i);
        else
            part.omega3.push_back(i);
    }
    return part;
}

namespace detail {

inline Eigen::VectorXd design_row(const ScenarioSample& s, int ng, int nc,
                                  const std::vector<std::pair<int, int>>& pairs) {
    Eigen::VectorXd a(ng + nc + static_cast<int>(pairs.size()));
    for (int g = 0; g < ng; ++g) a(g) = static_cast<double>(s.commitment[static_cast<std::size_t>(g)]);
    for (int c = 0; c < nc; ++c) a(ng + c) = s.alpha[static_cast<std::size_t>(c)];
    for (std::size_t m = 0; m < pairs.size(); ++m)
        a(ng + nc + static_cast<int>(m)) =
            static_cast<double>(s.commitment[static_cast<std::size_t>(pairs[m].first)] *
                                s.commitment[static_cast<std::size_t>(pairs[m].second)]);
    return a;
}

/// Classification constraints G k <= h for the given partition.
inline void classification_rows(const std::vector<ScenarioSample>& samples,
                                const OmegaPartition& part, int sink, double limit, int ng, int nc,
                                const std::vector<std::pair<int, int>>& pairs, Eigen::MatrixXd& G,
                                Eigen::VectorXd& h) {
    (void)sink;
    const int p = ng + nc + static_cast<int>(pairs.size());
    G.resize(static_cast<int>(part.omega1.size() + part.omega3.size()), p);
    h.resize(G.rows());
    int r = 0;
    for (std::size_t i : part.omega1) {
        G.row(r) = design_row(samples[i], ng, nc, pairs).transpose();
        h(r) = limit - kStrictEps;
        ++r;
    }
    for (std::size_t i : part.omega3) {
        G.row(r) = -design_row(samples[i], ng, nc, pairs).transpose();
        h(r) = -limit;
        ++r;
    }
}

}  // namespace detail

/// Classification-constrained least squares: minimize the squared deviation
/// of the linearized SCC from the exact SCC over the margin band, subject to
/// every below-limit scenario staying strictly below and every above-band
/// scenario staying at or above the limit.
inline CoefficientSet fit_coefficients(const std::vector<ScenarioSample>& samples, int sink,
                                       double limit, double nu) {
    if (samples.empty()) throw ValidationError("fit requires at least one sample");
    const int ng = static_cast<int>(samples.front().commitment.size());
    const int nc = static_cast<int>(samples.front().alpha.size());
    const auto pairs = gen_pairs(ng);
    const int p = ng + nc + static_cast<int>(pairs.size());
    OmegaPartition part = partition_omega(samples, sink, limit, nu);

    Eigen::MatrixXd A(static_cast<int>(part.omega2.size()), p);
    Eigen::VectorXd b(A.rows());
    for (std::size_t q = 0; q < part.omega2.size(); ++q) {
        const ScenarioSample& s = samples[part.omega2[q]];
        A.row(static_cast<int>(q)) = detail::design_row(s, ng, nc, pairs).transpose();
        b(static_cast<int>(q)) = s.scc.at(sink);
    }
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
    detail::classification_rows(samples, part, sink, limit, ng, nc, pairs, G, h);

    opt::QpProblem qp{A, b, G, h};
    opt::QpSolution sol;
    try {
        sol = opt::solve_constrained_least_squares(qp);
    } catch (const InfeasibleError&) {
        throw InfeasibleError("classification constraints infeasible at nu = " + fmt_double(nu) +
                              " for sink " + std::to_string(sink) + "; raise the margin");
    }
    if (G.rows() > 0) {
        double viol = ((G * sol.x - h).array().max(0.0)).maxCoeff();
        if (viol > 1e-9)
            throw Error("fitted coefficients violate classification constraints by " +
                        fmt_double(viol));
    }

    CoefficientSet k;
    k.sink = sink;
    k.limit = limit;
    k.nu = nu;
    k.k_g.assign(sol.x.data(), sol.x.data() + ng);
    k.k_c.assign(sol.x.data() + ng, sol.x.data() + ng + nc);
    k.k_m.assign(sol.x.data() + ng + nc, sol.x.data() + p);
    return k;
}

/// Smallest grid margin whose classification constraints are feasible.
inline double select_margin(const std::vector<ScenarioSample>& samples, int sink, double limit,
                            const std::vector<double>& nu_grid) {
    if (samples.empty()) throw ValidationError("margin selection requires samples");
    const int ng = static_cast<int>(samples.front().commitment.size());
    const int nc = static_cast<int>(samples.front().alpha.size());
    if (nu_grid.empty()) throw ValidationError("margin grid must be nonempty");
    for (std::size_t i = 0; i < nu_grid.size(); ++i) {
        if (nu_grid[i] < 0.0) throw ValidationError("margins must be nonnegative");
        if (i > 0 && nu_grid[i] <= nu_grid[i - 1])
            throw ValidationError("margin grid must be strictly ascending");
    }
    const auto pairs = gen_pairs(ng);
    for (double nu : nu_grid) {
        OmegaPartition part = partition_omega(samples, sink, limit, nu);
        Eigen::MatrixXd G;
        Eigen::VectorXd h;
        detail::classification_rows(samples, part, sink, limit, ng, nc, pairs, G, h);
        if (opt::qp_feasible_point(G, h)) return nu;
    }
    throw InfeasibleError("no feasible margin up to nu = " + fmt_double(nu_grid.back()) +
                          " for sink " + std::to_string(sink));
}

inline std::vector<double> default_margin_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(0.1 * i);
    return grid;
}

inline ErrorStats classify_errors(const std::vector<ScenarioSample>& samples,
                                  const CoefficientSet& coeffs, double limit) {
    ErrorStats st;
    double sum1 = 0.0, sum2 = 0.0;
    // The fit pins many above-limit rows exactly onto the limit; a strict
    // comparison there would flip on rounding noise, so anything within 1e-9
    // of the limit counts as satisfied.
    const double tie = 1e-9 * (1.0 + std::abs(limit));
    for (const auto& s : samples) {
        double lin = linearized_scc(coeffs, s.commitment, s.alpha);
        double scc = s.scc.at(coeffs.sink);
        if (lin >= limit && scc < limit) {
            ++st.type1_count;
            sum1 += (lin - scc) / scc;
        } else if (lin < limit - tie && scc >= limit) {
            ++st.type2_count;
            sum2 += (lin - scc) / scc;
        }
    }
    if (st.type1_count > 0) st.type1_err = sum1 / static_cast<double>(st.type1_count);
    if (st.type2_count > 0) st.type2_err = sum2 / static_cast<double>(st.type2_count);
    return st;
}

// ---------------------------------------------------------------------------
// Coefficient file format: one JSON object per sink.
// ---------------------------------------------------------------------------

inline nlohmann::json coefficients_to_json(const CoefficientSet& k) {
    nlohmann::json j;
    j["sink"] = k.sink;
    j["limit"] = k.limit;
    j["nu"] = k.nu;
    j["k_g"] = k.k_g;
    j["k_c"] = k.k_c;
    j["k_m"] = k.k_m;
    auto pairs = gen_pairs(static_cast<int>(k.k_g.size()));
    nlohmann::json jp = nlohmann::json::array();
    for (auto [a, b] : pairs) jp.push_back({a, b});
    j["pairs"] = jp;
    return j;
}

inline CoefficientSet coefficients_from_json(const nlohmann::json& j) {
    CoefficientSet k;
    try {
        k.sink = j.at("sink").get<int>();
        k.limit = j.at("limit").get<double>();
        k.nu = j.at("nu").get<double>();
        k.k_g = j.at("k_g").get<std::vector<double>>();
        k.k_c = j.at("k_c").get<std::vector<double>>();
        k.k_m = j.at("k_m").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("coefficient JSON: ") + e.what());
    }
    const std::size_t ng = k.k_g.size();
    if (k.k_m.size() != ng * (ng - 1) / 2)
        throw ValidationError("coefficient JSON: k_m size does not match the SG pair count");
    if (k.nu < 0.0) throw ValidationError("coefficient JSON: nu must be nonnegative");
    return k;
}

inline void save_coefficients(const std::string& path, const CoefficientSet& k) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << coefficients_to_json(k).dump(1) << "\n";
}

inline CoefficientSet load_coefficients(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open coefficient file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("coefficient file " + path + ": " + e.what());
    }
    return coefficients_from_json(j);
}

}  // namespace sccprice::fit
