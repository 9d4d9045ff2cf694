#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "sccprice/common.hpp"
#include "sccprice/simplex.hpp"

namespace sccprice::opt {

/// Inequality-constrained least squares: minimize ||A x - b||^2 over G x <= h.
struct QpProblem {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
};

struct QpOptions {
    int max_iterations = 20000;
    double tol_feas = 1e-9;
    double tol_step = 1e-11;
    double tol_multiplier = 1e-9;
};

struct QpSolution {
    Eigen::VectorXd x;
    double objective = 0.0;
    int iterations = 0;
    std::vector<int> active;  // working set at the optimum
};

/// Feasibility check used both before returning and by margin selection.
/// The constraint systems here are tall (one row per scenario, few columns),
/// so instead of a phase-1 LP with one simplex row per scenario this solves
/// the box dual
///   min h'y  s.t.  G'y = 0,  0 <= y <= 1
/// whose basis stays at p rows. Its optimum is 0 exactly when G x <= h has a
/// solution, and the equality-row duals at the optimum are such a solution:
/// the dual function is sum_i min(0, h_i - (G x)_i), so any maximizer
/// reaching 0 violates no row.
inline std::optional<Eigen::VectorXd> qp_feasible_point(const Eigen::MatrixXd& G,
                                                        const Eigen::VectorXd& h) {
    const int p = static_cast<int>(G.cols());
    const int m = static_cast<int>(G.rows());
    if (m == 0) return Eigen::VectorXd::Zero(p);
    LinearProgram lp;
    for (int i = 0; i < m; ++i) lp.add_variable("y" + std::to_string(i), 0.0, 1.0, h(i));
    for (int j = 0; j < p; ++j) {
        Row r;
        r.sense = Sense::Equal;
        r.rhs = 0.0;
        r.name = "k" + std::to_string(j);
        for (int i = 0; i < m; ++i)
            if (G(i, j) != 0.0) r.coeffs.emplace_back(i, G(i, j));
        lp.add_row(std::move(r));
    }
    LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal) return std::nullopt;
    if (sol.objective < -1e-9 * (1.0 + h.cwiseAbs().maxCoeff())) return std::nullopt;
    Eigen::VectorXd x(p);
    for (int j = 0; j < p; ++j) x(j) = sol.duals[static_cast<std::size_t>(j)];
    return x;
}

/// Primal active-set method with null-space steps. Handles a singular
/// Gauss-Newton Hessian (rank-deficient A) through minimum-norm solves; for a
/// least-squares objective the reduced gradient always lies in the range of
/// the reduced Hessian, so those solves are exact.
inline QpSolution solve_constrained_least_squares(const QpProblem& qp, const QpOptions& opt = {}) {
    const int p = static_cast<int>(qp.A.cols());
    const int m = static_cast<int>(qp.G.rows());
    if (qp.A.rows() != qp.b.rows() || (m > 0 && qp.G.cols() != qp.A.cols()) || qp.h.rows() != m)
        throw ValidationError("QP: inconsistent dimensions");

    auto start = qp_feasible_point(qp.G, qp.h);
    if (!start) throw InfeasibleError("QP constraints are infeasible");
    Eigen::VectorXd x = *start;

    const Eigen::MatrixXd H = 2.0 * qp.A.transpose() * qp.A;
    const Eigen::VectorXd g = -2.0 * qp.A.transpose() * qp.b;

    std::vector<int> work;
    std::vector<char> in_work(static_cast<std::size_t>(m), 0);
    QpSolution out;
    bool converged = false;

    for (int iter = 0; iter < opt.max_iterations && !converged; ++iter) {
        out.iterations = iter + 1;
        Eigen::VectorXd grad = H * x + g;

        // Null-space basis of the working-set rows.
        Eigen::MatrixXd Z;
        const int nw = static_cast<int>(work.size());
        if (nw == 0) {
            Z = Eigen::MatrixXd::Identity(p, p);
        } else {
            Eigen::MatrixXd Gw(nw, p);
            for (int i = 0; i < nw; ++i) Gw.row(i) = qp.G.row(work[static_cast<std::size_t>(i)]);
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Gw.transpose());
            const auto rank = qr.rank();
            if (rank >= p) {
                Z.resize(p, 0);
            } else {
                Eigen::MatrixXd Q = qr.householderQ();
                Z = Q.rightCols(p - rank);
            }
        }

        Eigen::VectorXd d = Eigen::VectorXd::Zero(p);
        if (Z.cols() > 0) {
            Eigen::MatrixXd Hz = Z.transpose() * H * Z;
            Eigen::VectorXd gz = Z.transpose() * grad;
            Eigen::VectorXd dz = Hz.completeOrthogonalDecomposition().solve(-gz);
            d = Z * dz;
        }

        if (d.lpNorm<Eigen::Infinity>() <= opt.tol_step * (1.0 + x.lpNorm<Eigen::Infinity>())) {
            // Stationary on the working set: check multipliers.
            if (nw == 0) {
                converged = true;
                continue;
            }
            Eigen::MatrixXd Gw(nw, p);
            for (int i = 0; i < nw; ++i) Gw.row(i) = qp.G.row(work[static_cast<std::size_t>(i)]);
            Eigen::VectorXd lambda =
                Gw.transpose().completeOrthogonalDecomposition().solve(-grad);
            int drop = -1;
            double most_negative = -opt.tol_multiplier * (1.0 + grad.lpNorm<Eigen::Infinity>());
            for (int i = 0; i < nw; ++i)
                if (lambda(i) < most_negative) {
                    most_negative = lambda(i);
                    drop = i;
                }
            if (drop < 0) {
                converged = true;
                continue;
            }
            in_work[static_cast<std::size_t>(work[static_cast<std::size_t>(drop)])] = 0;
            work.erase(work.begin() + drop);
            continue;
        }

        // Ratio test against constraints outside the working set.
        double alpha = 1.0;
        int blocker = -1;
        for (int i = 0; i < m; ++i) {
            if (in_work[static_cast<std::size_t>(i)]) continue;
            double gd = qp.G.row(i).dot(d);
            if (gd <= opt.tol_feas * (1.0 + std::abs(qp.h(i)))) continue;
            double slack = qp.h(i) - qp.G.row(i).dot(x);
            if (slack < 0.0) slack = 0.0;
            double t = slack / gd;
            if (t < alpha - 1e-12) {
                alpha = t;
                blocker = i;
            }
        }
        x += alpha * d;
        if (blocker >= 0) {
            work.push_back(blocker);
            in_work[static_cast<std::size_t>(blocker)] = 1;
        }
    }
    if (!converged) throw Error("QP active-set method failed to converge");

    out.x = x;
    out.objective = (qp.A * x - qp.b).squaredNorm();
    out.active = work;
    return out;
}

}  // namespace sccprice::opt
