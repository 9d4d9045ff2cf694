#pragma once

#include <Eigen/Dense>
#include <complex>

#include "sccprice/common.hpp"

namespace sccprice::grid {

/// Dense complex matrix used for Y/Z nodal algebra.
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Condition threshold above which an inversion is rejected.
inline constexpr double kConditionLimit = 1e12;

inline double one_norm(const ComplexMatrix& m) {
    double best = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i) s += std::abs(m(i, j));
        best = std::max(best, s);
    }
    return best;
}

/// Inverts a square complex matrix by dense LU with partial pivoting.
/// The condition estimate is the exact 1-norm condition number computed from
/// the inverse itself; inversions with estimate above kConditionLimit throw.
inline ComplexMatrix invert(const ComplexMatrix& m) {
    if (m.rows() != m.cols())
        throw ValidationError("invert: matrix is not square");
    if (!m.allFinite())
        throw ValidationError("invert: matrix has non-finite entries");
    const Eigen::Index n = m.rows();
    Eigen::PartialPivLU<ComplexMatrix> lu(m);
    // A zero pivot means structural singularity (e.g. an island with no source).
    const auto& u = lu.matrixLU();
    double umax = 0.0, umin = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        double p = std::abs(u(i, i));
        umax = std::max(umax, p);
        umin = std::min(umin, p);
    }
    if (umin == 0.0 || umax / umin > 1e300)
        throw SingularMatrixError(std::numeric_limits<double>::infinity(),
                                  "invert: matrix is singular");
    ComplexMatrix inv = lu.solve(ComplexMatrix::Identity(n, n));
    const double cond = one_norm(m) * one_norm(inv);
    if (!(cond < kConditionLimit))
        throw SingularMatrixError(cond, "invert: condition estimate " + fmt_double(cond) +
                                            " exceeds threshold " + fmt_double(kConditionLimit));
    return inv;
}

/// Max-norm residual of an inversion, ||A*Ainv - I||_max.
inline double inversion_residual(const ComplexMatrix& a, const ComplexMatrix& ainv) {
    ComplexMatrix r = a * ainv - ComplexMatrix::Identity(a.rows(), a.cols());
    return r.cwiseAbs().maxCoeff();
}

}  // namespace sccprice::grid
