#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace sccprice {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file (JSON/CSV) or schema mismatch.
struct ParseError : Error {
    using Error::Error;
};

/// Input parsed but violates a case invariant (bad id, disconnected graph, ...).
struct ValidationError : Error {
    using Error::Error;
};

/// Matrix inversion rejected: singular or condition estimate above threshold.
struct SingularMatrixError : Error {
    double condition_estimate;
    explicit SingularMatrixError(double cond, const std::string& what)
        : Error(what), condition_estimate(cond) {}
};

/// A program (LP/QP/fit) has no feasible point.
struct InfeasibleError : Error {
    using Error::Error;
};

struct UnboundedError : Error {
    using Error::Error;
};

/// Iteration or node budget exhausted; carries best-known information in the message.
struct BudgetError : Error {
    double incumbent;
    double bound;
    BudgetError(const std::string& what, double inc, double bnd)
        : Error(what), incumbent(inc), bound(bnd) {}
};

/// Deterministic float formatting shared by every CSV/JSON writer.
/// %.12g keeps round-trip fidelity for the value ranges used here and
/// renders identically across runs.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace sccprice
