#pragma once

#include <stdexcept>
#include <string>

namespace eit {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Mesh construction or invariant failure.
class MeshError : public Error {
public:
    using Error::Error;
};

/// Linear-algebra failure (singular system, failed factorization).
class SolveError : public Error {
public:
    using Error::Error;
};

/// Integration J applied to a trace with nonzero mean.
class MeanViolation : public Error {
public:
    MeanViolation(double mean, double norm)
        : Error("integration J applied to nonzero-mean trace (mean=" +
                std::to_string(mean) + ", norm=" + std::to_string(norm) + ")"),
          mean_value(mean), trace_norm(norm) {}
    double mean_value;
    double trace_norm;
};

/// Classification cannot separate the three alternatives.
class IndeterminateError : public Error {
public:
    IndeterminateError(const std::string& msg, int kernel_count, double lambda1)
        : Error(msg), kernel_count(kernel_count), lambda1_norm(lambda1) {}
    int kernel_count;
    double lambda1_norm;
};

/// Algebra element failed its membership criterion.
class CriterionError : public Error {
public:
    using Error::Error;
};

/// Generators do not separate boundary points.
class SeparationFailure : public Error {
public:
    SeparationFailure(const std::string& msg, int a, int b)
        : Error(msg), point_a(a), point_b(b) {}
    int point_a;
    int point_b;
};

/// Component count or seam structure contradicts the expected topology.
class TopologyError : public Error {
public:
    using Error::Error;
};

/// File parse / format failure.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg, long line = -1)
        : Error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_number(line) {}
    long line_number;
};

} // namespace eit
