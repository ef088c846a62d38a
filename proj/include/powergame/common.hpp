#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace pg {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ErrorKind { usage, parse, validation, convergence, mismatch, argument };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// Thrown by the fixed-point solvers; carries the continuation parameter where tracing stopped.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, double beta, double residual)
        : Error(ErrorKind::convergence, msg), beta_(beta), residual_(residual) {}
    double beta() const { return beta_; }
    double residual() const { return residual_; }

private:
    double beta_;
    double residual_;
};

enum class ExecPolicy { serial, parallel };

const char* error_kind_name(ErrorKind k);

}  // namespace pg
