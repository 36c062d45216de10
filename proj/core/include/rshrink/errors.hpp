#pragma once

#include <stdexcept>
#include <sstream>
#include <string>

namespace rshrink {

/// Raised when an iterative or scalar solver cannot certify its result.
/// Precondition violations use std::invalid_argument instead.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, int iterations, double residual)
        : NumericalError(describe(what, iterations, residual)),
          iterations_(iterations), residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    static std::string describe(const std::string& what, int iterations, double residual) {
        std::ostringstream os;
        os << what << " (iterations=" << iterations << ", residual=" << residual << ")";
        return os.str();
    }

    int iterations_;
    double residual_;
};

}  // namespace rshrink
