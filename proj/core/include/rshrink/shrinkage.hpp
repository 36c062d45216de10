#pragma once

#include "rshrink/estimators.hpp"
#include "rshrink/sampling.hpp"

namespace rshrink {

/// Result of the data-driven shrinkage selection.
struct ShrinkageSelection {
    double rho = 1.0;
    /// c_N / ((1/N) tr[((1/n) sum x x^T / ((1/N)||x||^2))^2] - 1); +inf when that
    /// denominator is not positive.
    double rhs = 0.0;
    /// |lhs(rho) - rhs| at the returned rho, evaluated with the final estimate.
    double lhs_residual = 0.0;
    /// Number of equation evaluations (each one a fixed-point solve).
    int solver_iterations = 0;
    /// False when no sign change was found and an endpoint was returned instead.
    bool root_found = true;
    /// Estimate at the selected rho, solved to the caller's tolerance.
    CovEstimate estimate;
};

/// The common plug-in target. Requires n >= 2; throws NumericalError when the
/// trace denominator is not positive.
double plug_in_rhs(const SampleSet& samples);

/// Root of rho / ((1/N) tr C_hat(rho)) = plug_in_rhs over (max{0, 1 - n/N} + 1e-6, 1].
ShrinkageSelection select_rho_hat(const SampleSet& samples, const SolverConfig& cfg = {});
/// Root of rho q / (1 - rho + rho q) = plug_in_rhs over (1e-6, 1], where
/// q = (1/n) sum x^T C_check(rho)^{-1} x / ||x||^2.
ShrinkageSelection select_rho_check(const SampleSet& samples, const SolverConfig& cfg = {});

/// Left-hand sides of the two selection equations for a given estimate.
double hat_selection_lhs(const CovEstimate& est);
double check_selection_lhs(const SampleSet& samples, const CovEstimate& est);

}  // namespace rshrink
