#pragma once

#include "rshrink/measure.hpp"
#include "rshrink/sampling.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace rshrink {

struct SolverConfig {
    double tol = 1e-10;
    int max_iter = 500;

    void validate() const;
};

enum class EstimatorKind { abramovich_pascal, chen, linear, clairvoyant };

std::string_view to_string(EstimatorKind kind);
/// Accepts the names produced by to_string; throws std::invalid_argument otherwise.
EstimatorKind estimator_kind_from_string(std::string_view name);

struct CovEstimate {
    Matrix matrix;
    double rho = 1.0;
    int iterations = 0;
    /// Relative Frobenius residual of the defining fixed-point equation, 0 for closed forms.
    double residual = 0.0;
    EstimatorKind kind = EstimatorKind::linear;
};

/// Lower end of the open admissible interval for the Abramovich-Pascal estimate: max{0, 1 - n/N}.
double hat_lower_bound(Index dim, Index count);

/// Solution of M = (1-rho) (1/n) sum x x^T / ((1/N) x^T M^{-1} x) + rho I by Picard
/// iteration from M_0 = I. rho must lie in (max{0, 1 - n/N}, 1].
/// Throws ConvergenceError when the relative residual stays above cfg.tol.
CovEstimate abramovich_pascal(const SampleSet& samples, double rho, const SolverConfig& cfg = {});
/// Same fixed point started from `initial` (used to warm-start rho sweeps).
CovEstimate abramovich_pascal(const SampleSet& samples, double rho, const SolverConfig& cfg,
                              const Matrix& initial);

/// Trace-normalized fixed point M = B / ((1/N) tr B),
/// B = (1-rho) (1/n) sum x x^T / ((1/N) x^T M^{-1} x) + rho I, rho in (0, 1].
CovEstimate chen(const SampleSet& samples, double rho, const SolverConfig& cfg = {});
CovEstimate chen(const SampleSet& samples, double rho, const SolverConfig& cfg, const Matrix& initial);

/// (1-rho) (1/n) sum z z^T + rho I on the raw columns.
CovEstimate linear_combine(const Matrix& z, double rho);
CovEstimate linear_combine(const SampleSet& z, double rho);

/// Clairvoyant estimate whitening each sample with the true covariance:
/// (1-rho) (1/n) sum x x^T / ((1/N) x^T C^{-1} x) + rho I.
CovEstimate clairvoyant(const SampleSet& samples, const PopulationModel& model, double rho);

/// (1/N) tr((M / ((1/N) tr M) - C)^2).
double loss_hat(const Matrix& estimate, const PopulationModel& model);
/// Requires est.kind == abramovich_pascal.
double loss_hat(const CovEstimate& est, const PopulationModel& model);
/// (1/N) tr((M - C)^2).
double loss_check(const Matrix& estimate, const PopulationModel& model);
double loss_check(const CovEstimate& est, const PopulationModel& model);

/// Relative residual ||M - RHS(M)||_F / ||M||_F of the defining equation of `est`
/// recomputed from the samples (0 for closed-form kinds).
double defining_residual(const SampleSet& samples, const CovEstimate& est);

struct LossMinimum {
    double rho = 1.0;
    double loss = 0.0;
    int evaluations = 0;
};

/// Grid minimizer of the Frobenius loss of `kind` (loss_hat for abramovich_pascal,
/// loss_check otherwise) refined by golden-section search on the bracketing cell.
LossMinimum minimize_loss(const SampleSet& samples, const PopulationModel& model, EstimatorKind kind,
                          std::span<const double> grid, const SolverConfig& cfg = {});

/// `points` log-spaced values spanning the admissible interval of `kind`, ending at 1.
std::vector<double> default_rho_grid(EstimatorKind kind, Index dim, Index count, int points = 64);

}  // namespace rshrink
