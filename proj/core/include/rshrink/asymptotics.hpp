#pragma once

#include "rshrink/measure.hpp"

namespace rshrink {

/// Scalars describing the deterministic equivalent of an estimator at (nu, c, rho).
/// For the hat branch F_at_gamma and T_rho are left at zero.
struct AsymptoticParams {
    double rho = 1.0;
    double c = 1.0;
    double gamma = 1.0;
    double F_at_gamma = 0.0;
    double T_rho = 0.0;
    double f_value = 1.0;
    double residual = 0.0;  // of the defining gamma equation
};

/// Positive root of 1 = int t / (gamma rho + (1 - rho) t) nu(dt); independent of c.
double gamma_hat(const SpectralMeasure& nu, double rho);
/// |1 - int t / (gamma rho + (1 - rho) t) nu(dt)|
double gamma_hat_residual(const SpectralMeasure& nu, double rho, double gamma);

/// F(x; rho) = (rho - c(1-rho))/2 + sqrt((rho - c(1-rho))^2 / 4 + (1 - rho)/x), the
/// positive root of F = (1 - rho)/(x F) + rho - c(1 - rho). x = +inf gives the limit.
double big_F(double x, double rho, double c);

/// Solves 1 = int t / (gamma rho + t (1-rho)/((1-rho)c + F(gamma; rho))) nu(dt) and fills
/// T_rho = rho gamma F(gamma; rho) and f_value = T_rho / (1 - rho + T_rho).
AsymptoticParams gamma_check(const SpectralMeasure& nu, double rho, double c);
double gamma_check_residual(const SpectralMeasure& nu, double rho, double c, double gamma);

/// gamma_hat together with f_hat(rho), packaged like gamma_check.
AsymptoticParams hat_params(const SpectralMeasure& nu, double rho, double c);

/// Lower end of the open hat-branch interval, max{0, 1 - 1/c}.
double hat_rho_lower(double c);

/// M_{mu_hat,1} = (1/gamma_hat)(1-rho)/(1-(1-rho)c) + rho.
double hat_first_moment(const SpectralMeasure& nu, double rho, double c);

/// rho / M_{mu_hat,1}: increasing bijection (max{0,1-1/c}, 1] -> (0, 1].
/// Requests within 1e-9 of the lower end are rejected.
double f_hat(const SpectralMeasure& nu, double rho, double c);
/// T_rho / (1 - rho + T_rho): increasing bijection (0, 1] -> (0, 1].
double f_check(const SpectralMeasure& nu, double rho, double c);

double f_hat_inverse(const SpectralMeasure& nu, double target, double c);
double f_check_inverse(const SpectralMeasure& nu, double target, double c);

struct OptimalShrinkage {
    double rho_star = 1.0;
    double d_star = 0.0;
    double rho_hat_star = 1.0;
    double rho_check_star = 1.0;
};

/// rho* = c/(c + M2 - 1), D* = c(M2 - 1)/(c + M2 - 1), and their images
/// rho_hat* = f_hat^{-1}(rho*), rho_check* = f_check^{-1}(rho*).
OptimalShrinkage rho_star_dstar(const SpectralMeasure& nu, double c);

/// (1/gamma_hat)((1-rho)/(1-(1-rho)c)) (1/n) sum z z^T + rho I.
Matrix s_hat_equivalent(const Matrix& z, const SpectralMeasure& nu, double rho, double c);
/// ((1-rho)/(1-rho+T)) (1/n) sum z z^T + (T/(1-rho+T)) I.
Matrix s_check_equivalent(const Matrix& z, const SpectralMeasure& nu, double rho, double c);

}  // namespace rshrink
