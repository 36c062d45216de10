#include "rshrink/asymptotics.hpp"

#include "rshrink/errors.hpp"
#include "rshrink/roots.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace rshrink {
namespace {

constexpr double kScalarTolerance = 1e-12;
constexpr double kBracketLow = 1e-12;
constexpr double kHatBoundaryGap = 1e-9;

void require_rho(double rho, const char* who) {
    if (!(rho > 0.0 && rho <= 1.0)) {
        throw std::invalid_argument(std::string(who) + ": rho must lie in (0, 1]");
    }
}

void require_c(double c, const char* who) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument(std::string(who) + ": c must be positive");
}

std::pair<double, double> hat_equation(const SpectralMeasure& nu, double rho, double gamma) {
    double value = 0.0, slope = 0.0;
    const auto t = nu.atoms();
    const auto w = nu.weights();
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double den = gamma * rho + (1.0 - rho) * t[k];
        value += w[k] * t[k] / den;
        slope -= w[k] * t[k] * rho / (den * den);
    }
    return {value, slope};
}

// value and x-derivative of F(x; rho)
std::pair<double, double> big_F_with_slope(double x, double rho, double c) {
    const double b = rho - c * (1.0 - rho);
    const double k = (1.0 - rho) / x;
    const double s = std::sqrt(0.25 * b * b + k);
    // avoid cancellation in b/2 + s when b < 0
    const double value = b >= 0.0 ? 0.5 * b + s : (s > 0.0 ? k / (s - 0.5 * b) : 0.0);
    const double slope = s > 0.0 ? -(1.0 - rho) / (2.0 * x * x * s) : 0.0;
    return {value, slope};
}

std::pair<double, double> check_equation(const SpectralMeasure& nu, double rho, double c, double gamma) {
    const auto [f, df] = big_F_with_slope(gamma, rho, c);
    const double denom = (1.0 - rho) * c + f;
    const double a = (1.0 - rho) / denom;
    const double da = -(1.0 - rho) * df / (denom * denom);
    double value = 0.0, slope = 0.0;
    const auto t = nu.atoms();
    const auto w = nu.weights();
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double den = gamma * rho + a * t[k];
        value += w[k] * t[k] / den;
        slope -= w[k] * t[k] * (rho + da * t[k]) / (den * den);
    }
    return {value, slope};
}

template <typename Eq>
roots::RootResult solve_unit_equation(Eq&& eq, double rho, double max_atom, const char* who) {
    double hi = std::max(max_atom / rho, 1.0);
    while (eq(hi).first > 1.0) {
        hi *= 2.0;
        if (!std::isfinite(hi)) throw NumericalError(std::string(who) + ": failed to bracket the root");
    }
    if (eq(kBracketLow).first < 1.0) {
        throw NumericalError(std::string(who) + ": no positive root (too much mass at zero for this rho)");
    }
    auto root = roots::solve_decreasing(eq, 1.0, kBracketLow, hi);
    if (!(root.residual <= kScalarTolerance)) {
        throw NumericalError(std::string(who) + ": residual " + std::to_string(root.residual) +
                             " above tolerance");
    }
    return root;
}

Matrix scatter(const Matrix& z) {
    Matrix s = Matrix::Zero(z.rows(), z.rows());
    s.selfadjointView<Eigen::Lower>().rankUpdate(z, 1.0 / static_cast<double>(z.cols()));
    return s.selfadjointView<Eigen::Lower>();
}

}  // namespace

double gamma_hat(const SpectralMeasure& nu, double rho) {
    require_rho(rho, "gamma_hat");
    auto eq = [&](double g) { return hat_equation(nu, rho, g); };
    return solve_unit_equation(eq, rho, nu.max_atom(), "gamma_hat").x;
}

double gamma_hat_residual(const SpectralMeasure& nu, double rho, double gamma) {
    return std::abs(1.0 - hat_equation(nu, rho, gamma).first);
}

double big_F(double x, double rho, double c) {
    if (!(x > 0.0)) throw std::invalid_argument("big_F: x must be positive");
    require_rho(rho, "big_F");
    require_c(c, "big_F");
    return big_F_with_slope(x, rho, c).first;
}

AsymptoticParams gamma_check(const SpectralMeasure& nu, double rho, double c) {
    require_rho(rho, "gamma_check");
    require_c(c, "gamma_check");
    auto eq = [&](double g) { return check_equation(nu, rho, c, g); };
    const auto root = solve_unit_equation(eq, rho, nu.max_atom(), "gamma_check");

    AsymptoticParams p;
    p.rho = rho;
    p.c = c;
    p.gamma = root.x;
    p.residual = root.residual;
    p.F_at_gamma = big_F_with_slope(root.x, rho, c).first;
    p.T_rho = rho * p.gamma * p.F_at_gamma;
    p.f_value = p.T_rho / (1.0 - rho + p.T_rho);
    return p;
}

double gamma_check_residual(const SpectralMeasure& nu, double rho, double c, double gamma) {
    return std::abs(1.0 - check_equation(nu, rho, c, gamma).first);
}

double hat_rho_lower(double c) {
    require_c(c, "hat_rho_lower");
    return std::max(0.0, 1.0 - 1.0 / c);
}

double hat_first_moment(const SpectralMeasure& nu, double rho, double c) {
    require_rho(rho, "hat_first_moment");
    if (!(rho > hat_rho_lower(c))) {
        throw std::invalid_argument("hat_first_moment: rho at or below max{0, 1 - 1/c}");
    }
    const double g = gamma_hat(nu, rho);
    return (1.0 - rho) / (g * (1.0 - (1.0 - rho) * c)) + rho;
}

AsymptoticParams hat_params(const SpectralMeasure& nu, double rho, double c) {
    AsymptoticParams p;
    p.rho = rho;
    p.c = c;
    p.f_value = f_hat(nu, rho, c);
    p.gamma = gamma_hat(nu, rho);
    p.residual = gamma_hat_residual(nu, rho, p.gamma);
    return p;
}

double f_hat(const SpectralMeasure& nu, double rho, double c) {
    require_rho(rho, "f_hat");
    if (!(rho > hat_rho_lower(c) + kHatBoundaryGap)) {
        throw std::invalid_argument("f_hat: rho within 1e-9 of the lower boundary max{0, 1 - 1/c}");
    }
    return rho / hat_first_moment(nu, rho, c);
}

double f_check(const SpectralMeasure& nu, double rho, double c) { return gamma_check(nu, rho, c).f_value; }

double f_hat_inverse(const SpectralMeasure& nu, double target, double c) {
    if (!(target > 0.0 && target <= 1.0)) throw std::invalid_argument("f_hat_inverse: target outside (0, 1]");
    if (target == 1.0) return 1.0;
    const double lo = hat_rho_lower(c) + 2.0 * kHatBoundaryGap;
    if (f_hat(nu, lo, c) > target) {
        throw NumericalError("f_hat_inverse: target below the resolvable range near the lower boundary");
    }
    return roots::bisect_increasing([&](double r) { return f_hat(nu, r, c); }, target, lo, 1.0);
}

double f_check_inverse(const SpectralMeasure& nu, double target, double c) {
    if (!(target > 0.0 && target <= 1.0)) throw std::invalid_argument("f_check_inverse: target outside (0, 1]");
    if (target == 1.0) return 1.0;
    const double lo = 1e-12;
    if (f_check(nu, lo, c) > target) {
        throw NumericalError("f_check_inverse: target below the resolvable range near zero");
    }
    return roots::bisect_increasing([&](double r) { return f_check(nu, r, c); }, target, lo, 1.0);
}

OptimalShrinkage rho_star_dstar(const SpectralMeasure& nu, double c) {
    require_c(c, "rho_star_dstar");
    const double excess = std::max(0.0, nu.moment(2) - 1.0);
    OptimalShrinkage out;
    out.rho_star = c / (c + excess);
    out.d_star = c * excess / (c + excess);
    out.rho_hat_star = f_hat_inverse(nu, out.rho_star, c);
    out.rho_check_star = f_check_inverse(nu, out.rho_star, c);
    return out;
}

Matrix s_hat_equivalent(const Matrix& z, const SpectralMeasure& nu, double rho, double c) {
    const double g = gamma_hat(nu, rho);
    if (rho < 1.0 && !(rho > hat_rho_lower(c))) {
        throw std::invalid_argument("s_hat_equivalent: rho at or below max{0, 1 - 1/c}");
    }
    Matrix s = ((1.0 - rho) / (g * (1.0 - (1.0 - rho) * c))) * scatter(z);
    s.diagonal().array() += rho;
    return s;
}

Matrix s_check_equivalent(const Matrix& z, const SpectralMeasure& nu, double rho, double c) {
    const AsymptoticParams p = gamma_check(nu, rho, c);
    const double denom = 1.0 - rho + p.T_rho;
    Matrix s = ((1.0 - rho) / denom) * scatter(z);
    s.diagonal().array() += p.T_rho / denom;
    return s;
}

}  // namespace rshrink
