#pragma once

#include "rshrink/asymptotics.hpp"
#include "rshrink/measure.hpp"

#include <complex>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace rshrink {

using Complex = std::complex<double>;

enum class Branch { hat, check };

std::string_view to_string(Branch branch);
Branch branch_from_string(std::string_view name);

struct StieltjesEval {
    Complex z;
    Complex delta;
    Complex m;
    Branch branch = Branch::hat;
    double residual = 0.0;  // |delta - RHS(delta)|
    int iterations = 0;
};

/// Limiting spectral measure of the hat (Abramovich-Pascal) or check (Chen)
/// estimate for population measure nu, ratio c and shrinkage rho < 1.
/// The scalar parameters are solved once at construction.
class LimitingSpectrum {
public:
    LimitingSpectrum(SpectralMeasure nu, double rho, double c, Branch branch);

    /// Stieltjes transform at z (Im z > 0). `warm` seeds the delta fixed point.
    StieltjesEval evaluate(Complex z, std::optional<Complex> warm = std::nullopt) const;

    Branch branch() const noexcept { return branch_; }
    double rho() const noexcept { return rho_; }
    double c() const noexcept { return c_; }
    const AsymptoticParams& params() const noexcept { return params_; }

    /// max{0, 1 - 1/c}.
    double atom_mass() const noexcept;
    /// rho for the hat branch, T/(1 - rho + T) for the check branch.
    double atom_location() const noexcept;
    /// An interval that contains the whole limiting support.
    std::pair<double, double> support_bounds() const noexcept;
    /// Closed-form first moment: M_{mu_hat,1} or 1.
    double first_moment() const noexcept;

private:
    Complex shifted(Complex z) const noexcept;

    SpectralMeasure nu_;
    double rho_;
    double c_;
    Branch branch_;
    AsymptoticParams params_;
    double scale_ = 1.0;  // prefactor of the integral giving m
};

StieltjesEval stieltjes(const SpectralMeasure& nu, double rho, double c, Complex z, Branch branch);

struct DensityCurve {
    std::vector<double> grid;
    std::vector<double> density;  // continuous part only
    std::optional<double> atom_location;
    std::optional<double> atom_mass;
    double epsilon = 1e-4;
    Branch branch = Branch::hat;
    double rho = 0.0;
    double c = 0.0;
};

/// density[j] = max{0, Im m(grid[j] + i eps) / pi} with the Poisson-smoothed
/// contribution of the Dirac atom (present iff c > 1) removed, so that the curve
/// carries the continuous part only. The grid is swept left to right, each
/// point warm-started from the previous one.
DensityCurve density_curve(const SpectralMeasure& nu, double rho, double c, double x_min, double x_max,
                           int points, double epsilon, Branch branch);
/// Same, over support_bounds() widened by a small margin.
DensityCurve density_curve(const LimitingSpectrum& spectrum, int points, double epsilon);

/// Trapezoid integral of the continuous part plus the atom mass.
double total_mass(const DensityCurve& curve);
/// Cumulative distribution on curve.grid (continuous part plus atom step).
std::vector<double> limiting_cdf(const DensityCurve& curve);
/// sup_x |F_emp(x) - F_lim(x)| evaluated at the sample points, F_lim interpolated linearly.
double kolmogorov_distance(std::span<const double> eigenvalues, const DensityCurve& curve);

/// Moment of order ell of the limiting measure: closed form for ell = 1,
/// quadrature of the density curve otherwise.
double limit_moment(const SpectralMeasure& nu, double rho, double c, int ell, Branch branch);
/// Quadrature route for any ell >= 1 (Richardson-extrapolated in epsilon).
double limit_moment_quadrature(const SpectralMeasure& nu, double rho, double c, int ell, Branch branch,
                               int points = 8000, double epsilon = 1e-4);

}  // namespace rshrink
