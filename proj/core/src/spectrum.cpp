#include "rshrink/spectrum.hpp"

#include "rshrink/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rshrink {
namespace {

constexpr double kDeltaTolerance = 1e-10;
constexpr double kDeltaTarget = 1e-13;
constexpr int kMaxPicard = 10000;

struct DeltaEquation {
    std::span<const double> t;
    std::span<const double> w;
    double c;
    Complex zeta;

    Complex rhs(Complex delta) const {
        Complex acc = 0.0;
        const Complex shrink = 1.0 / (1.0 + c * delta);
        for (std::size_t k = 0; k < t.size(); ++k) acc += w[k] * t[k] / (zeta + t[k] * shrink);
        return acc;
    }

    // d rhs / d delta
    Complex slope(Complex delta) const {
        Complex acc = 0.0;
        const Complex onepc = 1.0 + c * delta;
        const Complex shrink = 1.0 / onepc;
        for (std::size_t k = 0; k < t.size(); ++k) {
            const Complex den = zeta + t[k] * shrink;
            acc += w[k] * t[k] * t[k] * c / (onepc * onepc * den * den);
        }
        return acc;
    }

    // relative once |delta| is large, which happens near the atom when c > 1
    double residual(Complex delta) const { return std::abs(delta - rhs(delta)) / std::max(1.0, std::abs(delta)); }
};

struct DeltaSolve {
    Complex delta;
    double residual;
    int iterations;
};

// Damped Picard with step omega, dropping to omega = 0.1 when the residual
// keeps growing.
DeltaSolve picard(const DeltaEquation& eq, Complex delta, int budget) {
    double omega = 0.5;
    double res = eq.residual(delta);
    int growth = 0;
    int k = 0;
    for (; k < budget && res > kDeltaTarget; ++k) {
        const Complex next = (1.0 - omega) * delta + omega * eq.rhs(delta);
        const double next_res = eq.residual(next);
        growth = next_res > res ? growth + 1 : 0;
        if (growth >= 3 && omega > 0.1) {
            omega = 0.1;
            growth = 0;
        }
        delta = next;
        res = next_res;
    }
    return {delta, res, k};
}

std::optional<DeltaSolve> newton(const DeltaEquation& eq, Complex delta) {
    double res = eq.residual(delta);
    for (int k = 0; k < 60; ++k) {
        if (res <= kDeltaTarget) return DeltaSolve{delta, res, k};
        Complex step = (delta - eq.rhs(delta)) / (1.0 - eq.slope(delta));
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return std::nullopt;
        // backtrack until the iterate stays in the upper half plane and the
        // residual does not grow
        bool accepted = false;
        for (int h = 0; h < 30 && !accepted; ++h, step *= 0.5) {
            const Complex next = delta - step;
            if (!(next.imag() > 0.0)) continue;
            const double next_res = eq.residual(next);
            if (std::isfinite(next_res) && next_res < res) {
                delta = next;
                res = next_res;
                accepted = true;
            }
        }
        if (!accepted) break;
    }
    if (res <= kDeltaTolerance) return DeltaSolve{delta, res, 60};
    return std::nullopt;
}

double lorentz(double x, double location, double eps) {
    const double d = x - location;
    return eps / (d * d + eps * eps);
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t j = 1; j < x.size(); ++j) acc += 0.5 * (x[j] - x[j - 1]) * (y[j] + y[j - 1]);
    return acc;
}

}  // namespace

std::string_view to_string(Branch branch) { return branch == Branch::hat ? "hat" : "check"; }

Branch branch_from_string(std::string_view name) {
    if (name == "hat") return Branch::hat;
    if (name == "check") return Branch::check;
    throw std::invalid_argument("unknown branch: " + std::string(name));
}

LimitingSpectrum::LimitingSpectrum(SpectralMeasure nu, double rho, double c, Branch branch)
    : nu_(std::move(nu)), rho_(rho), c_(c), branch_(branch) {
    if (!(rho > 0.0 && rho < 1.0)) {
        throw std::invalid_argument("LimitingSpectrum: rho must lie in (0, 1); rho = 1 degenerates to a Dirac at 1");
    }
    if (branch_ == Branch::hat) {
        params_ = hat_params(nu_, rho_, c_);
        scale_ = params_.gamma * (1.0 - (1.0 - rho_) * c_) / (1.0 - rho_);
    } else {
        params_ = gamma_check(nu_, rho_, c_);
        scale_ = (1.0 - rho_ + params_.T_rho) / (1.0 - rho_);
    }
}

Complex LimitingSpectrum::shifted(Complex z) const noexcept {
    if (branch_ == Branch::hat) return (rho_ - z) * scale_;
    return params_.T_rho / (1.0 - rho_) * (1.0 - z) - z;
}

double LimitingSpectrum::atom_mass() const noexcept { return std::max(0.0, 1.0 - 1.0 / c_); }

double LimitingSpectrum::atom_location() const noexcept {
    return branch_ == Branch::hat ? rho_ : params_.f_value;
}

std::pair<double, double> LimitingSpectrum::support_bounds() const noexcept {
    // Eigenvalues are shift + slope * lambda((1/n) Z Z^T), whose spectrum lies
    // in [0, max_t (1 + sqrt c)^2].
    double shift, slope;
    if (branch_ == Branch::hat) {
        shift = rho_;
        slope = (1.0 - rho_) / (params_.gamma * (1.0 - (1.0 - rho_) * c_));
    } else {
        shift = params_.f_value;
        slope = 1.0 - params_.f_value;
    }
    const double edge = (1.0 + std::sqrt(c_)) * (1.0 + std::sqrt(c_));
    return {shift, shift + slope * nu_.max_atom() * edge};
}

double LimitingSpectrum::first_moment() const noexcept {
    if (branch_ == Branch::check) return 1.0;
    return rho_ / params_.f_value;
}

StieltjesEval LimitingSpectrum::evaluate(Complex z, std::optional<Complex> warm) const {
    if (!(z.imag() > 0.0)) throw std::invalid_argument("stieltjes: Im(z) must be positive");
    const DeltaEquation eq{nu_.atoms(), nu_.weights(), c_, shifted(z)};

    Complex start = warm.value_or(Complex(0.0, 1.0));
    if (!(start.imag() > 0.0)) start = Complex(0.0, 1.0);

    // a short damped run, then Newton from wherever it got to
    DeltaSolve sol = picard(eq, start, 200);
    if (sol.residual > kDeltaTarget) {
        if (auto polished = newton(eq, sol.delta)) {
            polished->iterations += sol.iterations;
            sol = *polished;
        } else {
            DeltaSolve cold = picard(eq, Complex(0.0, 1.0), 200);
            if (auto retry = newton(eq, cold.delta)) {
                retry->iterations += sol.iterations + cold.iterations;
                sol = *retry;
            } else {
                sol = picard(eq, Complex(0.0, 1.0), kMaxPicard);
            }
        }
    }
    if (!(sol.residual <= kDeltaTolerance) || !(sol.delta.imag() > 0.0)) {
        std::ostringstream os;
        os.precision(17);
        os << "stieltjes: delta fixed point did not converge at z = " << z.real() << " + " << z.imag() << "i";
        throw ConvergenceError(os.str(), sol.iterations, sol.residual);
    }

    const Complex shrink = 1.0 / (1.0 + c_ * sol.delta);
    Complex acc = 0.0;
    const auto t = nu_.atoms();
    const auto w = nu_.weights();
    for (std::size_t k = 0; k < t.size(); ++k) acc += w[k] / (eq.zeta + t[k] * shrink);
    return StieltjesEval{z, sol.delta, scale_ * acc, branch_, sol.residual, sol.iterations};
}

StieltjesEval stieltjes(const SpectralMeasure& nu, double rho, double c, Complex z, Branch branch) {
    return LimitingSpectrum(nu, rho, c, branch).evaluate(z);
}

namespace {

// Density on an increasing grid, swept left to right with warm starts.
constexpr double kEdgeThreshold = 1e-3;

DensityCurve sweep_grid(const LimitingSpectrum& spectrum, std::vector<double> grid, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("density_curve: epsilon must be positive");

    DensityCurve curve;
    curve.epsilon = epsilon;
    curve.branch = spectrum.branch();
    curve.rho = spectrum.rho();
    curve.c = spectrum.c();
    const double mass = spectrum.atom_mass();
    const double location = spectrum.atom_location();
    if (mass > 0.0) {
        curve.atom_mass = mass;
        curve.atom_location = location;
    }

    curve.grid = std::move(grid);
    curve.density.resize(curve.grid.size());
    std::optional<Complex> warm;
    for (std::size_t j = 0; j < curve.grid.size(); ++j) {
        const double x = curve.grid[j];
        const StieltjesEval e = spectrum.evaluate(Complex(x, epsilon), warm);
        warm = e.delta;
        double im = e.m.imag();
        if (mass > 0.0) im -= mass * lorentz(x, location, epsilon);
        curve.density[j] = std::max(0.0, im / std::numbers::pi);
    }
    return curve;
}

DensityCurve sweep(const LimitingSpectrum& spectrum, double x_min, double x_max, int points, double epsilon) {
    if (points < 2) throw std::invalid_argument("density_curve: need at least two points");
    if (!(x_max > x_min)) throw std::invalid_argument("density_curve: empty abscissa range");
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int j = 0; j < points; ++j) grid[static_cast<std::size_t>(j)] = x_min + (x_max - x_min) * static_cast<double>(j) / (points - 1);
    return sweep_grid(spectrum, std::move(grid), epsilon);
}

// Points clustered like 1 - cos near both ends of [a, b], where edge
// singularities of the density sit.
std::vector<double> graded_grid(double a, double b, int points) {
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int j = 0; j < points; ++j) {
        const double t = static_cast<double>(j) / (points - 1);
        grid[static_cast<std::size_t>(j)] = a + (b - a) * 0.5 * (1.0 - std::cos(std::numbers::pi * t));
    }
    return grid;
}

}  // namespace

DensityCurve density_curve(const SpectralMeasure& nu, double rho, double c, double x_min, double x_max,
                           int points, double epsilon, Branch branch) {
    return sweep(LimitingSpectrum(nu, rho, c, branch), x_min, x_max, points, epsilon);
}

DensityCurve density_curve(const LimitingSpectrum& spectrum, int points, double epsilon) {
    const auto [lo, hi] = spectrum.support_bounds();
    const double margin = 0.05 * (hi - lo) + 10.0 * epsilon;
    return sweep(spectrum, lo - margin, hi + margin, points, epsilon);
}

double total_mass(const DensityCurve& curve) {
    return trapezoid(curve.grid, curve.density) + curve.atom_mass.value_or(0.0);
}

std::vector<double> limiting_cdf(const DensityCurve& curve) {
    std::vector<double> cdf(curve.grid.size(), 0.0);
    for (std::size_t j = 1; j < cdf.size(); ++j) {
        cdf[j] = cdf[j - 1] + 0.5 * (curve.grid[j] - curve.grid[j - 1]) * (curve.density[j] + curve.density[j - 1]);
    }
    if (curve.atom_mass && curve.atom_location) {
        for (std::size_t j = 0; j < cdf.size(); ++j) {
            if (curve.grid[j] >= *curve.atom_location) cdf[j] += *curve.atom_mass;
        }
    }
    return cdf;
}

double kolmogorov_distance(std::span<const double> eigenvalues, const DensityCurve& curve) {
    if (eigenvalues.empty()) throw std::invalid_argument("kolmogorov_distance: no eigenvalues");
    std::vector<double> sorted(eigenvalues.begin(), eigenvalues.end());
    std::sort(sorted.begin(), sorted.end());
    const std::vector<double> cdf = limiting_cdf(curve);
    const auto& x = curve.grid;

    auto interpolate = [&](double v) {
        if (v <= x.front()) return 0.0;
        if (v >= x.back()) return cdf.back();
        const auto hi = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), v) - x.begin());
        const std::size_t lo = hi - 1;
        const double frac = (v - x[lo]) / (x[hi] - x[lo]);
        return cdf[lo] + frac * (cdf[hi] - cdf[lo]);
    };

    const double n = static_cast<double>(sorted.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = interpolate(sorted[i]);
        worst = std::max({worst, std::abs(static_cast<double>(i + 1) / n - f), std::abs(static_cast<double>(i) / n - f)});
    }
    return worst;
}

double limit_moment_quadrature(const SpectralMeasure& nu, double rho, double c, int ell, Branch branch, int points,
                               double epsilon) {
    if (ell < 1) throw std::invalid_argument("limit_moment: order must be >= 1");
    const LimitingSpectrum spectrum(nu, rho, c, branch);

    if (points < 2) throw std::invalid_argument("limit_moment: need at least two points");

    // Locate the support edges on a coarse scan, then integrate on a grid
    // graded toward them.
    const DensityCurve coarse = density_curve(spectrum, 2000, epsilon);
    std::size_t first = coarse.grid.size(), last = 0;
    for (std::size_t j = 0; j < coarse.grid.size(); ++j) {
        if (coarse.density[j] > kEdgeThreshold) {
            first = std::min(first, j);
            last = j;
        }
    }
    std::vector<double> grid;
    if (first > last) {
        grid = coarse.grid;
    } else {
        const double a = coarse.grid[first >= 2 ? first - 2 : 0];
        const double b = coarse.grid[std::min(last + 2, coarse.grid.size() - 1)];
        grid = graded_grid(a, b, points);
    }

    auto integrate = [&](double eps) {
        const DensityCurve curve = sweep_grid(spectrum, grid, eps);
        std::vector<double> weighted(curve.grid.size());
        for (std::size_t j = 0; j < weighted.size(); ++j) {
            weighted[j] = std::pow(curve.grid[j], ell) * curve.density[j];
        }
        double acc = trapezoid(curve.grid, weighted);
        if (curve.atom_mass) acc += *curve.atom_mass * std::pow(*curve.atom_location, ell);
        return acc;
    };
    // smoothing bias is first order in epsilon
    return 2.0 * integrate(0.5 * epsilon) - integrate(epsilon);
}

double limit_moment(const SpectralMeasure& nu, double rho, double c, int ell, Branch branch) {
    if (ell < 1) throw std::invalid_argument("limit_moment: order must be >= 1");
    if (!(rho < 1.0)) throw std::invalid_argument("limit_moment: rho = 1 is degenerate");
    if (ell == 1) {
        if (branch == Branch::check) {
            if (!(rho > 0.0)) throw std::invalid_argument("limit_moment: rho must be positive");
            return 1.0;
        }
        return hat_first_moment(nu, rho, c);
    }
    return limit_moment_quadrature(nu, rho, c, ell, branch);
}

}  // namespace rshrink
