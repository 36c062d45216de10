#include "rshrink/shrinkage.hpp"

#include "rshrink/errors.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>

namespace rshrink {
namespace {

constexpr int kCoarsePoints = 32;
constexpr double kLowerOffset = 1e-6;
constexpr double kSearchTolerance = 1e-8;
constexpr double kStopGap = 1e-10;

// nullopt when the trace denominator is not positive
std::optional<double> rhs_or_nothing(const SampleSet& samples) {
    if (samples.count() < 2) throw std::invalid_argument("plug_in_rhs: need n >= 2 samples");
    const Matrix u = samples.normalized();
    Matrix s = Matrix::Zero(u.rows(), u.rows());
    s.selfadjointView<Eigen::Lower>().rankUpdate(u, 1.0 / static_cast<double>(u.cols()));
    s = s.selfadjointView<Eigen::Lower>();
    const double second = s.squaredNorm() / static_cast<double>(u.rows());
    const double denom = second - 1.0;
    if (!(denom > 0.0)) return std::nullopt;
    return samples.ratio() / denom;
}

using Solver = std::function<CovEstimate(double rho, const SolverConfig& cfg, const Matrix* warm)>;
using Lhs = std::function<double(const CovEstimate&)>;

struct Probe {
    double rho;
    double gap;
    Matrix matrix;
};

ShrinkageSelection select(const SampleSet& samples, const SolverConfig& cfg, double lower, const Solver& solve,
                          const Lhs& lhs) {
    cfg.validate();
    ShrinkageSelection out;
    const auto rhs = rhs_or_nothing(samples);
    out.rhs = rhs.value_or(std::numeric_limits<double>::infinity());

    // Both left-hand sides are bounded by 1 and equal 1 at rho = 1, so a target
    // of 1 or more is best met (in |g|) at rho = 1.
    if (!rhs || *rhs >= 1.0) {
        out.rho = 1.0;
        out.estimate = solve(1.0, cfg, nullptr);
        out.solver_iterations = 1;
        out.lhs_residual = rhs ? std::abs(lhs(out.estimate) - *rhs) : std::numeric_limits<double>::infinity();
        out.root_found = rhs && *rhs == 1.0;
        return out;
    }
    const double target = *rhs;

    SolverConfig search = cfg;
    search.tol = std::max(cfg.tol, kSearchTolerance);
    int evaluations = 0;
    auto probe = [&](double rho, const Matrix* warm) {
        ++evaluations;
        CovEstimate est = solve(rho, search, warm);
        const double gap = lhs(est) - target;
        return Probe{rho, gap, std::move(est.matrix)};
    };

    const double lo = lower + kLowerOffset;
    // Scan down from rho = 1; the first sign change met is the one nearest 1.
    Probe upper = probe(1.0, nullptr);
    Probe first = upper;
    std::optional<Probe> lower_probe;
    for (int k = 1; k < kCoarsePoints; ++k) {
        const double rho = 1.0 - (1.0 - lo) * static_cast<double>(k) / (kCoarsePoints - 1);
        Probe next = probe(rho, &upper.matrix);
        if ((next.gap <= 0.0) != (upper.gap <= 0.0)) {
            lower_probe = std::move(next);
            break;
        }
        upper = std::move(next);
    }

    if (!lower_probe) {
        // no sign change: endpoint with the smaller |g|
        const Probe& end = std::abs(first.gap) <= std::abs(upper.gap) ? first : upper;
        out.rho = end.rho;
        out.root_found = false;
        out.estimate = solve(end.rho, cfg, &end.matrix);
        out.lhs_residual = std::abs(lhs(out.estimate) - target);
        out.solver_iterations = evaluations + 1;
        return out;
    }

    Probe best = std::abs(upper.gap) < std::abs(lower_probe->gap) ? upper : *lower_probe;
    if (std::abs(best.gap) > kStopGap) {
        Matrix warm = upper.matrix;
        auto g = [&](double rho) {
            Probe p = probe(rho, &warm);
            warm = p.matrix;
            const double gap = p.gap;
            if (std::abs(gap) < std::abs(best.gap)) best = std::move(p);
            return gap;
        };
        auto stop = [&](double a, double b) { return std::abs(best.gap) <= kStopGap || std::abs(b - a) <= 1e-13; };
        std::uintmax_t max_iter = 100;
        boost::math::tools::toms748_solve(g, lower_probe->rho, upper.rho, lower_probe->gap, upper.gap, stop,
                                          max_iter);
    }

    out.rho = best.rho;
    out.estimate = solve(best.rho, cfg, &best.matrix);
    out.lhs_residual = std::abs(lhs(out.estimate) - target);
    out.solver_iterations = evaluations + 1;
    return out;
}

}  // namespace

double plug_in_rhs(const SampleSet& samples) {
    const auto rhs = rhs_or_nothing(samples);
    if (!rhs) throw NumericalError("plug_in_rhs: trace denominator is not positive");
    return *rhs;
}

double hat_selection_lhs(const CovEstimate& est) {
    return est.rho / (est.matrix.trace() / static_cast<double>(est.matrix.rows()));
}

double check_selection_lhs(const SampleSet& samples, const CovEstimate& est) {
    Eigen::LLT<Matrix> llt(est.matrix);
    if (llt.info() != Eigen::Success) throw NumericalError("check_selection_lhs: estimate is not positive definite");
    const Matrix u = samples.normalized();
    // ||u||^2 = N for every normalized column
    const double q = llt.matrixL().solve(u).squaredNorm() /
                     (static_cast<double>(u.cols()) * static_cast<double>(u.rows()));
    const double rho = est.rho;
    return rho * q / (1.0 - rho + rho * q);
}

ShrinkageSelection select_rho_hat(const SampleSet& samples, const SolverConfig& cfg) {
    auto solve = [&](double rho, const SolverConfig& c, const Matrix* warm) {
        return warm ? abramovich_pascal(samples, rho, c, *warm) : abramovich_pascal(samples, rho, c);
    };
    return select(samples, cfg, hat_lower_bound(samples.dim(), samples.count()), solve, hat_selection_lhs);
}

ShrinkageSelection select_rho_check(const SampleSet& samples, const SolverConfig& cfg) {
    auto solve = [&](double rho, const SolverConfig& c, const Matrix* warm) {
        return warm ? chen(samples, rho, c, *warm) : chen(samples, rho, c);
    };
    auto lhs = [&](const CovEstimate& est) { return check_selection_lhs(samples, est); };
    return select(samples, cfg, 0.0, solve, lhs);
}

}  // namespace rshrink
