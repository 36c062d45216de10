#include "rshrink/estimators.hpp"

#include "rshrink/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rshrink {
namespace {

void check_rho(double rho, double lower, bool open_lower, const char* who) {
    const bool ok = std::isfinite(rho) && rho <= 1.0 && (open_lower ? rho > lower : rho >= lower);
    if (!ok) {
        throw std::invalid_argument(std::string(who) + ": rho=" + std::to_string(rho) +
                                    " outside admissible interval" + (open_lower ? " (" : " [") +
                                    std::to_string(lower) + ", 1]");
    }
}

Matrix symmetrize_lower(const Matrix& lower) {
    return lower.selfadjointView<Eigen::Lower>();
}

// (1/n) sum u u^T / ((1/N) u^T M^{-1} u) using one Cholesky factorization of M.
Matrix weighted_scatter(const Matrix& u, const Matrix& m) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("fixed point iterate lost positive definiteness");
    }
    const Matrix w = llt.matrixL().solve(u);
    const double dim = static_cast<double>(u.rows());
    Matrix v = u;
    for (Index i = 0; i < u.cols(); ++i) {
        const double q = w.col(i).squaredNorm() / dim;
        v.col(i) /= std::sqrt(q);
    }
    Matrix s = Matrix::Zero(u.rows(), u.rows());
    s.selfadjointView<Eigen::Lower>().rankUpdate(v, 1.0 / static_cast<double>(u.cols()));
    return symmetrize_lower(s);
}

double relative_gap(const Matrix& m, const Matrix& rhs) { return (m - rhs).norm() / m.norm(); }

Matrix ap_map(const Matrix& u, const Matrix& m, double rho) {
    Matrix r = (1.0 - rho) * weighted_scatter(u, m);
    r.diagonal().array() += rho;
    return r;
}

Matrix chen_map(const Matrix& u, const Matrix& m, double rho) {
    Matrix b = ap_map(u, m, rho);
    return b * (static_cast<double>(b.rows()) / b.trace());
}

// Anderson mixing over the last few map evaluations. Only used once plain
// Picard has run kAndersonStart steps without converging.
constexpr int kAndersonStart = 100;
constexpr int kAndersonDepth = 5;

class AndersonMixer {
public:
    void reset() {
        dx_.clear();
        df_.clear();
        has_prev_ = false;
    }

    // x is the current iterate, fx = map(x). Returns the mixed next iterate.
    Matrix step(const Matrix& x, const Matrix& fx) {
        const Vector xv = Eigen::Map<const Vector>(fx.data(), fx.size());
        const Vector f = Eigen::Map<const Vector>(fx.data(), fx.size()) - Eigen::Map<const Vector>(x.data(), x.size());
        if (has_prev_) {
            df_.push_back(f - prev_f_);
            dx_.push_back(xv - prev_fx_);
            if (static_cast<int>(df_.size()) > kAndersonDepth) {
                df_.erase(df_.begin());
                dx_.erase(dx_.begin());
            }
        }
        prev_f_ = f;
        prev_fx_ = xv;
        has_prev_ = true;
        if (df_.empty()) return fx;

        const auto m = static_cast<Index>(df_.size());
        Matrix dfm(f.size(), m), dxm(f.size(), m);
        for (Index j = 0; j < m; ++j) {
            dfm.col(j) = df_[static_cast<std::size_t>(j)];
            dxm.col(j) = dx_[static_cast<std::size_t>(j)];
        }
        const Vector gamma = dfm.colPivHouseholderQr().solve(f);
        if (!gamma.allFinite()) {
            reset();
            return fx;
        }
        Vector next = xv - dxm * gamma;
        Matrix out = Eigen::Map<Matrix>(next.data(), fx.rows(), fx.cols());
        return symmetrize_lower(out);
    }

private:
    std::vector<Vector> dx_, df_;
    Vector prev_f_, prev_fx_;
    bool has_prev_ = false;
};

CovEstimate picard(const Matrix& u, double rho, const SolverConfig& cfg, Matrix m, EstimatorKind kind,
                   const std::function<Matrix(const Matrix&, const Matrix&, double)>& map) {
    AndersonMixer mixer;
    for (int k = 0;; ++k) {
        Matrix next = map(u, m, rho);
        const double res = relative_gap(m, next);
        if (res <= cfg.tol) {
            return CovEstimate{std::move(m), rho, k, res, kind};
        }
        if (k == cfg.max_iter || !std::isfinite(res)) {
            throw ConvergenceError(std::string(to_string(kind)) + ": fixed point did not converge at rho=" +
                                       std::to_string(rho),
                                   k, res);
        }
        if (k >= kAndersonStart) {
            Matrix mixed = mixer.step(m, next);
            if (Eigen::LLT<Matrix>(mixed).info() == Eigen::Success) {
                next = std::move(mixed);
            } else {
                mixer.reset();
            }
        }
        m = std::move(next);
    }
}

void check_initial(const SampleSet& s, const Matrix& initial) {
    if (initial.rows() != s.dim() || initial.cols() != s.dim()) {
        throw std::invalid_argument("initial iterate has wrong shape");
    }
}

}  // namespace

void SolverConfig::validate() const {
    if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("SolverConfig: tol must lie in (0, 1)");
    if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be positive");
}

std::string_view to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::abramovich_pascal: return "abramovich_pascal";
        case EstimatorKind::chen: return "chen";
        case EstimatorKind::linear: return "linear";
        case EstimatorKind::clairvoyant: return "clairvoyant";
    }
    return "unknown";
}

EstimatorKind estimator_kind_from_string(std::string_view name) {
    for (auto kind : {EstimatorKind::abramovich_pascal, EstimatorKind::chen, EstimatorKind::linear,
                      EstimatorKind::clairvoyant}) {
        if (name == to_string(kind)) return kind;
    }
    if (name == "hat") return EstimatorKind::abramovich_pascal;
    if (name == "check") return EstimatorKind::chen;
    throw std::invalid_argument("unknown estimator kind: " + std::string(name));
}

double hat_lower_bound(Index dim, Index count) {
    return std::max(0.0, 1.0 - static_cast<double>(count) / static_cast<double>(dim));
}

CovEstimate abramovich_pascal(const SampleSet& samples, double rho, const SolverConfig& cfg) {
    return abramovich_pascal(samples, rho, cfg, Matrix::Identity(samples.dim(), samples.dim()));
}

CovEstimate abramovich_pascal(const SampleSet& samples, double rho, const SolverConfig& cfg,
                              const Matrix& initial) {
    cfg.validate();
    check_rho(rho, hat_lower_bound(samples.dim(), samples.count()), true, "abramovich_pascal");
    check_initial(samples, initial);
    return picard(samples.normalized(), rho, cfg, initial, EstimatorKind::abramovich_pascal, ap_map);
}

CovEstimate chen(const SampleSet& samples, double rho, const SolverConfig& cfg) {
    return chen(samples, rho, cfg, Matrix::Identity(samples.dim(), samples.dim()));
}

CovEstimate chen(const SampleSet& samples, double rho, const SolverConfig& cfg, const Matrix& initial) {
    cfg.validate();
    check_rho(rho, 0.0, true, "chen");
    check_initial(samples, initial);
    Matrix start = initial * (static_cast<double>(samples.dim()) / initial.trace());
    return picard(samples.normalized(), rho, cfg, std::move(start), EstimatorKind::chen, chen_map);
}

CovEstimate linear_combine(const Matrix& z, double rho) {
    check_rho(rho, 0.0, false, "linear_combine");
    if (z.rows() < 1 || z.cols() < 1) throw std::invalid_argument("linear_combine: empty sample matrix");
    Matrix m = Matrix::Zero(z.rows(), z.rows());
    m.selfadjointView<Eigen::Lower>().rankUpdate(z, (1.0 - rho) / static_cast<double>(z.cols()));
    m = symmetrize_lower(m);
    m.diagonal().array() += rho;
    return CovEstimate{std::move(m), rho, 0, 0.0, EstimatorKind::linear};
}

CovEstimate linear_combine(const SampleSet& z, double rho) { return linear_combine(z.data(), rho); }

CovEstimate clairvoyant(const SampleSet& samples, const PopulationModel& model, double rho) {
    check_rho(rho, 0.0, false, "clairvoyant");
    if (model.dim() != samples.dim()) throw std::invalid_argument("clairvoyant: dimension mismatch");
    if (!(model.eigenvalues().front() > 0.0)) {
        throw std::invalid_argument("clairvoyant: population covariance is singular");
    }
    Matrix m = (1.0 - rho) * weighted_scatter(samples.data(), model.covariance());
    m.diagonal().array() += rho;
    return CovEstimate{std::move(m), rho, 0, 0.0, EstimatorKind::clairvoyant};
}

double loss_hat(const Matrix& estimate, const PopulationModel& model) {
    const double dim = static_cast<double>(model.dim());
    const Matrix diff = estimate * (dim / estimate.trace()) - model.covariance();
    return diff.squaredNorm() / dim;
}

double loss_hat(const CovEstimate& est, const PopulationModel& model) {
    if (est.kind != EstimatorKind::abramovich_pascal) {
        throw std::invalid_argument("loss_hat: estimate is not an Abramovich-Pascal estimate");
    }
    return loss_hat(est.matrix, model);
}

double loss_check(const Matrix& estimate, const PopulationModel& model) {
    return (estimate - model.covariance()).squaredNorm() / static_cast<double>(model.dim());
}

double loss_check(const CovEstimate& est, const PopulationModel& model) { return loss_check(est.matrix, model); }

double defining_residual(const SampleSet& samples, const CovEstimate& est) {
    const Matrix u = samples.normalized();
    switch (est.kind) {
        case EstimatorKind::abramovich_pascal:
            return relative_gap(est.matrix, ap_map(u, est.matrix, est.rho));
        case EstimatorKind::chen:
            return relative_gap(est.matrix, chen_map(u, est.matrix, est.rho));
        case EstimatorKind::linear:
        case EstimatorKind::clairvoyant:
            return 0.0;
    }
    return 0.0;
}

std::vector<double> default_rho_grid(EstimatorKind kind, Index dim, Index count, int points) {
    if (points < 1) throw std::invalid_argument("default_rho_grid: need at least one point");
    const double lower = kind == EstimatorKind::abramovich_pascal ? hat_lower_bound(dim, count) : 0.0;
    std::vector<double> grid(static_cast<std::size_t>(points));
    // offsets from the lower end, log-spaced over [1e-3, 1] of the interval width
    const double lo = std::log(1e-3);
    for (int k = 0; k < points; ++k) {
        const double frac = points == 1 ? 1.0 : std::exp(lo * (1.0 - static_cast<double>(k) / (points - 1)));
        grid[static_cast<std::size_t>(k)] = lower + (1.0 - lower) * frac;
    }
    grid.back() = 1.0;
    return grid;
}

LossMinimum minimize_loss(const SampleSet& samples, const PopulationModel& model, EstimatorKind kind,
                          std::span<const double> grid, const SolverConfig& cfg) {
    if (grid.empty()) throw std::invalid_argument("minimize_loss: empty grid");
    if (model.dim() != samples.dim()) throw std::invalid_argument("minimize_loss: dimension mismatch");

    std::vector<double> rhos(grid.begin(), grid.end());
    std::sort(rhos.begin(), rhos.end());
    rhos.erase(std::unique(rhos.begin(), rhos.end()), rhos.end());

    // Solutions are cached by rho so that each evaluation warm-starts from the
    // closest rho already solved.
    std::map<double, Matrix> solved;
    int evaluations = 0;
    auto evaluate = [&](double rho) {
        ++evaluations;
        CovEstimate est;
        auto nearest = solved.lower_bound(rho);
        if (nearest == solved.end() && !solved.empty()) --nearest;
        if (nearest != solved.end() && nearest != solved.begin()) {
            auto prev = std::prev(nearest);
            if (std::abs(prev->first - rho) < std::abs(nearest->first - rho)) nearest = prev;
        }
        const Matrix* warm = nearest == solved.end() ? nullptr : &nearest->second;
        switch (kind) {
            case EstimatorKind::abramovich_pascal:
                est = warm ? abramovich_pascal(samples, rho, cfg, *warm) : abramovich_pascal(samples, rho, cfg);
                break;
            case EstimatorKind::chen:
                est = warm ? chen(samples, rho, cfg, *warm) : chen(samples, rho, cfg);
                break;
            case EstimatorKind::linear:
                est = linear_combine(samples.normalized(), rho);
                break;
            case EstimatorKind::clairvoyant:
                est = clairvoyant(samples, model, rho);
                break;
        }
        const double loss = kind == EstimatorKind::abramovich_pascal ? loss_hat(est.matrix, model)
                                                                     : loss_check(est.matrix, model);
        if (kind == EstimatorKind::abramovich_pascal || kind == EstimatorKind::chen) {
            solved.emplace(rho, std::move(est.matrix));
        }
        return loss;
    };

    std::vector<double> losses(rhos.size(), std::numeric_limits<double>::infinity());
    // Descending sweep: rho = 1 converges immediately and seeds the rest. The
    // fixed points contract roughly like (1 - rho), so the sweep stops at the
    // first grid point that fails to converge; smaller rho would fail as well.
    std::size_t first_ok = rhos.size();
    for (std::size_t k = rhos.size(); k-- > 0;) {
        try {
            losses[k] = evaluate(rhos[k]);
        } catch (const ConvergenceError&) {
            if (first_ok == rhos.size()) throw;
            break;
        }
        first_ok = k;
    }

    const auto best = static_cast<std::size_t>(std::min_element(losses.begin(), losses.end()) - losses.begin());
    LossMinimum result{rhos[best], losses[best], 0};
    if (rhos.size() == 1) {
        result.evaluations = evaluations;
        return result;
    }

    double a = best > first_ok ? rhos[best - 1] : rhos[best];
    double b = best + 1 < rhos.size() ? rhos[best + 1] : rhos[best];
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    const double width_tol = 1e-5;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = evaluate(x1);
    double f2 = evaluate(x2);
    while (b - a > width_tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = evaluate(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = evaluate(x2);
        }
        if (f1 < result.loss) result = {x1, f1, 0};
        if (f2 < result.loss) result = {x2, f2, 0};
    }
    if (f1 < result.loss) result = {x1, f1, 0};
    if (f2 < result.loss) result = {x2, f2, 0};
    result.evaluations = evaluations;
    return result;
}

}  // namespace rshrink
