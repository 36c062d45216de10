#include "rshrink/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rshrink {
namespace {

constexpr double kMergeTolerance = 1e-9;

bool same_atom(double a, double b, double scale) {
    const double gap = std::abs(a - b);
    return gap <= kMergeTolerance * std::max(std::abs(a), std::abs(b)) || gap <= 1e-14 * scale;
}

}  // namespace

SpectralMeasure::SpectralMeasure(std::vector<double> atoms, std::vector<double> weights) {
    if (atoms.empty() || atoms.size() != weights.size()) {
        throw std::invalid_argument("SpectralMeasure: atoms and weights must be nonempty and of equal length");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        if (!(atoms[k] >= 0.0) || !std::isfinite(atoms[k])) {
            throw std::invalid_argument("SpectralMeasure: atoms must be finite and nonnegative");
        }
        if (!(weights[k] > 0.0)) {
            throw std::invalid_argument("SpectralMeasure: weights must be positive");
        }
        total += weights[k];
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("SpectralMeasure: weights must sum to 1");
    }

    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return atoms[i] < atoms[j]; });

    const double scale = *std::max_element(atoms.begin(), atoms.end());
    if (!(scale > 0.0)) {
        throw std::invalid_argument("SpectralMeasure: measure is the Dirac mass at zero");
    }

    for (std::size_t idx : order) {
        const double t = atoms[idx];
        const double w = weights[idx];
        if (!atoms_.empty() && same_atom(atoms_.back(), t, scale)) {
            // weighted mean keeps the first moment exact
            const double merged = weights_.back() + w;
            atoms_.back() = (atoms_.back() * weights_.back() + t * w) / merged;
            weights_.back() = merged;
        } else {
            atoms_.push_back(t);
            weights_.push_back(w);
        }
    }
}

SpectralMeasure SpectralMeasure::dirac(double t) { return SpectralMeasure({t}, {1.0}); }

SpectralMeasure SpectralMeasure::from_eigenvalues(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("SpectralMeasure::from_eigenvalues: empty input");
    }
    const double w = 1.0 / static_cast<double>(values.size());
    std::vector<double> atoms(values.begin(), values.end());
    std::vector<double> weights(values.size(), w);
    return SpectralMeasure(std::move(atoms), std::move(weights));
}

double SpectralMeasure::moment(int ell) const {
    if (ell < 1) throw std::invalid_argument("moment: order must be >= 1");
    double acc = 0.0;
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
        acc += weights_[k] * std::pow(atoms_[k], ell);
    }
    return acc;
}

double moment(const SpectralMeasure& measure, int ell) { return measure.moment(ell); }

PopulationModel::PopulationModel(Matrix covariance, ModelDescriptor descriptor, bool diagonal)
    : covariance_(std::move(covariance)), descriptor_(std::move(descriptor)) {
    const Index n = covariance_.rows();
    if (n < 1 || covariance_.cols() != n) {
        throw std::invalid_argument("PopulationModel: covariance must be a nonempty square matrix");
    }
    const double max_abs = covariance_.cwiseAbs().maxCoeff();
    if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, max_abs)) {
        throw std::invalid_argument("PopulationModel: covariance is not symmetric");
    }
    covariance_ = 0.5 * (covariance_ + covariance_.transpose());

    const double avg_trace = covariance_.trace() / static_cast<double>(n);
    if (!(avg_trace > 0.0)) {
        throw std::invalid_argument("PopulationModel: covariance has nonpositive trace");
    }
    covariance_ /= avg_trace;

    Vector evals;
    if (diagonal) {
        evals = covariance_.diagonal();
        sqrt_ = Matrix::Zero(n, n);
        sqrt_.diagonal() = evals.cwiseMax(0.0).cwiseSqrt();
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance_);
        if (eig.info() != Eigen::Success) {
            throw std::invalid_argument("PopulationModel: eigendecomposition failed");
        }
        evals = eig.eigenvalues();
        const Vector root = evals.cwiseMax(0.0).cwiseSqrt();
        sqrt_ = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
    }
    const double top = evals.maxCoeff();
    eigenvalues_.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        double v = evals(i);
        if (v < -1e-10 * top) {
            throw std::invalid_argument("PopulationModel: covariance is not nonnegative definite");
        }
        eigenvalues_[static_cast<std::size_t>(i)] = std::max(v, 0.0);
    }
    std::sort(eigenvalues_.begin(), eigenvalues_.end());
}

PopulationModel PopulationModel::ar_toeplitz(Index dim, double r) {
    if (dim < 1) throw std::invalid_argument("ar_toeplitz: dimension must be >= 1");
    if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("ar_toeplitz: r must lie in [0, 1)");
    Matrix c(dim, dim);
    for (Index i = 0; i < dim; ++i) {
        for (Index j = 0; j < dim; ++j) {
            c(i, j) = std::pow(r, static_cast<double>(std::abs(i - j)));
        }
    }
    ModelDescriptor d;
    d.kind = ModelKind::ar_toeplitz;
    d.r = r;
    return PopulationModel(std::move(c), d, r == 0.0);
}

PopulationModel PopulationModel::two_atom(Index dim, double a, double b) {
    if (dim < 2 || dim % 2 != 0) throw std::invalid_argument("two_atom: dimension must be even and positive");
    if (!(a >= 0.0 && b >= 0.0) || a + b <= 0.0) {
        throw std::invalid_argument("two_atom: atoms must be nonnegative and not both zero");
    }
    const double mean = 0.5 * (a + b);
    Matrix c = Matrix::Zero(dim, dim);
    c.diagonal().head(dim / 2).setConstant(a / mean);
    c.diagonal().tail(dim / 2).setConstant(b / mean);
    ModelDescriptor d;
    d.kind = ModelKind::two_atom;
    d.a = a;
    d.b = b;
    return PopulationModel(std::move(c), d, true);
}

PopulationModel PopulationModel::from_matrix(Matrix covariance, std::string source) {
    ModelDescriptor d;
    d.kind = ModelKind::explicit_matrix;
    d.matrix_csv = std::move(source);
    const bool diagonal = covariance.rows() == covariance.cols() &&
                          (covariance - Matrix(covariance.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
    return PopulationModel(std::move(covariance), std::move(d), diagonal);
}

SpectralMeasure spectral_measure(const PopulationModel& model) {
    return SpectralMeasure::from_eigenvalues(model.eigenvalues());
}

}  // namespace rshrink
