#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rshrink {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Finite discrete probability measure on [0, inf), stored sorted by atom.
///
/// Atoms closer than a relative 1e-9 are merged (weights summed) so that
/// eigenvalues coming out of a floating-point eigensolver collapse onto the
/// exact atoms of the population.
class SpectralMeasure {
public:
    /// Throws std::invalid_argument unless weights are positive, sum to one
    /// within 1e-12, atoms are nonnegative and at least one atom is positive.
    SpectralMeasure(std::vector<double> atoms, std::vector<double> weights);

    static SpectralMeasure dirac(double t);
    /// Uniform weights 1/size over the given values (merged).
    static SpectralMeasure from_eigenvalues(std::span<const double> values);

    std::span<const double> atoms() const noexcept { return atoms_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return atoms_.size(); }
    double max_atom() const noexcept { return atoms_.back(); }

    /// M_l = sum_k w_k t_k^l.
    double moment(int ell) const;

private:
    std::vector<double> atoms_;
    std::vector<double> weights_;
};

double moment(const SpectralMeasure& measure, int ell);

enum class ModelKind { explicit_matrix, ar_toeplitz, two_atom };

struct ModelDescriptor {
    ModelKind kind = ModelKind::explicit_matrix;
    double r = 0.0;            // ar_toeplitz
    double a = 0.0, b = 0.0;   // two_atom (before normalization)
    std::string matrix_csv;    // explicit_matrix source path, informational
};

/// Population covariance C_N with (1/N) tr C_N = 1, together with its
/// symmetric PSD square root A_N (so that C_N = A_N A_N).
class PopulationModel {
public:
    /// [C]_{ij} = r^{|i-j|}.
    static PopulationModel ar_toeplitz(Index dim, double r);
    /// diag(a I_{N/2}, b I_{N/2}) rescaled to unit average trace.
    static PopulationModel two_atom(Index dim, double a, double b);
    /// Any symmetric nonnegative-definite matrix; rescaled to unit average trace.
    static PopulationModel from_matrix(Matrix covariance, std::string source = {});

    Index dim() const noexcept { return covariance_.rows(); }
    const Matrix& covariance() const noexcept { return covariance_; }
    const Matrix& sqrt() const noexcept { return sqrt_; }
    /// Ascending eigenvalues of the covariance.
    std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
    const ModelDescriptor& descriptor() const noexcept { return descriptor_; }

private:
    PopulationModel(Matrix covariance, ModelDescriptor descriptor, bool diagonal);

    Matrix covariance_;
    Matrix sqrt_;
    std::vector<double> eigenvalues_;
    ModelDescriptor descriptor_;
};

inline PopulationModel ar_toeplitz(Index dim, double r) { return PopulationModel::ar_toeplitz(dim, r); }
inline PopulationModel two_atom(Index dim, double a, double b) { return PopulationModel::two_atom(dim, a, b); }

SpectralMeasure spectral_measure(const PopulationModel& model);

}  // namespace rshrink
