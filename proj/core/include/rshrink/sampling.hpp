#pragma once

#include "rshrink/measure.hpp"

#include <cstdint>
#include <optional>
#include <random>

namespace rshrink {

/// Law of the radial scales tau_i. Only used to exercise tau-invariance;
/// the robust estimators discard tau altogether.
struct TauLaw {
    enum class Kind { constant, inverse_gamma, log_normal };

    Kind kind = Kind::constant;
    double parameter = 1.0;  // constant value, inverse-gamma shape, or log-normal sigma

    static TauLaw constant(double value = 1.0) { return {Kind::constant, value}; }
    static TauLaw inverse_gamma(double shape) { return {Kind::inverse_gamma, shape}; }
    static TauLaw log_normal(double sigma) { return {Kind::log_normal, sigma}; }

    double draw(std::mt19937_64& engine) const;
    void validate() const;
};

/// SplitMix64 finalizer; used to derive independent substream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// n samples of dimension N stored as the columns of an N x n matrix.
class SampleSet {
public:
    /// Throws std::invalid_argument on an empty matrix or a zero column.
    explicit SampleSet(Matrix data, std::uint64_t seed = 0, TauLaw tau = TauLaw::constant(),
                       std::optional<ModelDescriptor> model = std::nullopt);

    const Matrix& data() const noexcept { return data_; }
    Index dim() const noexcept { return data_.rows(); }
    Index count() const noexcept { return data_.cols(); }
    /// c_N = N / n.
    double ratio() const noexcept { return static_cast<double>(dim()) / static_cast<double>(count()); }
    std::uint64_t seed() const noexcept { return seed_; }
    const TauLaw& tau() const noexcept { return tau_; }
    const std::optional<ModelDescriptor>& model() const noexcept { return model_; }

    /// Columns sqrt(N) x_i / ||x_i||.
    Matrix normalized() const;

private:
    Matrix data_;
    std::uint64_t seed_;
    TauLaw tau_;
    std::optional<ModelDescriptor> model_;
};

/// x_i = sqrt(tau_i) A_N y_i with y_i = sqrt(N) g_i / ||g_i||, g_i standard Gaussian.
/// Column i draws its Gaussian vector from substream derive_seed(seed, i, 0) and
/// its tau from derive_seed(seed, i, 1), so output does not depend on scheduling
/// and changing the tau law leaves the directions untouched.
SampleSet sample(const PopulationModel& model, Index n, const TauLaw& tau, std::uint64_t seed);

}  // namespace rshrink
