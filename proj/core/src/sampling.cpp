#include "rshrink/sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace rshrink {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
    return mix64(mix64(mix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

void TauLaw::validate() const {
    if (!(parameter > 0.0) || !std::isfinite(parameter)) {
        throw std::invalid_argument("TauLaw: parameter must be positive and finite");
    }
}

double TauLaw::draw(std::mt19937_64& engine) const {
    switch (kind) {
        case Kind::constant:
            return parameter;
        case Kind::inverse_gamma: {
            std::gamma_distribution<double> gamma(parameter, 1.0);
            double g = 0.0;
            while (!(g > 0.0)) g = gamma(engine);
            return 1.0 / g;
        }
        case Kind::log_normal: {
            std::lognormal_distribution<double> ln(0.0, parameter);
            return ln(engine);
        }
    }
    return parameter;
}

SampleSet::SampleSet(Matrix data, std::uint64_t seed, TauLaw tau, std::optional<ModelDescriptor> model)
    : data_(std::move(data)), seed_(seed), tau_(tau), model_(std::move(model)) {
    if (data_.rows() < 1 || data_.cols() < 1) {
        throw std::invalid_argument("SampleSet: need at least one sample of dimension >= 1");
    }
    for (Index i = 0; i < data_.cols(); ++i) {
        if (!(data_.col(i).squaredNorm() > 0.0)) {
            throw std::invalid_argument("SampleSet: sample " + std::to_string(i) + " is zero");
        }
    }
}

Matrix SampleSet::normalized() const {
    Matrix u = data_;
    const double root_n = std::sqrt(static_cast<double>(dim()));
    for (Index i = 0; i < u.cols(); ++i) {
        u.col(i) *= root_n / u.col(i).norm();
    }
    return u;
}

SampleSet sample(const PopulationModel& model, Index n, const TauLaw& tau, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    tau.validate();
    const Index dim = model.dim();
    const double root_n = std::sqrt(static_cast<double>(dim));

    Matrix y(dim, n);
    Vector scale(n);
    for (Index i = 0; i < n; ++i) {
        const auto column = static_cast<std::uint64_t>(i);
        std::mt19937_64 gauss_engine(derive_seed(seed, column, 0));
        std::normal_distribution<double> normal(0.0, 1.0);
        double norm = 0.0;
        // a zero draw has probability zero; redraw rather than divide by it
        while (!(norm > 0.0)) {
            for (Index k = 0; k < dim; ++k) y(k, i) = normal(gauss_engine);
            norm = y.col(i).norm();
        }
        y.col(i) *= root_n / norm;

        std::mt19937_64 tau_engine(derive_seed(seed, column, 1));
        scale(i) = std::sqrt(tau.draw(tau_engine));
    }

    Matrix x = model.sqrt() * y;
    x *= scale.asDiagonal();
    return SampleSet(std::move(x), seed, tau, model.descriptor());
}

}  // namespace rshrink
