#pragma once

#include "rshrink/measure.hpp"

#include "rshrink/sampling.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

namespace test_support {

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("rshrink_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline rshrink::SpectralMeasure two_atom_measure() { return rshrink::SpectralMeasure({1.0 / 3.0, 5.0 / 3.0}, {0.5, 0.5}); }

// Random finite discrete measure with mean one.
inline rshrink::SpectralMeasure random_measure(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count(1, 4);
    std::uniform_real_distribution<double> atom(0.1, 4.0), weight(0.2, 1.0);
    const int k = count(rng);
    std::vector<double> atoms, weights;
    double wsum = 0.0;
    for (int i = 0; i < k; ++i) {
        atoms.push_back(atom(rng));
        weights.push_back(weight(rng));
        wsum += weights.back();
    }
    double mean = 0.0;
    for (int i = 0; i < k; ++i) {
        weights[static_cast<std::size_t>(i)] /= wsum;
        mean += weights[static_cast<std::size_t>(i)] * atoms[static_cast<std::size_t>(i)];
    }
    for (auto& a : atoms) a /= mean;
    weights.back() = 1.0;
    for (int i = 0; i + 1 < k; ++i) weights.back() -= weights[static_cast<std::size_t>(i)];
    return rshrink::SpectralMeasure(atoms, weights);
}

// Right-hand side of the defining equations with explicit inverses.
inline rshrink::Matrix reference_rhs(const rshrink::SampleSet& s, const rshrink::Matrix& m, double rho,
                                     bool trace_normalize) {
    using rshrink::Index;
    using rshrink::Matrix;
    const Index N = s.dim(), n = s.count();
    const Matrix inv = m.inverse();
    Matrix acc = Matrix::Zero(N, N);
    for (Index i = 0; i < n; ++i) {
        const rshrink::Vector x = s.data().col(i);
        const double q = x.dot(inv * x) / static_cast<double>(N);
        acc += x * x.transpose() / q;
    }
    Matrix b = (1.0 - rho) * acc / static_cast<double>(n) + rho * Matrix::Identity(N, N);
    if (trace_normalize) b *= static_cast<double>(N) / b.trace();
    return b;
}

inline double relative(const rshrink::Matrix& a, const rshrink::Matrix& b) { return (a - b).norm() / a.norm(); }

inline double hat_sum(const rshrink::SpectralMeasure& nu, double rho, double g) {
    double s = 0.0;
    for (std::size_t k = 0; k < nu.size(); ++k)
        s += nu.weights()[k] * nu.atoms()[k] / (g * rho + (1 - rho) * nu.atoms()[k]);
    return s;
}

// plain bisection on the decreasing map g -> hat_sum
inline double bisect_gamma_hat(const rshrink::SpectralMeasure& nu, double rho) {
    double lo = 1e-12, hi = 1e6;
    for (int i = 0; i < 300; ++i) {
        const double mid = 0.5 * (lo + hi);
        (hat_sum(nu, rho, mid) > 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double naive_F(double x, double rho, double c) {
    const double b = rho - c * (1 - rho);
    return b / 2 + std::sqrt(b * b / 4 + (1 - rho) / x);
}

inline double check_sum(const rshrink::SpectralMeasure& nu, double rho, double c, double x) {
    const double a = (1 - rho) / ((1 - rho) * c + naive_F(x, rho, c));
    double s = 0.0;
    for (std::size_t k = 0; k < nu.size(); ++k) s += nu.weights()[k] * nu.atoms()[k] / (x * rho + a * nu.atoms()[k]);
    return s;
}

}  // namespace test_support
