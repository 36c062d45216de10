#include "rshrink/asymptotics.hpp"
#include "rshrink/estimators.hpp"
#include "rshrink/shrinkage.hpp"
#include "rshrink/spectrum.hpp"

#include <benchmark/benchmark.h>

using namespace rshrink;

namespace {

SampleSet ar_samples(Index N, Index n) { return sample(ar_toeplitz(N, 0.7), n, TauLaw::constant(), 1); }

void BM_AbramovichPascal(benchmark::State& state) {
    const auto s = ar_samples(state.range(0), state.range(1));
    const double rho = std::max(0.5, hat_lower_bound(s.dim(), s.count()) + 0.1);
    int iterations = 0;
    for (auto _ : state) {
        const auto est = abramovich_pascal(s, rho);
        iterations = est.iterations;
        benchmark::DoNotOptimize(est.matrix.data());
    }
    state.counters["picard_iterations"] = iterations;
}
BENCHMARK(BM_AbramovichPascal)->Args({32, 8})->Args({32, 128})->Args({256, 2048})->Unit(benchmark::kMillisecond);

void BM_Chen(benchmark::State& state) {
    const auto s = ar_samples(state.range(0), state.range(1));
    int iterations = 0;
    for (auto _ : state) {
        const auto est = chen(s, 0.5);
        iterations = est.iterations;
        benchmark::DoNotOptimize(est.matrix.data());
    }
    state.counters["picard_iterations"] = iterations;
}
BENCHMARK(BM_Chen)->Args({32, 8})->Args({32, 128})->Args({256, 2048})->Unit(benchmark::kMillisecond);

void BM_SelectRhoCheck(benchmark::State& state) {
    const auto s = ar_samples(32, state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(select_rho_check(s).rho);
}
BENCHMARK(BM_SelectRhoCheck)->Arg(8)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_SelectRhoHat(benchmark::State& state) {
    const auto s = ar_samples(32, state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(select_rho_hat(s).rho);
}
BENCHMARK(BM_SelectRhoHat)->Arg(8)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_StieltjesCold(benchmark::State& state) {
    const SpectralMeasure nu({1.0 / 3.0, 5.0 / 3.0}, {0.5, 0.5});
    const LimitingSpectrum spectrum(nu, 0.2, 0.125, state.range(0) == 0 ? Branch::hat : Branch::check);
    for (auto _ : state) benchmark::DoNotOptimize(spectrum.evaluate(Complex(1.0, 1e-4)).m);
}
BENCHMARK(BM_StieltjesCold)->Arg(0)->Arg(1);

void BM_DensityCurve(benchmark::State& state) {
    const SpectralMeasure nu({1.0 / 3.0, 5.0 / 3.0}, {0.5, 0.5});
    const LimitingSpectrum spectrum(nu, 0.2, 0.125, Branch::hat);
    for (auto _ : state) benchmark::DoNotOptimize(density_curve(spectrum, static_cast<int>(state.range(0)), 1e-4).grid.data());
}
BENCHMARK(BM_DensityCurve)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_GammaCheck(benchmark::State& state) {
    const auto nu = spectral_measure(ar_toeplitz(32, 0.7));
    for (auto _ : state) benchmark::DoNotOptimize(gamma_check(nu, 0.3, 1.0).gamma);
}
BENCHMARK(BM_GammaCheck);

void BM_OptimalShrinkage(benchmark::State& state) {
    const auto nu = spectral_measure(ar_toeplitz(32, 0.7));
    for (auto _ : state) benchmark::DoNotOptimize(rho_star_dstar(nu, 0.25).rho_check_star);
}
BENCHMARK(BM_OptimalShrinkage)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
