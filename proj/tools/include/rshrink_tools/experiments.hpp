#pragma once

#include "rshrink/asymptotics.hpp"
#include "rshrink/estimators.hpp"
#include "rshrink/io.hpp"
#include "rshrink/spectrum.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rshrink::tools {

namespace fs = std::filesystem;

struct ExperimentConfig {
    /// JSON text, a path to a JSON file, or a shorthand: "ar:R", "two_atom:A,B", "identity".
    std::string model;
    std::optional<Index> N;
    std::vector<Index> n_list;
    /// A number, or "auto" for data-driven selection (estimate only).
    std::string rho;
    int trials = 1000;
    std::uint64_t seed = 1;
    double epsilon = 1e-4;
    fs::path out = "out";
    unsigned threads = 1;  // 0 selects the hardware concurrency
    std::string branch = "hat";  // hat | check | both
    fs::path input;
    std::string kind = "abramovich_pascal";
    int grid_points = 64;
    int bins = 60;
    int limit_points = 4000;
    bool hat_oracle = true;

    void validate() const;
};

/// Applies the keys of a JSON config object (same names as the CLI flags, with
/// dashes or underscores) on top of cfg.
void apply_json(ExperimentConfig& cfg, const io::Json& j);

/// Resolves the model description, overriding its dimension with cfg.N when set.
PopulationModel resolve_model(const ExperimentConfig& cfg);

struct Histogram {
    std::vector<double> left, right;
    std::vector<long> count;
    std::vector<double> density;
};

/// Equal-width bins over [min, max] of values; density integrates to one.
Histogram histogram(const std::vector<double>& values, int bins);

struct DensityRun {
    Branch branch = Branch::hat;
    CovEstimate estimate;
    std::vector<double> eigenvalues;  // ascending
    Histogram hist;
    std::optional<DensityCurve> limit;  // absent for rho = 1
    std::optional<double> kolmogorov;
};

/// One SampleSet, one estimate per requested branch, histogram and limit per branch.
std::vector<DensityRun> run_density(const ExperimentConfig& cfg);
/// Writes hist.csv, eigenvalues.csv, limit.csv and limit.json (in hat/ and check/ for both).
std::vector<DensityRun> cmd_density(const ExperimentConfig& cfg);

struct SweepRow {
    Index n = 0;
    std::string metric;
    double mean = 0.0;
    double stderr_ = 0.0;
    int trials = 0;
};

struct TheoryRow {
    Index n = 0;
    double c = 0.0;
    OptimalShrinkage values;
    bool rho_hat_ok = true;
    bool rho_check_ok = true;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<TheoryRow> theory;
    /// Clairvoyant rho minimizing the Monte Carlo average loss, per n.
    std::vector<double> rho_clairvoyant;
    int failures = 0;
    std::vector<std::string> failure_messages;

    /// nullptr when absent.
    const SweepRow* find(Index n, const std::string& metric) const;
};

/// Sweep metric names.
namespace metric {
inline constexpr const char* loss_check = "loss_check";
inline constexpr const char* loss_hat = "loss_hat";
inline constexpr const char* loss_check_oracle = "loss_check_oracle";
inline constexpr const char* loss_hat_oracle = "loss_hat_oracle";
inline constexpr const char* loss_clairvoyant = "loss_clairvoyant";
inline constexpr const char* rho_check = "rho_check";
inline constexpr const char* rho_hat = "rho_hat";
inline constexpr const char* rho_check_oracle = "rho_check_oracle";
inline constexpr const char* rho_hat_oracle = "rho_hat_oracle";
}  // namespace metric

/// Trial t at size n draws its samples from derive_seed(seed, n, t), so the
/// result does not depend on the thread count.
SweepResult run_shrinkage_sweep(const ExperimentConfig& cfg);
/// Writes sweep.csv, rho.csv, theory.csv and summary.json.
SweepResult cmd_shrinkage_sweep(const ExperimentConfig& cfg);

/// Reads cfg.input, writes estimate.csv and estimate.json into cfg.out.
CovEstimate cmd_estimate(const ExperimentConfig& cfg);

}  // namespace rshrink::tools
