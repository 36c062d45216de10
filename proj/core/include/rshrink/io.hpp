#pragma once

#include "rshrink/asymptotics.hpp"
#include "rshrink/estimators.hpp"
#include "rshrink/measure.hpp"
#include "rshrink/sampling.hpp"
#include "rshrink/shrinkage.hpp"
#include "rshrink/spectrum.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

namespace rshrink::io {

using Json = nlohmann::json;
namespace fs = std::filesystem;

/// Malformed or unreadable input.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Row-major, comma-separated, no header. Blank lines are skipped; ragged rows,
/// non-numeric or non-finite cells and empty files raise IoError.
Matrix read_matrix_csv(const fs::path& path);
void write_matrix_csv(const fs::path& path, const Matrix& m);

/// Same path with the extension replaced by ".json".
fs::path sidecar_path(const fs::path& csv);

Json to_json(const ModelDescriptor& d, Index dim);
Json to_json(const PopulationModel& model);
Json to_json(const TauLaw& tau);
TauLaw tau_from_json(const Json& j);
/// Relative "matrix_csv" paths are resolved against base_dir.
PopulationModel model_from_json(const Json& j, const fs::path& base_dir = {});
PopulationModel load_model(const fs::path& json_path);

/// CSV of n rows x N columns (row i is sample i) plus sidecar {N, n, seed, model, tau}.
void write_samples(const fs::path& csv, const SampleSet& samples);
/// The sidecar is optional; without it seed = 0, constant tau and no model.
SampleSet read_samples(const fs::path& csv);

Json to_json(const CovEstimate& est);
/// Matrix CSV plus sidecar {kind, rho, iterations, residual}.
void write_estimate(const fs::path& csv, const CovEstimate& est);
CovEstimate read_estimate(const fs::path& csv);

Json to_json(const DensityCurve& curve);
/// CSV with header "x,density" plus sidecar {branch, rho, c, epsilon, atom_location, atom_mass}.
void write_density(const fs::path& csv, const DensityCurve& curve);
DensityCurve read_density(const fs::path& csv);

Json to_json(const AsymptoticParams& p);
Json to_json(const OptimalShrinkage& s);
Json to_json(const ShrinkageSelection& s);

void write_json(const fs::path& path, const Json& j);
Json read_json(const fs::path& path);

}  // namespace rshrink::io
