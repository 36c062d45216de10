#include "rshrink/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string_view>
#include <vector>

namespace rshrink::io {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_cell(std::string_view cell, const fs::path& path, std::size_t line) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || ec != std::errc{} || end != cell.data() + cell.size() || !std::isfinite(value)) {
        throw IoError(path.string() + ":" + std::to_string(line) + ": bad numeric cell '" + std::string(cell) + "'");
    }
    return value;
}

std::vector<std::vector<double>> read_rows(const fs::path& path, bool skip_header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t number = 0;
    bool header_pending = skip_header;
    while (std::getline(in, line)) {
        ++number;
        const std::string_view body = trim(line);
        if (body.empty()) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const auto comma = body.find(',', start);
            row.push_back(parse_cell(body.substr(start, comma - start), path, number));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw IoError(path.string() + ":" + std::to_string(number) + ": expected " +
                          std::to_string(rows.front().size()) + " columns, got " + std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError(path.string() + ": no data rows");
    return rows;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    return out;
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

template <class T>
T get(const Json& j, const char* key) {
    if (!j.contains(key)) throw IoError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("bad field '") + key + "': " + e.what());
    }
}

}  // namespace

Matrix read_matrix_csv(const fs::path& path) {
    const auto rows = read_rows(path, false);
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
    auto out = open_out(path);
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
        out << '\n';
    }
}

fs::path sidecar_path(const fs::path& csv) {
    fs::path p = csv;
    p.replace_extension(".json");
    return p;
}

void write_json(const fs::path& path, const Json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

Json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

Json to_json(const ModelDescriptor& d, Index dim) {
    switch (d.kind) {
        case ModelKind::ar_toeplitz: return {{"type", "ar"}, {"n", dim}, {"r", d.r}};
        case ModelKind::two_atom: return {{"type", "two_atom"}, {"n", dim}, {"a", d.a}, {"b", d.b}};
        case ModelKind::explicit_matrix: return {{"type", "explicit"}, {"n", dim}, {"matrix_csv", d.matrix_csv}};
    }
    return {};
}

Json to_json(const PopulationModel& model) { return to_json(model.descriptor(), model.dim()); }

Json to_json(const TauLaw& tau) {
    switch (tau.kind) {
        case TauLaw::Kind::constant: return {{"law", "constant"}, {"value", tau.parameter}};
        case TauLaw::Kind::inverse_gamma: return {{"law", "inverse_gamma"}, {"shape", tau.parameter}};
        case TauLaw::Kind::log_normal: return {{"law", "log_normal"}, {"sigma", tau.parameter}};
    }
    return {};
}

TauLaw tau_from_json(const Json& j) {
    const auto law = get<std::string>(j, "law");
    TauLaw tau;
    if (law == "constant") tau = TauLaw::constant(get<double>(j, "value"));
    else if (law == "inverse_gamma") tau = TauLaw::inverse_gamma(get<double>(j, "shape"));
    else if (law == "log_normal") tau = TauLaw::log_normal(get<double>(j, "sigma"));
    else throw IoError("unknown tau law '" + law + "'");
    tau.validate();
    return tau;
}

PopulationModel model_from_json(const Json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw IoError("model must be a JSON object");
    const auto type = get<std::string>(j, "type");
    if (type == "ar") return PopulationModel::ar_toeplitz(get<Index>(j, "n"), get<double>(j, "r"));
    if (type == "two_atom")
        return PopulationModel::two_atom(get<Index>(j, "n"), get<double>(j, "a"), get<double>(j, "b"));
    if (type == "explicit") {
        fs::path source = get<std::string>(j, "matrix_csv");
        if (source.is_relative() && !base_dir.empty()) source = base_dir / source;
        Matrix m = read_matrix_csv(source);
        if (j.contains("n") && get<Index>(j, "n") != m.rows())
            throw IoError("explicit model: 'n' does not match the matrix size");
        return PopulationModel::from_matrix(std::move(m), source.string());
    }
    throw IoError("unknown model type '" + type + "'");
}

PopulationModel load_model(const fs::path& json_path) {
    return model_from_json(read_json(json_path), json_path.parent_path());
}

void write_samples(const fs::path& csv, const SampleSet& samples) {
    write_matrix_csv(csv, samples.data().transpose());
    Json side = {{"N", samples.dim()},
                 {"n", samples.count()},
                 {"seed", samples.seed()},
                 {"tau", to_json(samples.tau())},
                 {"model", nullptr}};
    if (samples.model()) side["model"] = to_json(*samples.model(), samples.dim());
    write_json(sidecar_path(csv), side);
}

SampleSet read_samples(const fs::path& csv) {
    Matrix data = read_matrix_csv(csv).transpose();
    const fs::path side = sidecar_path(csv);
    if (!fs::exists(side)) return SampleSet(std::move(data));
    const Json j = read_json(side);
    if (get<Index>(j, "N") != data.rows() || get<Index>(j, "n") != data.cols())
        throw IoError(side.string() + ": N/n do not match the CSV shape");
    std::optional<ModelDescriptor> model;
    if (j.contains("model") && !j["model"].is_null())
        model = model_from_json(j["model"], csv.parent_path()).descriptor();
    return SampleSet(std::move(data), get<std::uint64_t>(j, "seed"), tau_from_json(j.at("tau")), model);
}

Json to_json(const CovEstimate& est) {
    return {{"kind", std::string(to_string(est.kind))},
            {"rho", est.rho},
            {"iterations", est.iterations},
            {"residual", finite_or_null(est.residual)}};
}

void write_estimate(const fs::path& csv, const CovEstimate& est) {
    write_matrix_csv(csv, est.matrix);
    write_json(sidecar_path(csv), to_json(est));
}

CovEstimate read_estimate(const fs::path& csv) {
    CovEstimate est;
    est.matrix = read_matrix_csv(csv);
    const Json j = read_json(sidecar_path(csv));
    try {
        est.kind = estimator_kind_from_string(get<std::string>(j, "kind"));
    } catch (const std::invalid_argument& e) {
        throw IoError(e.what());
    }
    est.rho = get<double>(j, "rho");
    est.iterations = get<int>(j, "iterations");
    est.residual = j.at("residual").is_null() ? std::numeric_limits<double>::infinity() : get<double>(j, "residual");
    return est;
}

Json to_json(const DensityCurve& curve) {
    Json j = {{"branch", std::string(to_string(curve.branch))},
              {"rho", curve.rho},
              {"c", curve.c},
              {"epsilon", curve.epsilon},
              {"atom_location", nullptr},
              {"atom_mass", nullptr}};
    if (curve.atom_location) j["atom_location"] = *curve.atom_location;
    if (curve.atom_mass) j["atom_mass"] = *curve.atom_mass;
    return j;
}

void write_density(const fs::path& csv, const DensityCurve& curve) {
    auto out = open_out(csv);
    out << "x,density\n";
    for (std::size_t k = 0; k < curve.grid.size(); ++k) out << curve.grid[k] << ',' << curve.density[k] << '\n';
    out.close();
    write_json(sidecar_path(csv), to_json(curve));
}

DensityCurve read_density(const fs::path& csv) {
    DensityCurve curve;
    for (const auto& row : read_rows(csv, true)) {
        if (row.size() != 2) throw IoError(csv.string() + ": expected columns x,density");
        curve.grid.push_back(row[0]);
        curve.density.push_back(row[1]);
    }
    const Json j = read_json(sidecar_path(csv));
    try {
        curve.branch = branch_from_string(get<std::string>(j, "branch"));
    } catch (const std::invalid_argument& e) {
        throw IoError(e.what());
    }
    curve.rho = get<double>(j, "rho");
    curve.c = get<double>(j, "c");
    curve.epsilon = get<double>(j, "epsilon");
    if (!j.at("atom_location").is_null()) curve.atom_location = get<double>(j, "atom_location");
    if (!j.at("atom_mass").is_null()) curve.atom_mass = get<double>(j, "atom_mass");
    return curve;
}

Json to_json(const AsymptoticParams& p) {
    return {{"rho", p.rho},         {"c", p.c},         {"gamma", p.gamma},       {"F_at_gamma", p.F_at_gamma},
            {"T_rho", p.T_rho},     {"f", p.f_value},   {"residual", p.residual}};
}

Json to_json(const OptimalShrinkage& s) {
    return {{"rho_star", s.rho_star},
            {"d_star", s.d_star},
            {"rho_hat_star", s.rho_hat_star},
            {"rho_check_star", s.rho_check_star}};
}

Json to_json(const ShrinkageSelection& s) {
    return {{"rho", s.rho},
            {"rhs", finite_or_null(s.rhs)},
            {"lhs_residual", finite_or_null(s.lhs_residual)},
            {"solver_iterations", s.solver_iterations},
            {"root_found", s.root_found},
            {"estimate", to_json(s.estimate)}};
}

}  // namespace rshrink::io
