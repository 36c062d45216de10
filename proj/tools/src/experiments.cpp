#include "rshrink_tools/experiments.hpp"

#include "rshrink/errors.hpp"
#include "rshrink/sampling.hpp"
#include "rshrink/shrinkage.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <thread>

namespace rshrink::tools {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_number(const std::string& text, const char* what) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(value))
        throw std::invalid_argument(std::string(what) + ": '" + text + "' is not a number");
    return value;
}

Index single_n(const ExperimentConfig& cfg) {
    if (cfg.n_list.size() != 1) throw std::invalid_argument("exactly one --n value is required");
    return cfg.n_list.front();
}

double fixed_rho(const ExperimentConfig& cfg) {
    if (cfg.rho.empty()) throw std::invalid_argument("--rho is required");
    return parse_number(cfg.rho, "--rho");
}

std::ofstream open_csv(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw io::IoError("cannot write " + path.string());
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    return out;
}

// Runs fn(0..count-1) on a fixed pool; fn must not throw.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) fn(i);
    };
    if (threads <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

struct Stats {
    double mean = kNaN;
    double stderr_ = 0.0;
    int count = 0;
};

Stats summarize(const std::vector<double>& values) {
    Stats s;
    double sum = 0.0;
    for (double v : values)
        if (std::isfinite(v)) {
            sum += v;
            ++s.count;
        }
    if (s.count == 0) return s;
    s.mean = sum / s.count;
    if (s.count > 1) {
        double ss = 0.0;
        for (double v : values)
            if (std::isfinite(v)) ss += (v - s.mean) * (v - s.mean);
        s.stderr_ = std::sqrt(ss / (s.count - 1) / s.count);
    }
    return s;
}

template <class F>
double golden_minimum(F f, double a, double b, double width_tol = 1e-6) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > width_tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? x1 : x2;
}

struct TrialOut {
    bool ok = false;
    std::string message;
    double loss_check = kNaN, loss_hat = kNaN, loss_check_oracle = kNaN, loss_hat_oracle = kNaN;
    double rho_check = kNaN, rho_hat = kNaN, rho_check_oracle = kNaN, rho_hat_oracle = kNaN;
    // clairvoyant loss as a + 2 rho b + rho^2 d
    double ca = 0.0, cb = 0.0, cd = 0.0;
};

TrialOut run_trial(const PopulationModel& model, Index n, const ExperimentConfig& cfg, int trial) {
    TrialOut out;
    try {
        const SampleSet s = sample(model, n, TauLaw::constant(), derive_seed(cfg.seed, static_cast<std::uint64_t>(n),
                                                                            static_cast<std::uint64_t>(trial)));
        const Index N = model.dim();
        const ShrinkageSelection hat = select_rho_hat(s);
        const ShrinkageSelection check = select_rho_check(s);
        out.rho_hat = hat.rho;
        out.rho_check = check.rho;
        out.loss_hat = loss_hat(hat.estimate, model);
        out.loss_check = loss_check(check.estimate, model);

        const auto check_min =
            minimize_loss(s, model, EstimatorKind::chen, default_rho_grid(EstimatorKind::chen, N, n, cfg.grid_points));
        out.rho_check_oracle = check_min.rho;
        out.loss_check_oracle = check_min.loss;
        if (cfg.hat_oracle) {
            const auto hat_min = minimize_loss(s, model, EstimatorKind::abramovich_pascal,
                                               default_rho_grid(EstimatorKind::abramovich_pascal, N, n, cfg.grid_points));
            out.rho_hat_oracle = hat_min.rho;
            out.loss_hat_oracle = hat_min.loss;
        }

        const Matrix w = clairvoyant(s, model, 0.0).matrix;
        const Matrix bias = w - model.covariance();
        Matrix pull = -w;
        pull.diagonal().array() += 1.0;
        const double dim = static_cast<double>(N);
        out.ca = bias.squaredNorm() / dim;
        out.cb = (bias.array() * pull.array()).sum() / dim;
        out.cd = pull.squaredNorm() / dim;
        out.ok = true;
    } catch (const std::exception& e) {
        out.message = "n=" + std::to_string(n) + " trial=" + std::to_string(trial) + ": " + e.what();
    }
    return out;
}

TheoryRow theory_row(const SpectralMeasure& nu, Index N, Index n) {
    TheoryRow row;
    row.n = n;
    row.c = static_cast<double>(N) / static_cast<double>(n);
    try {
        row.values = rho_star_dstar(nu, row.c);
    } catch (const NumericalError&) {
        const double m2 = nu.moment(2);
        row.values.rho_star = row.c / (row.c + m2 - 1.0);
        row.values.d_star = row.c * (m2 - 1.0) / (row.c + m2 - 1.0);
        try {
            row.values.rho_hat_star = f_hat_inverse(nu, row.values.rho_star, row.c);
        } catch (const NumericalError&) {
            row.values.rho_hat_star = kNaN;
            row.rho_hat_ok = false;
        }
        try {
            row.values.rho_check_star = f_check_inverse(nu, row.values.rho_star, row.c);
        } catch (const NumericalError&) {
            row.values.rho_check_star = kNaN;
            row.rho_check_ok = false;
        }
    }
    return row;
}

io::Json number_or_null(double x) { return std::isfinite(x) ? io::Json(x) : io::Json(nullptr); }

}  // namespace

void ExperimentConfig::validate() const {
    if (trials < 1) throw std::invalid_argument("--trials must be at least 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("--epsilon must be positive");
    if (branch != "hat" && branch != "check" && branch != "both")
        throw std::invalid_argument("--branch must be hat, check or both");
    if (grid_points < 2) throw std::invalid_argument("grid_points must be at least 2");
    if (bins < 1) throw std::invalid_argument("bins must be at least 1");
    if (limit_points < 2) throw std::invalid_argument("limit_points must be at least 2");
    if (N && *N < 1) throw std::invalid_argument("--N must be positive");
    for (Index n : n_list)
        if (n < 1) throw std::invalid_argument("--n values must be positive");
}

void apply_json(ExperimentConfig& cfg, const io::Json& j) {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [raw_key, value] : j.items()) {
        std::string key = raw_key;
        std::replace(key.begin(), key.end(), '-', '_');
        try {
            if (key == "model") cfg.model = value.is_string() ? value.get<std::string>() : value.dump();
            else if (key == "N") cfg.N = value.get<Index>();
            else if (key == "n") cfg.n_list = value.is_array() ? value.get<std::vector<Index>>() : std::vector<Index>{value.get<Index>()};
            else if (key == "rho") cfg.rho = value.is_string() ? value.get<std::string>() : value.dump();
            else if (key == "trials") cfg.trials = value.get<int>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "epsilon") cfg.epsilon = value.get<double>();
            else if (key == "out") cfg.out = value.get<std::string>();
            else if (key == "threads") cfg.threads = value.get<unsigned>();
            else if (key == "branch") cfg.branch = value.get<std::string>();
            else if (key == "input") cfg.input = value.get<std::string>();
            else if (key == "kind") cfg.kind = value.get<std::string>();
            else if (key == "grid_points") cfg.grid_points = value.get<int>();
            else if (key == "bins") cfg.bins = value.get<int>();
            else if (key == "limit_points") cfg.limit_points = value.get<int>();
            else if (key == "hat_oracle") cfg.hat_oracle = value.get<bool>();
            else throw std::invalid_argument("unknown config key '" + raw_key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument("config key '" + raw_key + "': " + e.what());
        }
    }
}

PopulationModel resolve_model(const ExperimentConfig& cfg) {
    const std::string& spec = cfg.model;
    if (spec.empty()) throw std::invalid_argument("--model is required");
    io::Json j;
    fs::path base;
    const auto first = spec.find_first_not_of(" \t\n");
    if (first != std::string::npos && spec[first] == '{') {
        try {
            j = io::Json::parse(spec);
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(std::string("--model: ") + e.what());
        }
    } else if (spec == "identity") {
        j = {{"type", "ar"}, {"r", 0.0}};
    } else if (spec.rfind("ar:", 0) == 0) {
        j = {{"type", "ar"}, {"r", parse_number(spec.substr(3), "--model ar:R")}};
    } else if (spec.rfind("two_atom:", 0) == 0) {
        const std::string rest = spec.substr(9);
        const auto comma = rest.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("--model two_atom:A,B needs two values");
        j = {{"type", "two_atom"},
             {"a", parse_number(rest.substr(0, comma), "--model two_atom:A,B")},
             {"b", parse_number(rest.substr(comma + 1), "--model two_atom:A,B")}};
    } else {
        j = io::read_json(spec);
        base = fs::path(spec).parent_path();
    }
    if (!j.is_object()) throw std::invalid_argument("--model must describe a JSON object");
    if (cfg.N) {
        if (j.value("type", "") == "explicit") {
            if (j.contains("n") && j["n"].get<Index>() != *cfg.N)
                throw std::invalid_argument("--N conflicts with the explicit model size");
        }
        j["n"] = *cfg.N;
    }
    if (!j.contains("n") && j.value("type", "") != "explicit")
        throw std::invalid_argument("model dimension missing: pass --N or an 'n' field");
    return io::model_from_json(j, base);
}

Histogram histogram(const std::vector<double>& values, int bins) {
    if (values.empty()) throw std::invalid_argument("histogram: no values");
    if (bins < 1) throw std::invalid_argument("histogram: need at least one bin");
    auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    double lo = *mn, hi = *mx;
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
        lo -= 0.05;
        hi += 0.05;
    }
    const double width = (hi - lo) / bins;
    Histogram h;
    h.count.assign(static_cast<std::size_t>(bins), 0);
    for (double v : values) {
        auto k = static_cast<long>(std::floor((v - lo) / width));
        k = std::clamp(k, 0L, static_cast<long>(bins) - 1);
        ++h.count[static_cast<std::size_t>(k)];
    }
    const double total = static_cast<double>(values.size());
    for (int k = 0; k < bins; ++k) {
        h.left.push_back(lo + width * k);
        h.right.push_back(k + 1 == bins ? hi : lo + width * (k + 1));
        h.density.push_back(static_cast<double>(h.count[static_cast<std::size_t>(k)]) / (total * width));
    }
    return h;
}

std::vector<DensityRun> run_density(const ExperimentConfig& cfg) {
    cfg.validate();
    const PopulationModel model = resolve_model(cfg);
    const Index n = single_n(cfg);
    const double rho = fixed_rho(cfg);
    const SampleSet samples = sample(model, n, TauLaw::constant(), cfg.seed);

    std::vector<Branch> branches;
    if (cfg.branch != "check") branches.push_back(Branch::hat);
    if (cfg.branch != "hat") branches.push_back(Branch::check);

    std::vector<DensityRun> runs;
    for (Branch branch : branches) {
        DensityRun run;
        run.branch = branch;
        run.estimate = branch == Branch::hat ? abramovich_pascal(samples, rho) : chen(samples, rho);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(run.estimate.matrix, Eigen::EigenvaluesOnly);
        run.eigenvalues.assign(eig.eigenvalues().data(), eig.eigenvalues().data() + eig.eigenvalues().size());
        run.hist = histogram(run.eigenvalues, cfg.bins);
        if (rho < 1.0) {
            const LimitingSpectrum limit(spectral_measure(model), rho, samples.ratio(), branch);
            run.limit = density_curve(limit, cfg.limit_points, cfg.epsilon);
            run.kolmogorov = kolmogorov_distance(run.eigenvalues, *run.limit);
        }
        runs.push_back(std::move(run));
    }
    return runs;
}

std::vector<DensityRun> cmd_density(const ExperimentConfig& cfg) {
    auto runs = run_density(cfg);
    for (const auto& run : runs) {
        const fs::path dir = runs.size() > 1 ? cfg.out / std::string(to_string(run.branch)) : cfg.out;
        auto hist = open_csv(dir / "hist.csv");
        hist << "bin_left,bin_right,count,density\n";
        for (std::size_t k = 0; k < run.hist.count.size(); ++k)
            hist << run.hist.left[k] << ',' << run.hist.right[k] << ',' << run.hist.count[k] << ','
                 << run.hist.density[k] << '\n';
        auto eig = open_csv(dir / "eigenvalues.csv");
        eig << "eigenvalue\n";
        for (double v : run.eigenvalues) eig << v << '\n';
        if (run.limit) {
            io::write_density(dir / "limit.csv", *run.limit);
        } else {
            std::cerr << "warning: rho = 1 makes the limiting law a point mass at 1; limit.csv not written\n";
        }
    }
    return runs;
}

const SweepRow* SweepResult::find(Index n, const std::string& name) const {
    for (const auto& row : rows)
        if (row.n == n && row.metric == name) return &row;
    return nullptr;
}

SweepResult run_shrinkage_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.n_list.empty()) throw std::invalid_argument("shrinkage sweep needs at least one --n");
    const PopulationModel model = resolve_model(cfg);
    const SpectralMeasure nu = spectral_measure(model);
    const Index N = model.dim();

    SweepResult result;
    for (Index n : cfg.n_list) {
        std::vector<TrialOut> trials(static_cast<std::size_t>(cfg.trials));
        parallel_for(trials.size(), cfg.threads,
                     [&](std::size_t t) { trials[t] = run_trial(model, n, cfg, static_cast<int>(t)); });

        std::vector<const TrialOut*> ok;
        for (const auto& t : trials) {
            if (t.ok) ok.push_back(&t);
            else {
                ++result.failures;
                result.failure_messages.push_back(t.message);
            }
        }

        // clairvoyant rho minimizing the Monte Carlo average loss
        double rho_o = kNaN;
        if (!ok.empty()) {
            double a = 0.0, b = 0.0, d = 0.0;
            for (const auto* t : ok) {
                a += t->ca;
                b += t->cb;
                d += t->cd;
            }
            auto avg = [&](double r) { return (a + 2.0 * r * b + r * r * d) / static_cast<double>(ok.size()); };
            const auto grid = default_rho_grid(EstimatorKind::clairvoyant, N, n, cfg.grid_points);
            std::size_t best = 0;
            for (std::size_t k = 1; k < grid.size(); ++k)
                if (avg(grid[k]) < avg(grid[best])) best = k;
            const double lo = best > 0 ? grid[best - 1] : grid[best];
            const double hi = best + 1 < grid.size() ? grid[best + 1] : grid[best];
            rho_o = hi > lo ? golden_minimum(avg, lo, hi) : grid[best];
            if (avg(grid[best]) < avg(rho_o)) rho_o = grid[best];
        }
        result.rho_clairvoyant.push_back(rho_o);

        auto add = [&](const char* name, auto field) {
            std::vector<double> values;
            for (const auto* t : ok) values.push_back(field(*t));
            const Stats s = summarize(values);
            if (s.count > 0) result.rows.push_back({n, name, s.mean, s.stderr_, s.count});
        };
        add(metric::loss_check, [](const TrialOut& t) { return t.loss_check; });
        add(metric::loss_hat, [](const TrialOut& t) { return t.loss_hat; });
        add(metric::loss_check_oracle, [](const TrialOut& t) { return t.loss_check_oracle; });
        add(metric::loss_hat_oracle, [](const TrialOut& t) { return t.loss_hat_oracle; });
        add(metric::loss_clairvoyant,
            [&](const TrialOut& t) { return t.ca + 2.0 * rho_o * t.cb + rho_o * rho_o * t.cd; });
        add(metric::rho_check, [](const TrialOut& t) { return t.rho_check; });
        add(metric::rho_hat, [](const TrialOut& t) { return t.rho_hat; });
        add(metric::rho_check_oracle, [](const TrialOut& t) { return t.rho_check_oracle; });
        add(metric::rho_hat_oracle, [](const TrialOut& t) { return t.rho_hat_oracle; });

        result.theory.push_back(theory_row(nu, N, n));
    }
    return result;
}

SweepResult cmd_shrinkage_sweep(const ExperimentConfig& cfg) {
    SweepResult result = run_shrinkage_sweep(cfg);

    auto sweep = open_csv(cfg.out / "sweep.csv");
    sweep << "n,metric,mean,stderr,trials\n";
    for (const auto& r : result.rows) sweep << r.n << ',' << r.metric << ',' << r.mean << ',' << r.stderr_ << ',' << r.trials << '\n';

    auto theory = open_csv(cfg.out / "theory.csv");
    theory << "n,c,rho_star,d_star,rho_hat_star,rho_check_star\n";
    for (const auto& t : result.theory)
        theory << t.n << ',' << t.c << ',' << t.values.rho_star << ',' << t.values.d_star << ','
               << t.values.rho_hat_star << ',' << t.values.rho_check_star << '\n';

    auto rho = open_csv(cfg.out / "rho.csv");
    rho << "n,rho_hat,rho_hat_stderr,rho_check,rho_check_stderr,rho_hat_oracle,rho_check_oracle,rho_clairvoyant,"
           "rho_star,rho_hat_star,rho_check_star\n";
    auto cell = [](const SweepRow* r, bool err) { return r ? (err ? r->stderr_ : r->mean) : kNaN; };
    for (std::size_t k = 0; k < result.theory.size(); ++k) {
        const auto& t = result.theory[k];
        rho << t.n << ',' << cell(result.find(t.n, metric::rho_hat), false) << ','
            << cell(result.find(t.n, metric::rho_hat), true) << ',' << cell(result.find(t.n, metric::rho_check), false)
            << ',' << cell(result.find(t.n, metric::rho_check), true) << ','
            << cell(result.find(t.n, metric::rho_hat_oracle), false) << ','
            << cell(result.find(t.n, metric::rho_check_oracle), false) << ',' << result.rho_clairvoyant[k] << ','
            << t.values.rho_star << ',' << t.values.rho_hat_star << ',' << t.values.rho_check_star << '\n';
    }

    io::Json summary = {{"model", io::to_json(resolve_model(cfg))},
                        {"n", cfg.n_list},
                        {"trials", cfg.trials},
                        {"seed", cfg.seed},
                        {"hat_oracle", cfg.hat_oracle},
                        {"failures", result.failures},
                        {"failure_messages", result.failure_messages}};
    io::Json clair = io::Json::array();
    for (double r : result.rho_clairvoyant) clair.push_back(number_or_null(r));
    summary["rho_clairvoyant"] = clair;
    io::write_json(cfg.out / "summary.json", summary);
    return result;
}

CovEstimate cmd_estimate(const ExperimentConfig& cfg) {
    if (cfg.input.empty()) throw std::invalid_argument("--input is required");
    const SampleSet samples = io::read_samples(cfg.input);
    const EstimatorKind kind = estimator_kind_from_string(cfg.kind);
    if (kind == EstimatorKind::clairvoyant)
        throw std::invalid_argument("clairvoyant needs the true covariance and is not available here");

    CovEstimate est;
    io::Json diagnostics;
    if (cfg.rho == "auto") {
        if (kind == EstimatorKind::linear) throw std::invalid_argument("rho=auto is defined for abramovich_pascal and chen only");
        const ShrinkageSelection sel =
            kind == EstimatorKind::abramovich_pascal ? select_rho_hat(samples) : select_rho_check(samples);
        est = sel.estimate;
        diagnostics = io::to_json(est);
        io::Json sj = io::to_json(sel);
        sj.erase("estimate");
        diagnostics["selection"] = sj;
    } else {
        const double rho = fixed_rho(cfg);
        switch (kind) {
            case EstimatorKind::abramovich_pascal: est = abramovich_pascal(samples, rho); break;
            case EstimatorKind::chen: est = chen(samples, rho); break;
            default: est = linear_combine(samples, rho); break;
        }
        diagnostics = io::to_json(est);
    }
    io::write_matrix_csv(cfg.out / "estimate.csv", est.matrix);
    io::write_json(cfg.out / "estimate.json", diagnostics);
    return est;
}

}  // namespace rshrink::tools
