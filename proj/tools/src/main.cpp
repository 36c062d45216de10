#include "rshrink/errors.hpp"
#include "rshrink_tools/experiments.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <map>

namespace {

using rshrink::Index;
using rshrink::tools::ExperimentConfig;

struct Flags {
    std::string config, model, rho, out, branch, input, kind;
    Index N = 0;
    std::vector<Index> n;
    int trials = 0, bins = 0, points = 0, grid_points = 0;
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    unsigned threads = 0;
    bool no_hat_oracle = false;
    std::map<std::string, CLI::Option*> opts;

    void add_common(CLI::App* app) {
        opts["config"] = app->add_option("--config", config, "JSON file with any of the flags below as keys");
        opts["model"] = app->add_option("--model", model, "model JSON, JSON file, or ar:R | two_atom:A,B | identity");
        opts["N"] = app->add_option("--N", N, "dimension");
        opts["n"] = app->add_option("--n", n, "sample count (comma-separated list for sweeps)")->delimiter(',');
        opts["rho"] = app->add_option("--rho", rho, "shrinkage parameter");
        opts["seed"] = app->add_option("--seed", seed, "master seed");
        opts["out"] = app->add_option("--out", out, "output directory");
    }
};

void overlay(ExperimentConfig& cfg, const Flags& f) {
    if (f.opts.at("config")->count()) rshrink::tools::apply_json(cfg, rshrink::io::read_json(f.config));
    auto given = [&](const char* name) { return f.opts.count(name) && f.opts.at(name)->count() > 0; };
    if (given("model")) cfg.model = f.model;
    if (given("N")) cfg.N = f.N;
    if (given("n")) cfg.n_list = f.n;
    if (given("rho")) cfg.rho = f.rho;
    if (given("seed")) cfg.seed = f.seed;
    if (given("out")) cfg.out = f.out;
    if (given("trials")) cfg.trials = f.trials;
    if (given("epsilon")) cfg.epsilon = f.epsilon;
    if (given("threads")) cfg.threads = f.threads;
    if (given("branch")) cfg.branch = f.branch;
    if (given("input")) cfg.input = f.input;
    if (given("kind")) cfg.kind = f.kind;
    if (given("bins")) cfg.bins = f.bins;
    if (given("points")) cfg.limit_points = f.points;
    if (given("grid-points")) cfg.grid_points = f.grid_points;
    if (f.no_hat_oracle) cfg.hat_oracle = false;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust shrinkage covariance estimation: experiments and estimators"};
    app.require_subcommand(1);

    Flags density_flags, sweep_flags, estimate_flags;

    auto* density = app.add_subcommand("density", "eigenvalue histogram of one estimate versus its limiting law");
    density_flags.add_common(density);
    density_flags.opts["epsilon"] = density->add_option("--epsilon", density_flags.epsilon, "imaginary offset for the inversion");
    density_flags.opts["branch"] = density->add_option("--branch", density_flags.branch, "hat | check | both")
                                       ->check(CLI::IsMember({"hat", "check", "both"}));
    density_flags.opts["bins"] = density->add_option("--bins", density_flags.bins, "histogram bins");
    density_flags.opts["points"] = density->add_option("--points", density_flags.points, "limit curve grid points");

    auto* sweep = app.add_subcommand("shrinkage-sweep", "Monte Carlo losses and selected shrinkage over n");
    sweep_flags.add_common(sweep);
    sweep_flags.opts["trials"] = sweep->add_option("--trials", sweep_flags.trials, "trials per n");
    sweep_flags.opts["threads"] = sweep->add_option("--threads", sweep_flags.threads, "worker threads (0 = all cores)");
    sweep_flags.opts["grid-points"] = sweep->add_option("--grid-points", sweep_flags.grid_points, "oracle rho grid size");
    sweep->add_flag("--no-hat-oracle", sweep_flags.no_hat_oracle, "skip the oracle loss of the hat estimate");

    auto* estimate = app.add_subcommand("estimate", "estimate a covariance from a CSV of samples");
    estimate_flags.add_common(estimate);
    estimate_flags.opts["input"] = estimate->add_option("--input", estimate_flags.input, "CSV, one sample per row")->required();
    estimate_flags.opts["kind"] = estimate->add_option("--kind", estimate_flags.kind, "abramovich_pascal | chen | linear");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    ExperimentConfig cfg;
    try {
        const auto start = std::chrono::steady_clock::now();
        if (density->parsed()) {
            cfg.model = R"({"type":"two_atom","a":1,"b":5})";
            cfg.N = 256;
            cfg.n_list = {2048};
            cfg.rho = "0.2";
            overlay(cfg, density_flags);
            for (const auto& run : rshrink::tools::cmd_density(cfg)) {
                std::cout << to_string(run.branch) << ": rho=" << run.estimate.rho
                          << " iterations=" << run.estimate.iterations << " residual=" << run.estimate.residual;
                if (run.kolmogorov) std::cout << " kolmogorov=" << *run.kolmogorov;
                if (run.limit && run.limit->atom_mass)
                    std::cout << " atom=" << *run.limit->atom_location << " mass=" << *run.limit->atom_mass;
                std::cout << '\n';
            }
        } else if (sweep->parsed()) {
            cfg.model = "ar:0.7";
            cfg.N = 32;
            cfg.n_list = {8, 16, 32, 64, 128};
            overlay(cfg, sweep_flags);
            const auto result = rshrink::tools::cmd_shrinkage_sweep(cfg);
            for (const auto& t : result.theory) {
                const auto* loss = result.find(t.n, rshrink::tools::metric::loss_check);
                std::cout << "n=" << t.n << " D*=" << t.values.d_star;
                if (loss) std::cout << " mean loss(check)=" << loss->mean;
                std::cout << '\n';
            }
            std::cout << "failures: " << result.failures << '\n';
        } else {
            cfg.rho = "auto";
            overlay(cfg, estimate_flags);
            const auto est = rshrink::tools::cmd_estimate(cfg);
            std::cout << to_string(est.kind) << ": rho=" << est.rho << " iterations=" << est.iterations
                      << " residual=" << est.residual << '\n';
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << "wrote " << cfg.out.string() << " in " << seconds << " s\n";
    } catch (const rshrink::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
