#include "rshrink_tools/experiments.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>
#include <numeric>

using namespace rshrink;
using namespace rshrink::tools;

TEST_CASE("histogram") {
    const auto h = histogram({0.0, 0.1, 0.5, 1.0, 1.0}, 4);
    CHECK(std::accumulate(h.count.begin(), h.count.end(), 0L) == 5);
    CHECK(h.left.front() == 0.0);
    CHECK(h.right.back() == 1.0);
    CHECK(h.count.back() == 2);
    double mass = 0.0;
    for (std::size_t k = 0; k < h.count.size(); ++k) mass += h.density[k] * (h.right[k] - h.left[k]);
    CHECK(mass == doctest::Approx(1.0));
    const auto flat = histogram({1.0, 1.0, 1.0}, 3);
    CHECK(std::accumulate(flat.count.begin(), flat.count.end(), 0L) == 3);
}

TEST_CASE("model resolution") {
    ExperimentConfig cfg;
    cfg.model = "ar:0.7";
    cfg.N = 10;
    CHECK(resolve_model(cfg).covariance()(0, 2) == doctest::Approx(0.49));
    cfg.model = "two_atom:1,5";
    CHECK(spectral_measure(resolve_model(cfg)).size() == 2);
    cfg.model = "identity";
    CHECK(resolve_model(cfg).covariance() == Matrix::Identity(10, 10));
    cfg.model = R"({"type":"ar","r":0.2,"n":4})";
    CHECK(resolve_model(cfg).dim() == 10);
    cfg.N.reset();
    CHECK(resolve_model(cfg).dim() == 4);
    cfg.model = "ar:0.5";
    CHECK_THROWS_AS(resolve_model(cfg), std::invalid_argument);
    cfg.model = "";
    CHECK_THROWS_AS(resolve_model(cfg), std::invalid_argument);
}

TEST_CASE("JSON config") {
    ExperimentConfig cfg;
    apply_json(cfg, io::Json::parse(R"({"model":{"type":"ar","r":0.5},"N":16,"n":[4,8],"rho":0.3,
                                        "trials":7,"grid-points":12,"branch":"both"})"));
    CHECK(cfg.N == 16);
    CHECK(cfg.n_list == std::vector<Index>{4, 8});
    CHECK(cfg.rho == "0.3");
    CHECK(cfg.trials == 7);
    CHECK(cfg.grid_points == 12);
    CHECK(cfg.branch == "both");
    CHECK(resolve_model(cfg).dim() == 16);
    CHECK_THROWS_AS(apply_json(cfg, io::Json::parse(R"({"trails":3})")), std::invalid_argument);
    CHECK_THROWS_AS(apply_json(cfg, io::Json::parse(R"({"trials":"many"})")), std::invalid_argument);
}

TEST_CASE("density command") {
    ExperimentConfig cfg;
    cfg.model = "two_atom:1,5";
    cfg.N = 32;
    cfg.n_list = {64};
    cfg.rho = "0.3";
    cfg.branch = "both";
    cfg.limit_points = 500;
    cfg.out = test_support::scratch_dir("cmd_density");
    const auto runs = cmd_density(cfg);
    REQUIRE(runs.size() == 2);
    for (const char* sub : {"hat", "check"}) {
        for (const char* file : {"hist.csv", "limit.csv", "limit.json", "eigenvalues.csv"})
            CHECK(std::filesystem::exists(cfg.out / sub / file));
    }
    const auto curve = io::read_density(cfg.out / "check" / "limit.csv");
    CHECK(curve.grid.size() == 500);
    CHECK(runs[1].estimate.matrix.trace() == doctest::Approx(32.0).epsilon(1e-12));

    cfg.rho = "1";
    cfg.branch = "hat";
    cfg.out = test_support::scratch_dir("cmd_density_one");
    const auto one = cmd_density(cfg);
    CHECK_FALSE(one[0].limit);
    CHECK_FALSE(std::filesystem::exists(cfg.out / "limit.csv"));
    CHECK(one[0].eigenvalues.front() == doctest::Approx(1.0));
}

TEST_CASE("sweep is independent of the thread count") {
    ExperimentConfig cfg;
    cfg.model = "ar:0.7";
    cfg.N = 8;
    cfg.n_list = {6, 16};
    cfg.trials = 5;
    cfg.grid_points = 16;
    cfg.seed = 3;
    cfg.threads = 1;
    const auto a = run_shrinkage_sweep(cfg);
    cfg.threads = 3;
    const auto b = run_shrinkage_sweep(cfg);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        CHECK(a.rows[k].metric == b.rows[k].metric);
        CHECK(a.rows[k].mean == b.rows[k].mean);
        CHECK(a.rows[k].stderr_ == b.rows[k].stderr_);
    }
    CHECK(a.failures == 0);
    CHECK(a.find(16, metric::loss_clairvoyant) != nullptr);
    for (const auto& row : a.rows) CHECK(row.stderr_ >= 0.0);
}

TEST_CASE("sweep files") {
    ExperimentConfig cfg;
    cfg.model = "identity";
    cfg.N = 6;
    cfg.n_list = {12};
    cfg.trials = 1;
    cfg.grid_points = 8;
    cfg.out = test_support::scratch_dir("cmd_sweep");
    const auto r = cmd_shrinkage_sweep(cfg);
    for (const auto& row : r.rows) CHECK(row.stderr_ == 0.0);
    CHECK(r.theory.front().values.d_star == doctest::Approx(0.0));
    for (const char* file : {"sweep.csv", "rho.csv", "theory.csv", "summary.json"})
        CHECK(std::filesystem::exists(cfg.out / file));
    std::ifstream in(cfg.out / "sweep.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "n,metric,mean,stderr,trials");
    CHECK(io::read_json(cfg.out / "summary.json").at("failures") == 0);
}

TEST_CASE("estimate command") {
    const auto dir = test_support::scratch_dir("cmd_estimate");
    std::ofstream(dir / "x.csv") << "1,0.2\n-0.5,1.5\n2,-1\n0.3,0.7\n";
    ExperimentConfig cfg;
    cfg.input = dir / "x.csv";
    cfg.out = dir / "out";
    cfg.kind = "abramovich_pascal";
    cfg.rho = "0.9";
    const auto est = cmd_estimate(cfg);
    CHECK(est.residual <= 1e-10);
    CHECK(io::read_matrix_csv(cfg.out / "estimate.csv") == est.matrix);
    CHECK(io::read_json(cfg.out / "estimate.json").at("rho") == 0.9);

    cfg.rho = "1";
    cfg.kind = "chen";
    CHECK(cmd_estimate(cfg).matrix == Matrix::Identity(2, 2));

    cfg.rho = "auto";
    const auto automatic = cmd_estimate(cfg);
    CHECK(automatic.rho > 0.0);
    CHECK(automatic.rho <= 1.0);
    CHECK(io::read_json(cfg.out / "estimate.json").contains("selection"));

    cfg.kind = "linear";
    CHECK_THROWS_AS(cmd_estimate(cfg), std::invalid_argument);
    cfg.input = dir / "missing.csv";
    CHECK_THROWS_AS(cmd_estimate(cfg), io::IoError);
}
