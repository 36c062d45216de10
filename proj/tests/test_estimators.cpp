#include "rshrink/errors.hpp"
#include "rshrink/estimators.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>
#include <stdexcept>

using namespace rshrink;

using test_support::reference_rhs;
using test_support::relative;

TEST_CASE("fixed points satisfy their defining equations") {
    struct Case {
        Index N, n;
        double rho;
    };
    for (const auto& [N, n, rho] : {Case{8, 40, 0.3}, Case{16, 16, 0.5}, Case{20, 10, 0.8}}) {
        const auto s = sample(ar_toeplitz(N, 0.6), n, TauLaw::inverse_gamma(1.0), 3);
        const SolverConfig cfg{1e-11, 2000};
        const auto hat = abramovich_pascal(s, std::max(rho, hat_lower_bound(N, n) + 0.1), cfg);
        CHECK(hat.residual <= cfg.tol);
        CHECK(relative(hat.matrix, reference_rhs(s, hat.matrix, hat.rho, false)) <= 1e-10);
        CHECK(defining_residual(s, hat) <= 1e-10);

        const auto check = chen(s, rho, cfg);
        CHECK(check.residual <= cfg.tol);
        CHECK(relative(check.matrix, reference_rhs(s, check.matrix, rho, true)) <= 1e-10);
        CHECK(check.matrix.trace() / static_cast<double>(N) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((check.matrix - check.matrix.transpose()).norm() == 0.0);
    }
}

TEST_CASE("rho = 1 returns the identity") {
    const auto s = sample(ar_toeplitz(6, 0.4), 9, TauLaw::constant(), 1);
    for (const auto& est : {abramovich_pascal(s, 1.0), chen(s, 1.0), linear_combine(s, 1.0)}) {
        CHECK((est.matrix - Matrix::Identity(6, 6)).norm() <= 1e-15);
    }
}

TEST_CASE("small example from a 2 x 4 sample") {
    Matrix z(2, 4);
    z << 1.0, -0.5, 2.0, 0.3, 0.2, 1.5, -1.0, 0.7;
    const SampleSet s(z);
    const auto est = abramovich_pascal(s, 0.9);
    CHECK(est.residual <= 1e-10);
    CHECK(relative(est.matrix, reference_rhs(s, est.matrix, 0.9, false)) <= 1e-10);
}

TEST_CASE("admissible interval of the Abramovich-Pascal estimate") {
    CHECK(hat_lower_bound(32, 8) == doctest::Approx(0.75));
    CHECK(hat_lower_bound(8, 32) == 0.0);
    const auto s = sample(ar_toeplitz(32, 0.7), 8, TauLaw::constant(), 2);
    CHECK_THROWS_AS(abramovich_pascal(s, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(abramovich_pascal(s, 0.75), std::invalid_argument);
    CHECK_NOTHROW(abramovich_pascal(s, 0.8));
    CHECK_THROWS_AS(chen(s, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(chen(s, 1.5), std::invalid_argument);
}

TEST_CASE("scale invariance of the robust estimators") {
    const auto s = sample(two_atom(10, 1.0, 5.0), 30, TauLaw::constant(), 4);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    Matrix scaled = s.data();
    for (Index i = 0; i < scaled.cols(); ++i) scaled.col(i) *= scale(rng);
    const SampleSet t(scaled);
    const SolverConfig cfg;
    CHECK((abramovich_pascal(s, 0.4, cfg).matrix - abramovich_pascal(t, 0.4, cfg).matrix).norm() <= 10 * cfg.tol);
    CHECK((chen(s, 0.4, cfg).matrix - chen(t, 0.4, cfg).matrix).norm() <= 10 * cfg.tol);
}

TEST_CASE("closed forms") {
    Matrix z(2, 2);
    z << 1.0, 0.0, 2.0, 1.0;
    const auto lin = linear_combine(z, 0.25);
    Matrix expected(2, 2);
    // (3/4)(1/2)(z z^T) + (1/4) I
    expected << 0.375 * 1.0 + 0.25, 0.375 * 2.0, 0.375 * 2.0, 0.375 * 5.0 + 0.25;
    CHECK((lin.matrix - expected).norm() <= 1e-15);
    CHECK(lin.kind == EstimatorKind::linear);

    // identity population: clairvoyant weights are N / ||x||^2
    const auto s = sample(ar_toeplitz(5, 0.0), 7, TauLaw::constant(), 6);
    const auto clair = clairvoyant(s, ar_toeplitz(5, 0.0), 0.3);
    const auto lin_u = linear_combine(s.normalized(), 0.3);
    CHECK((clair.matrix - lin_u.matrix).norm() <= 1e-12);
}

TEST_CASE("non-convergence is reported") {
    const auto s = sample(ar_toeplitz(10, 0.8), 20, TauLaw::constant(), 1);
    try {
        (void)chen(s, 0.05, SolverConfig{1e-12, 2});
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.iterations() == 2);
        CHECK(e.residual() > 1e-12);
    }
    CHECK_THROWS_AS(SolverConfig({0.0, 10}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(SolverConfig({1e-8, 0}).validate(), std::invalid_argument);
}

TEST_CASE("warm starts reach the same fixed point") {
    const auto s = sample(ar_toeplitz(12, 0.5), 24, TauLaw::constant(), 10);
    const auto cold = chen(s, 0.3);
    const auto warm = chen(s, 0.3, SolverConfig{}, chen(s, 0.4).matrix);
    CHECK((cold.matrix - warm.matrix).norm() <= 1e-8);
    CHECK(warm.iterations < cold.iterations);
}

TEST_CASE("losses") {
    const auto model = ar_toeplitz(6, 0.5);
    CHECK(loss_check(model.covariance(), model) == 0.0);
    CHECK(loss_hat(Matrix(3.0 * model.covariance()), model) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(loss_check(Matrix::Identity(6, 6), model) ==
          doctest::Approx((Matrix::Identity(6, 6) - model.covariance()).squaredNorm() / 6.0));
    const auto s = sample(model, 12, TauLaw::constant(), 2);
    CHECK_THROWS_AS(loss_hat(chen(s, 0.5), model), std::invalid_argument);
}

TEST_CASE("oracle minimization over a grid") {
    const auto model = ar_toeplitz(12, 0.7);
    const auto s = sample(model, 48, TauLaw::constant(), 12);
    CHECK_THROWS_AS(minimize_loss(s, model, EstimatorKind::chen, std::vector<double>{}), std::invalid_argument);

    const std::vector<double> single{0.4};
    const auto one = minimize_loss(s, model, EstimatorKind::chen, single);
    CHECK(one.rho == 0.4);
    CHECK(one.loss == doctest::Approx(loss_check(chen(s, 0.4), model)));

    for (auto kind : {EstimatorKind::chen, EstimatorKind::abramovich_pascal, EstimatorKind::clairvoyant}) {
        const auto grid = default_rho_grid(kind, 12, 48, 24);
        const auto best = minimize_loss(s, model, kind, grid);
        int compared = 0;
        for (double rho : grid) {
            CovEstimate est;
            try {
                est = kind == EstimatorKind::chen ? chen(s, rho)
                      : kind == EstimatorKind::abramovich_pascal ? abramovich_pascal(s, rho)
                                                                 : clairvoyant(s, model, rho);
            } catch (const ConvergenceError&) {
                continue;  // the scan stops before such points
            }
            const double loss = kind == EstimatorKind::abramovich_pascal ? loss_hat(est.matrix, model)
                                                                         : loss_check(est.matrix, model);
            CHECK(best.loss <= loss + 1e-9);
            ++compared;
        }
        CHECK(compared >= 8);
    }
}

TEST_CASE("default grid") {
    const auto grid = default_rho_grid(EstimatorKind::abramovich_pascal, 32, 8);
    CHECK(grid.size() == 64);
    CHECK(grid.back() == 1.0);
    CHECK(grid.front() > 0.75);
    for (std::size_t k = 1; k < grid.size(); ++k) CHECK(grid[k] > grid[k - 1]);
}

TEST_CASE("kind names") {
    for (auto kind : {EstimatorKind::abramovich_pascal, EstimatorKind::chen, EstimatorKind::linear,
                      EstimatorKind::clairvoyant})
        CHECK(estimator_kind_from_string(to_string(kind)) == kind);
    CHECK(estimator_kind_from_string("hat") == EstimatorKind::abramovich_pascal);
    CHECK_THROWS_AS(estimator_kind_from_string("tyler"), std::invalid_argument);
}
