#include "rshrink/asymptotics.hpp"
#include "rshrink/errors.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace rshrink;

using namespace test_support;

TEST_CASE("gamma_hat against a bisection oracle") {
    const auto nu = test_support::two_atom_measure();
    const double g = gamma_hat(nu, 0.2);
    CHECK(std::abs(g - bisect_gamma_hat(nu, 0.2)) <= 1e-10);
    CHECK(g == doctest::Approx(0.6147629234).epsilon(1e-9));
    CHECK(gamma_hat_residual(nu, 0.2, g) <= 1e-12);

    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        const auto m = test_support::random_measure(rng);
        const double rho = std::uniform_real_distribution<double>(0.01, 0.99)(rng);
        CHECK(gamma_hat(m, rho) == doctest::Approx(bisect_gamma_hat(m, rho)).epsilon(1e-10));
    }
    // nu = delta_1: 1 = 1/(g rho + 1 - rho) gives g = 1
    CHECK(gamma_hat(SpectralMeasure::dirac(1.0), 0.3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("F is the positive root of its quadratic") {
    for (double c : {0.1, 1.0, 4.0, 50.0})
        for (double rho : {0.05, 0.5, 0.95})
            for (double x : {1e-3, 0.7, 10.0, 1e6}) {
                const double F = big_F(x, rho, c);
                CHECK(F > 0.0);
                const double rhs = (1 - rho) / (x * F) + rho - c * (1 - rho);
                CHECK(std::abs(F - rhs) <= 1e-12 * std::max(1.0, F));
                CHECK(F == doctest::Approx(naive_F(x, rho, c)).epsilon(1e-8));
            }
}

TEST_CASE("gamma_check solves its equation") {
    const auto nu = test_support::two_atom_measure();
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            const double rho = 0.05 + 0.09 * i;
            const double c = 0.1 * std::pow(1.6, j);
            const auto p = gamma_check(nu, rho, c);
            CHECK(p.gamma > 0.0);
            CHECK(std::abs(check_sum(nu, rho, c, p.gamma) - 1.0) <= 1e-12);
            CHECK(p.residual <= 1e-12);
            CHECK(p.T_rho == doctest::Approx(rho * p.gamma * naive_F(p.gamma, rho, c)));
            CHECK(p.f_value == doctest::Approx(p.T_rho / (1 - rho + p.T_rho)));
        }
}

TEST_CASE("f_check at the Dirac-mass configuration") {
    CHECK(f_check(test_support::two_atom_measure(), 0.8, 2.0) == doctest::Approx(0.724685).epsilon(1e-5));
}

TEST_CASE("f_hat by hand") {
    const auto nu = test_support::two_atom_measure();
    const double rho = 0.2, c = 0.125;
    const double g = gamma_hat(nu, rho);
    const double m1 = (1 / g) * (1 - rho) / (1 - (1 - rho) * c) + rho;
    CHECK(hat_first_moment(nu, rho, c) == doctest::Approx(m1).epsilon(1e-14));
    CHECK(f_hat(nu, rho, c) == doctest::Approx(rho / m1).epsilon(1e-14));
    CHECK(hat_rho_lower(0.5) == 0.0);
    CHECK(hat_rho_lower(4.0) == doctest::Approx(0.75));
    CHECK_THROWS(f_hat(nu, 0.75, 4.0));
}

TEST_CASE("f maps are increasing with f(1) = 1") {
    const auto nu = test_support::two_atom_measure();
    for (double c : {0.125, 1.0, 2.0}) {
        const double lower = hat_rho_lower(c);
        double prev_hat = 0.0, prev_check = 0.0;
        for (int k = 1; k <= 50; ++k) {
            const double t = static_cast<double>(k) / 50.0;
            const double fh = f_hat(nu, lower + (1 - lower) * t, c);
            const double fc = f_check(nu, t, c);
            CHECK(fh > prev_hat);
            CHECK(fc > prev_check);
            prev_hat = fh;
            prev_check = fc;
        }
        CHECK(f_hat(nu, 1.0, c) == doctest::Approx(1.0));
        CHECK(f_check(nu, 1.0, c) == doctest::Approx(1.0));
    }
}

TEST_CASE("inverse maps round-trip") {
    const auto nu = test_support::two_atom_measure();
    for (double c : {0.125, 0.9, 3.0}) {
        CHECK(f_hat_inverse(nu, 1.0, c) == 1.0);
        CHECK(f_check_inverse(nu, 1.0, c) == 1.0);
        const double lower = hat_rho_lower(c);
        for (int k = 1; k < 10; ++k) {
            const double rho_h = lower + (1 - lower) * k / 10.0;
            CHECK(std::abs(f_hat_inverse(nu, f_hat(nu, rho_h, c), c) - rho_h) <= 1e-8);
            const double rho_c = k / 10.0;
            CHECK(std::abs(f_check_inverse(nu, f_check(nu, rho_c, c), c) - rho_c) <= 1e-8);
        }
    }
    const auto opt = rho_star_dstar(nu, 0.125);
    CHECK(f_hat(nu, opt.rho_hat_star, 0.125) == doctest::Approx(opt.rho_star).epsilon(1e-10));
}

TEST_CASE("optimal shrinkage for the AR(0.7) population") {
    const auto nu = spectral_measure(ar_toeplitz(32, 0.7));
    struct Row {
        int n;
        double rho_star, d_star, rho_hat, rho_check;
    };
    for (const auto& r : {Row{8, 0.68920, 1.24320, 0.86255, 0.83373}, Row{32, 0.35666, 0.64334, 0.61850, 0.48317},
                          Row{128, 0.12172, 0.21957, 0.29076, 0.14649}}) {
        const double c = 32.0 / r.n;
        const double m2 = nu.moment(2);
        const auto opt = rho_star_dstar(nu, c);
        CHECK(opt.rho_star == doctest::Approx(c / (c + m2 - 1)).epsilon(1e-14));
        CHECK(opt.d_star == doctest::Approx(c * (m2 - 1) / (c + m2 - 1)).epsilon(1e-14));
        CHECK(std::abs(opt.rho_star - r.rho_star) <= 1e-5);
        CHECK(std::abs(opt.d_star - r.d_star) <= 1e-5);
        CHECK(std::abs(opt.rho_hat_star - r.rho_hat) <= 1e-5);
        CHECK(std::abs(opt.rho_check_star - r.rho_check) <= 1e-5);
    }
}

TEST_CASE("identity population needs no shrinkage") {
    const auto opt = rho_star_dstar(SpectralMeasure::dirac(1.0), 0.5);
    CHECK(opt.rho_star == 1.0);
    CHECK(opt.d_star == 0.0);
    CHECK(opt.rho_hat_star == 1.0);
    CHECK(opt.rho_check_star == 1.0);
}

TEST_CASE("deterministic equivalents are linear shrinkage in disguise") {
    const auto nu = test_support::two_atom_measure();
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss;
    Matrix z(8, 20);
    for (Index i = 0; i < z.size(); ++i) z.data()[i] = gauss(rng);
    const double c = 0.4, rho = 0.3;
    const Matrix scm = z * z.transpose() / 20.0;
    Matrix lin = (1 - rho) * scm;
    lin.diagonal().array() += rho;

    const double rho_hat = f_hat_inverse(nu, rho, c);
    const Matrix s_hat = s_hat_equivalent(z, nu, rho_hat, c) / hat_first_moment(nu, rho_hat, c);
    CHECK((s_hat - lin).norm() / lin.norm() <= 1e-10);

    const double rho_check = f_check_inverse(nu, rho, c);
    const Matrix s_check = s_check_equivalent(z, nu, rho_check, c);
    CHECK((s_check - lin).norm() / lin.norm() <= 1e-10);
}
