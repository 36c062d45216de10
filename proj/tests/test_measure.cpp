#include "rshrink/measure.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace rshrink;

TEST_CASE("spectral measure validation") {
    CHECK_THROWS_AS(SpectralMeasure({1.0, 2.0}, {0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(SpectralMeasure({-1.0, 2.0}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(SpectralMeasure({0.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(SpectralMeasure({1.0, 2.0}, {1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(SpectralMeasure({1.0}, {0.5, 0.5}), std::invalid_argument);
    CHECK_NOTHROW(SpectralMeasure({0.0, 2.0}, {0.5, 0.5}));
}

TEST_CASE("atoms are sorted and near-equal atoms merged") {
    const SpectralMeasure nu({2.0, 1.0, 1.0 + 1e-12}, {0.5, 0.25, 0.25});
    REQUIRE(nu.size() == 2);
    CHECK(nu.atoms()[0] == doctest::Approx(1.0));
    CHECK(nu.weights()[0] == doctest::Approx(0.5));
    CHECK(nu.atoms()[1] == 2.0);

    const SpectralMeasure apart({1.0, 1.0 + 1e-6}, {0.5, 0.5});
    CHECK(apart.size() == 2);
}

TEST_CASE("moments by hand") {
    const auto nu = test_support::two_atom_measure();
    CHECK(nu.moment(1) == doctest::Approx(1.0));
    CHECK(moment(nu, 2) == doctest::Approx(13.0 / 9.0).epsilon(1e-14));
    CHECK(SpectralMeasure::dirac(2.0).moment(3) == doctest::Approx(8.0));
}

TEST_CASE("AR model second moment matches a direct trace") {
    const int N = 32;
    const double r = 0.7;
    double trace_sq = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) trace_sq += std::pow(r, 2 * std::abs(i - j));
    const double direct = trace_sq / N;
    const auto model = ar_toeplitz(N, r);
    CHECK(spectral_measure(model).moment(2) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(direct == doctest::Approx(2.8038254518).epsilon(1e-10));
    CHECK(model.covariance().trace() == doctest::Approx(N));
}

TEST_CASE("two-atom model is normalized and exact") {
    const auto model = two_atom(256, 1.0, 5.0);
    const auto nu = spectral_measure(model);
    REQUIRE(nu.size() == 2);
    CHECK(nu.atoms()[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(nu.atoms()[1] == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
    CHECK(nu.weights()[0] == doctest::Approx(0.5));
    CHECK(model.descriptor().kind == ModelKind::two_atom);
    CHECK_THROWS_AS(two_atom(5, 1.0, 5.0), std::invalid_argument);
    CHECK_THROWS_AS(two_atom(4, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("square root reproduces the covariance") {
    for (double r : {0.0, 0.3, 0.9}) {
        const auto model = ar_toeplitz(20, r);
        const Matrix back = model.sqrt() * model.sqrt();
        CHECK((back - model.covariance()).norm() <= 1e-10 * model.covariance().norm());
        CHECK((model.sqrt() - model.sqrt().transpose()).norm() <= 1e-12);
    }
    CHECK_THROWS_AS(ar_toeplitz(8, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ar_toeplitz(8, -0.1), std::invalid_argument);
}

TEST_CASE("explicit matrices") {
    Matrix c(2, 2);
    c << 2.0, 1.0, 1.0, 2.0;
    const auto model = PopulationModel::from_matrix(c, "inline");
    CHECK(model.covariance().trace() == doctest::Approx(2.0));
    CHECK(model.eigenvalues().front() == doctest::Approx(1.0 / 2.0));
    CHECK(model.eigenvalues().back() == doctest::Approx(3.0 / 2.0));

    Matrix asym = c;
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(PopulationModel::from_matrix(asym), std::invalid_argument);
    Matrix indefinite(2, 2);
    indefinite << 1.0, 3.0, 3.0, 1.0;
    CHECK_THROWS_AS(PopulationModel::from_matrix(indefinite), std::invalid_argument);
}
