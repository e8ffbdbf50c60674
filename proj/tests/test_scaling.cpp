#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <hypiss/scaling.hpp>

using hypiss::rho_inf;
using hypiss::rho_two;
using hypiss::scaled_inf_norm;
using hypiss::scaled_two_norm;

namespace {

// Independent oracle: spectral radius of |K| via the QR eigensolver.
double perron_oracle(const Eigen::MatrixXd& K) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(K.cwiseAbs(), false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Independent oracle for 2x2: brute-force log-grid search over delta2/delta1.
double brute_force_min(const Eigen::MatrixXd& K, bool two_norm) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 4000; ++i) {
        double r = std::exp(-7.0 + 14.0 * i / 4000.0);
        Eigen::Vector2d delta(1.0, r);
        double v = two_norm ? scaled_two_norm(K, delta) : scaled_inf_norm(K, delta);
        best = std::min(best, v);
    }
    return best;
}

} // namespace

TEST_CASE("scaled norms evaluate and guard positivity") {
    Eigen::MatrixXd K(2, 2);
    K << 0.0, 2.0, 0.125, 0.0;
    Eigen::Vector2d delta(1.0, 1.0);
    CHECK(scaled_inf_norm(K, delta) == doctest::Approx(2.0));
    Eigen::Vector2d bad(1.0, 0.0);
    CHECK_THROWS_AS(scaled_inf_norm(K, bad), hypiss::NonPositiveDelta);
    CHECK_THROWS_AS(scaled_two_norm(K, bad), hypiss::NonPositiveDelta);
    // delta = (1, 4) balances the rows: [[0, 0.5], [0.5, 0]].
    Eigen::Vector2d opt(1.0, 4.0);
    CHECK(scaled_inf_norm(K, opt) == doctest::Approx(0.5));
}

TEST_CASE("rho_inf matches the Perron root on the worked example") {
    Eigen::MatrixXd K(2, 2);
    K << 0.0, 2.0, 0.125, 0.0;
    hypiss::ScalingResult r = rho_inf(K);
    CHECK(r.value == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.converged);
    CHECK(scaled_inf_norm(K, r.delta) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("rho_inf equals the Perron root on random matrices") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        int n = 2 + static_cast<int>(rng() % 4);
        Eigen::MatrixXd K(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) K(i, j) = u(rng);
        CHECK(std::abs(rho_inf(K).value - perron_oracle(K)) <= 1e-6);
    }
}

TEST_CASE("rho_inf agrees with a brute-force delta grid in 2x2") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd K(2, 2);
        K << u(rng), u(rng), u(rng), u(rng);
        double brute = brute_force_min(K, false);
        double mine = rho_inf(K).value;
        CHECK(mine <= brute + 1e-9);  // a grid point can never beat the true infimum
        CHECK(mine >= brute - 5e-3);  // grid resolution slack around the kink

    }
}

TEST_CASE("rho_two agrees with a brute-force delta grid in 2x2") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        Eigen::MatrixXd K(2, 2);
        K << u(rng), u(rng), u(rng), u(rng);
        double brute = brute_force_min(K, true);
        double mine = rho_two(K, 8, 4000, 17).value;
        CHECK(mine <= brute + 1e-6);
        CHECK(mine >= brute - 1e-3); // grid resolution slack
    }
}

TEST_CASE("two-norm infimum never exceeds the inf-norm infimum") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 60; ++trial) {
        int n = 2 + static_cast<int>(rng() % 3);
        Eigen::MatrixXd K(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) K(i, j) = u(rng);
        CHECK(rho_two(K, 8, 4000, 23).value <= rho_inf(K).value + 1e-6);
    }
}

TEST_CASE("scaled-norm infima are invariant under diagonal similarity") {
    Eigen::MatrixXd K(3, 3);
    K << 0.1, -0.4, 0.2, 0.3, 0.0, -0.1, -0.2, 0.5, 0.1;
    Eigen::Vector3d d(0.5, 2.0, 3.0);
    Eigen::MatrixXd similar = d.asDiagonal() * K * d.cwiseInverse().asDiagonal();
    CHECK(rho_inf(similar).value == doctest::Approx(rho_inf(K).value).epsilon(1e-8));
    CHECK(rho_two(similar, 8, 6000, 29).value ==
          doctest::Approx(rho_two(K, 8, 6000, 29).value).epsilon(1e-5));
}

TEST_CASE("zero and diagonal matrices are exact") {
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(3, 3);
    CHECK(rho_inf(Z).value == doctest::Approx(0.0));
    Eigen::MatrixXd D = Eigen::Vector3d(0.3, -0.7, 0.2).asDiagonal();
    CHECK(rho_inf(D).value == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(rho_two(D, 8, 4000, 31).value == doctest::Approx(0.7).epsilon(1e-6));
}
