#include <Eigen/Core>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "doctest.h"
#include "scorelab/gaussian_mixture.hpp"
#include "scorelab/rng.hpp"
#include "scorelab/schedule.hpp"

using namespace scorelab;

namespace {

GaussianMixture three_blob() {
    Eigen::MatrixXd means(2, 3);
    means.col(0) << -2.0, 0.5;
    means.col(1) << 1.0, -1.5;
    means.col(2) << 2.5, 2.0;
    Eigen::VectorXd weights(3);
    weights << 1.0, 2.0, 3.0;
    return GaussianMixture(means, weights, 0.3);
}

// Straightforward high-precision evaluation: sum the component densities in
// extended precision before taking the log. Accurate whenever the points are
// not deep in the tails, which the tests guarantee.
double naive_log_density(const GaussianMixture& gm, const Eigen::VectorXd& x,
                         double sigma) {
    const double v = gm.tau2() + sigma * sigma;
    long double acc = 0.0L;
    for (int k = 0; k < gm.components(); ++k) {
        const long double sq = (x - gm.means().col(k)).squaredNorm();
        acc += static_cast<long double>(gm.weights()[k]) *
               std::exp(-sq / (2.0L * static_cast<long double>(v)));
    }
    const long double log_norm =
        -0.5L * gm.dim() *
        std::log(2.0L * std::numbers::pi_v<long double> * v);
    return static_cast<double>(std::log(acc) + log_norm);
}

}  // namespace

TEST_CASE("constructor normalizes weights and validates input") {
    const GaussianMixture gm = three_blob();
    CHECK(gm.dim() == 2);
    CHECK(gm.components() == 3);
    CHECK(gm.weights().sum() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gm.weights()[2] == doctest::Approx(0.5).epsilon(1e-15));

    Eigen::MatrixXd means(2, 2);
    means.setZero();
    Eigen::VectorXd w2(2);
    w2 << 1.0, 1.0;
    CHECK_THROWS_AS(GaussianMixture(Eigen::MatrixXd(2, 0), w2, 0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(GaussianMixture(means, Eigen::VectorXd::Ones(3), 0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(GaussianMixture(means, w2, -0.1), std::invalid_argument);
    Eigen::VectorXd bad(2);
    bad << 1.0, 0.0;
    CHECK_THROWS_AS(GaussianMixture(means, bad, 0.1), std::invalid_argument);
    bad << 1.0, -2.0;
    CHECK_THROWS_AS(GaussianMixture(means, bad, 0.1), std::invalid_argument);
}

TEST_CASE("smoothed log density matches naive summation to 1e-10") {
    const GaussianMixture gm = three_blob();
    Rng rng(3);
    for (double sigma : {0.0, 0.2, 1.0, 4.0}) {
        Eigen::MatrixXd X = 3.0 * rng.normal_matrix(2, 40);
        const Eigen::VectorXd got = gm.smoothed_log_density(X, sigma);
        for (int j = 0; j < X.cols(); ++j) {
            const double want = naive_log_density(gm, X.col(j), sigma);
            CHECK(got[j] == doctest::Approx(want).epsilon(1e-10));
        }
    }
}

TEST_CASE("log density stays finite far from every component") {
    // max-shifted responsibilities must not underflow to log(0)
    Eigen::MatrixXd means(2, 2);
    means.col(0) << -50.0, 0.0;
    means.col(1) << 50.0, 0.0;
    const GaussianMixture gm(means, Eigen::VectorXd::Ones(2), 0.01);
    Eigen::MatrixXd X(2, 1);
    X.col(0) << 0.0, 40.0;
    const Eigen::VectorXd ld = gm.smoothed_log_density(X, 0.05);
    CHECK(std::isfinite(ld[0]));
    const Eigen::MatrixXd r = gm.responsibilities(X, 0.05);
    CHECK(r.col(0).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::isfinite(gm.optimal_conditional_score(X, 0.05)(0, 0)));
}

TEST_CASE("score matches central finite differences of the log density") {
    const GaussianMixture gm = three_blob();
    const double h = 1e-5;
    Rng rng(9);
    for (double sigma : {0.1, 0.7, 2.5}) {
        Eigen::MatrixXd X = 2.5 * rng.normal_matrix(2, 15);
        const Eigen::MatrixXd score = gm.optimal_conditional_score(X, sigma);
        for (int j = 0; j < X.cols(); ++j)
            for (int i = 0; i < 2; ++i) {
                Eigen::MatrixXd hi = X.col(j), lo = X.col(j);
                hi(i, 0) += h;
                lo(i, 0) -= h;
                const double fd = (gm.smoothed_log_density(hi, sigma)[0] -
                                   gm.smoothed_log_density(lo, sigma)[0]) /
                                  (2.0 * h);
                CHECK(score(i, j) == doctest::Approx(fd).epsilon(1e-5));
            }
    }
}

TEST_CASE("responsibilities are a probability table") {
    const GaussianMixture gm = three_blob();
    Rng rng(5);
    const Eigen::MatrixXd X = 4.0 * rng.normal_matrix(2, 30);
    const Eigen::MatrixXd r = gm.responsibilities(X, 0.4);
    REQUIRE(r.rows() == 3);
    REQUIRE(r.cols() == 30);
    for (int j = 0; j < r.cols(); ++j) {
        CHECK(r.col(j).minCoeff() >= 0.0);
        CHECK(r.col(j).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
    // single component: responsibility is identically one
    const GaussianMixture single(Eigen::MatrixXd::Zero(2, 1),
                                 Eigen::VectorXd::Ones(1), 0.2);
    CHECK(single.responsibilities(X, 1.0).row(0).minCoeff() == 1.0);
}

TEST_CASE("posterior mean obeys the denoising identity") {
    // E[x | noisy] = noisy + sigma^2 * score for every input and level
    const GaussianMixture gm = three_blob();
    Rng rng(7);
    const Eigen::MatrixXd X = 3.0 * rng.normal_matrix(2, 25);
    for (double sigma : {0.05, 0.5, 2.0}) {
        const Eigen::MatrixXd pm = gm.posterior_mean(X, sigma);
        const Eigen::MatrixXd via_score =
            X + sigma * sigma * gm.optimal_conditional_score(X, sigma);
        CHECK((pm - via_score).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("point-mass components are allowed") {
    Eigen::MatrixXd mean(2, 1);
    mean << 1.5, -0.5;
    const GaussianMixture dirac(mean, Eigen::VectorXd::Ones(1), 0.0);
    Eigen::MatrixXd X(2, 1);
    X << 0.0, 0.0;
    // posterior mean of a point mass is the point itself at any noise level
    CHECK((dirac.posterior_mean(X, 0.8) - mean).norm() < 1e-14);
    // score of the smoothed point mass is (x0 - x) / sigma^2
    const double sigma = 0.8;
    const Eigen::MatrixXd s = dirac.optimal_conditional_score(X, sigma);
    CHECK((s - (mean - X) / (sigma * sigma)).norm() < 1e-14);
    // the density itself is degenerate only at sigma = 0
    CHECK_THROWS_AS(dirac.smoothed_log_density(X, 0.0), std::invalid_argument);
}

TEST_CASE("sampling matches mixture moments") {
    const GaussianMixture gm = three_blob();
    Rng rng(12);
    const Eigen::MatrixXd draws = gm.sample(40000, rng);
    REQUIRE(draws.cols() == 40000);
    const Eigen::VectorXd mean = draws.rowwise().mean();
    const Eigen::VectorXd want = gm.means() * gm.weights();
    CHECK((mean - want).norm() < 0.03);
}

TEST_CASE("shared parametrization optimum averages normalized denoisers") {
    const GaussianMixture gm = three_blob();
    const NoiseSchedule s = geometric_schedule(8.0, 0.05, 12);
    Rng rng(21);
    const Eigen::MatrixXd X = 2.0 * rng.normal_matrix(2, 10);
    const Eigen::MatrixXd got = optimal_unconditional_score(gm, X, s);
    Eigen::MatrixXd want = Eigen::MatrixXd::Zero(2, 10);
    for (double sigma : s.sigmas)
        want += (gm.posterior_mean(X, sigma) - X) / sigma;
    want /= static_cast<double>(s.levels());
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("effective sigma is the harmonic mean of the schedule") {
    const NoiseSchedule s = geometric_schedule(50.0, 0.01, 232);
    double inv = 0.0;
    for (double sigma : s.sigmas) inv += 1.0 / sigma;
    const double want = static_cast<double>(s.levels()) / inv;
    CHECK(effective_sigma(s) == doctest::Approx(want).epsilon(1e-14));

    // a point mass collapses the optimum to (x0 - x) / sbar
    Eigen::MatrixXd x0(2, 1);
    x0 << 1.5, -0.5;
    const GaussianMixture dirac(x0, Eigen::VectorXd::Ones(1), 0.0);
    Eigen::MatrixXd X(2, 3);
    X.col(0) << 0.0, 0.0;
    X.col(1) << 2.0, -3.0;
    X.col(2) << -1.0, 4.0;
    const Eigen::MatrixXd got = optimal_unconditional_score(dirac, X, s);
    const Eigen::MatrixXd want_score =
        (x0.replicate(1, 3) - X) / effective_sigma(s);
    CHECK((got - want_score).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dimension mismatches are rejected") {
    const GaussianMixture gm = three_blob();
    CHECK_THROWS_AS(gm.smoothed_log_density(Eigen::MatrixXd::Zero(3, 2), 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(gm.optimal_conditional_score(Eigen::MatrixXd::Zero(1, 2), 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(gm.smoothed_log_density(Eigen::MatrixXd::Zero(2, 2), -1.0),
                    std::invalid_argument);
}
