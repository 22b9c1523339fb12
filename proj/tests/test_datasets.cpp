#include <Eigen/Core>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "scorelab/datasets.hpp"

using namespace scorelab;

TEST_CASE("grid centers form a five by five lattice") {
    const double spacing = 2.0;
    const Eigen::MatrixXd centers = grid25_centers(spacing);
    REQUIRE(centers.rows() == 2);
    REQUIRE(centers.cols() == 25);
    std::set<std::pair<double, double>> seen;
    for (int k = 0; k < 25; ++k) {
        CHECK(centers(0, k) == spacing * (k % 5 - 2));
        CHECK(centers(1, k) == spacing * (k / 5 - 2));
        seen.insert({centers(0, k), centers(1, k)});
    }
    CHECK(seen.size() == 25);  // all distinct
    CHECK(centers.minCoeff() == -2.0 * spacing);
    CHECK(centers.maxCoeff() == 2.0 * spacing);
    // the mixture wrapper shares the lattice and weights uniformly
    const GaussianMixture gm = grid25_mixture(spacing, 0.05);
    CHECK((gm.means() - centers).norm() == 0.0);
    CHECK(gm.weights().maxCoeff() == doctest::Approx(0.04).epsilon(1e-15));
    CHECK(gm.tau2() == doctest::Approx(0.05 * 0.05).epsilon(1e-15));
}

TEST_CASE("grid samples stay near their nearest center") {
    const double spacing = 2.0, tau = 0.05;
    const SyntheticDataset ds = gen_grid25(5000, spacing, tau, 3);
    REQUIRE(ds.points.rows() == 2);
    REQUIRE(ds.points.cols() == 5000);
    CHECK(ds.generator == "grid25");
    CHECK(ds.params.at("n") == 5000.0);
    CHECK(ds.params.at("spacing") == spacing);
    CHECK(ds.params.at("tau") == tau);
    CHECK(ds.params.at("seed") == 3.0);

    const Eigen::MatrixXd centers = grid25_centers(spacing);
    int assigned[25] = {};
    for (int j = 0; j < ds.points.cols(); ++j) {
        double best = 1e300;
        int best_k = -1;
        for (int k = 0; k < 25; ++k) {
            const double d = (ds.points.col(j) - centers.col(k)).norm();
            if (d < best) {
                best = d;
                best_k = k;
            }
        }
        // 6 tau leaves ~2e-9 tail mass per coordinate; 5000 draws stay inside
        CHECK(best < 6.0 * tau);
        ++assigned[best_k];
    }
    for (int k = 0; k < 25; ++k) CHECK(assigned[k] > 0);
}

TEST_CASE("grid samples with zero jitter sit exactly on centers") {
    const SyntheticDataset ds = gen_grid25(600, 1.5, 0.0, 11);
    const Eigen::MatrixXd centers = grid25_centers(1.5);
    for (int j = 0; j < ds.points.cols(); ++j) {
        bool exact = false;
        for (int k = 0; k < 25 && !exact; ++k)
            exact = (ds.points.col(j) - centers.col(k)).norm() == 0.0;
        CHECK(exact);
    }
}

TEST_CASE("swiss roll follows the spiral parametrization exactly") {
    const SyntheticDataset ds = gen_swiss_roll(400, 0.0, 5);
    REQUIRE(ds.points.rows() == 2);
    REQUIRE(ds.points.cols() == 400);
    CHECK(ds.generator == "swiss-roll");
    CHECK(ds.params.at("noise") == 0.0);

    const double pi = std::numbers::pi;
    const double t_lo = 1.5 * pi, t_hi = 4.5 * pi;
    const double c = 4.0 / t_hi;
    for (int j = 0; j < ds.points.cols(); ++j) {
        // noiseless points satisfy |p| = c t, so t is recoverable from the radius
        const double r = ds.points.col(j).norm();
        const double t = r / c;
        CHECK(t >= t_lo - 1e-12);
        CHECK(t <= t_hi + 1e-12);
        CHECK(ds.points(0, j) == doctest::Approx(c * t * std::cos(t)).epsilon(1e-10));
        CHECK(ds.points(1, j) == doctest::Approx(c * t * std::sin(t)).epsilon(1e-10));
    }
    // the outermost radius is 4 by construction
    double max_r = 0.0;
    for (int j = 0; j < ds.points.cols(); ++j)
        max_r = std::max(max_r, ds.points.col(j).norm());
    CHECK(max_r <= 4.0 + 1e-12);
    CHECK(max_r > 3.5);  // uniform t gets close to the end of the range
}

TEST_CASE("swiss roll noise perturbs but preserves the shell") {
    const double noise = 0.05;
    const SyntheticDataset ds = gen_swiss_roll(2000, noise, 9);
    const double c = 4.0 / (4.5 * std::numbers::pi);
    int moved = 0;
    for (int j = 0; j < ds.points.cols(); ++j) {
        const double r = ds.points.col(j).norm();
        // radius may exceed 4 only by the jitter scale
        CHECK(r < 4.0 + 6.0 * noise);
        CHECK(r > c * 1.5 * std::numbers::pi - 6.0 * noise);
        const double t = r / c;
        const Eigen::Vector2d on_curve(c * t * std::cos(t), c * t * std::sin(t));
        if ((ds.points.col(j) - on_curve).norm() > 1e-12) ++moved;
    }
    CHECK(moved == 2000);  // jitter is applied to every point
}

TEST_CASE("generators are deterministic in the seed") {
    const SyntheticDataset a = gen_grid25(200, 2.0, 0.05, 42);
    const SyntheticDataset b = gen_grid25(200, 2.0, 0.05, 42);
    const SyntheticDataset c = gen_grid25(200, 2.0, 0.05, 43);
    CHECK((a.points - b.points).norm() == 0.0);
    CHECK((a.points - c.points).norm() != 0.0);

    const SyntheticDataset r1 = gen_swiss_roll(200, 0.02, 8);
    const SyntheticDataset r2 = gen_swiss_roll(200, 0.02, 8);
    CHECK((r1.points - r2.points).norm() == 0.0);
}

TEST_CASE("point mass replication") {
    Eigen::VectorXd x0(2);
    x0 << 0.7, -1.2;
    const SyntheticDataset ds = gen_dirac(17, x0);
    REQUIRE(ds.points.cols() == 17);
    for (int j = 0; j < 17; ++j) CHECK((ds.points.col(j) - x0).norm() == 0.0);
    CHECK(ds.generator == "dirac");
}

TEST_CASE("generator input validation") {
    CHECK_THROWS_AS(gen_grid25(0, 2.0, 0.05, 1), std::invalid_argument);
    CHECK_THROWS_AS(gen_grid25(10, 2.0, -0.01, 1), std::invalid_argument);
    CHECK_THROWS_AS(gen_swiss_roll(0, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(gen_swiss_roll(10, -0.5, 1), std::invalid_argument);
}
