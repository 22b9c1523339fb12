#include "scorelab/datasets.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace scorelab {

Eigen::MatrixXd grid25_centers(double spacing) {
    Eigen::MatrixXd centers(2, 25);
    for (int k = 0; k < 25; ++k) {
        centers(0, k) = spacing * (k % 5 - 2);
        centers(1, k) = spacing * (k / 5 - 2);
    }
    return centers;
}

GaussianMixture grid25_mixture(double spacing, double tau) {
    return GaussianMixture(grid25_centers(spacing),
                           Eigen::VectorXd::Constant(25, 1.0 / 25.0), tau * tau);
}

SyntheticDataset gen_grid25(int n, double spacing, double tau, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_grid25: need n >= 1");
    if (!(tau >= 0.0)) throw std::invalid_argument("gen_grid25: need tau >= 0");
    const Eigen::MatrixXd centers = grid25_centers(spacing);
    Rng rng(seed);
    SyntheticDataset ds;
    ds.points.resize(2, n);
    for (int j = 0; j < n; ++j) {
        const auto k = static_cast<Eigen::Index>(rng.uniform_index(25));
        ds.points.col(j) = centers.col(k) + tau * rng.normal_vector(2);
    }
    ds.generator = "grid25";
    ds.params = {{"n", static_cast<double>(n)},
                 {"spacing", spacing},
                 {"tau", tau},
                 {"seed", static_cast<double>(seed)}};
    return ds;
}

SyntheticDataset gen_swiss_roll(int n, double noise, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_swiss_roll: need n >= 1");
    if (!(noise >= 0.0)) throw std::invalid_argument("gen_swiss_roll: need noise >= 0");
    const double t_lo = 1.5 * std::numbers::pi;
    const double t_hi = 4.5 * std::numbers::pi;
    const double c = 4.0 / t_hi;  // outer radius c * t_hi = 4
    Rng rng(seed);
    SyntheticDataset ds;
    ds.points.resize(2, n);
    for (int j = 0; j < n; ++j) {
        const double t = t_lo + (t_hi - t_lo) * rng.uniform();
        ds.points(0, j) = c * t * std::cos(t);
        ds.points(1, j) = c * t * std::sin(t);
        if (noise > 0.0) ds.points.col(j) += noise * rng.normal_vector(2);
    }
    ds.generator = "swiss-roll";
    ds.params = {{"n", static_cast<double>(n)},
                 {"noise", noise},
                 {"seed", static_cast<double>(seed)}};
    return ds;
}

SyntheticDataset gen_dirac(int n, const Eigen::VectorXd& x0) {
    if (n < 1) throw std::invalid_argument("gen_dirac: need n >= 1");
    SyntheticDataset ds;
    ds.points = x0.replicate(1, n);
    ds.generator = "dirac";
    ds.params = {{"n", static_cast<double>(n)}};
    return ds;
}

}  // namespace scorelab
