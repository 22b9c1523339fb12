#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>

#include "scorelab/gaussian_mixture.hpp"

namespace scorelab {

struct SyntheticDataset {
    Eigen::MatrixXd points;  // d x n, one point per column
    std::string generator;   // "grid25" | "swiss-roll" | "dirac"
    std::map<std::string, double> params;

    int dim() const { return static_cast<int>(points.rows()); }
    int size() const { return static_cast<int>(points.cols()); }
};

// The 5x5 grid mixture: equal weights, means at spacing * {-2..2}^2 with
// component std tau. Component k sits at column-major grid cell
// (k % 5 - 2, k / 5 - 2). Shared by the generator and the mode metrics.
GaussianMixture grid25_mixture(double spacing, double tau);
Eigen::MatrixXd grid25_centers(double spacing);

// n draws from grid25_mixture. Per point: one index draw, then two normals.
SyntheticDataset gen_grid25(int n, double spacing, double tau, std::uint64_t seed);

// 2-D spiral: angle t ~ U[1.5*pi, 4.5*pi], point = c * t * (cos t, sin t)
// with c chosen so the outer radius is 4 (the spiral fits in [-4, 4]^2),
// plus optional isotropic Gaussian noise. Per point: one uniform, then two
// normals when noise > 0.
SyntheticDataset gen_swiss_roll(int n, double noise, std::uint64_t seed);

// n copies of a single point; the analytic sampler experiments corrupt it.
SyntheticDataset gen_dirac(int n, const Eigen::VectorXd& x0);

}  // namespace scorelab
