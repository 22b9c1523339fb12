#pragma once

#include <Eigen/Core>

#include "scorelab/rng.hpp"
#include "scorelab/schedule.hpp"

namespace scorelab {

// Isotropic Gaussian mixture with shared component variance tau2. Serves as
// the analytic ground truth: smoothing the mixture with N(0, sigma^2 I)
// yields another mixture with variance tau2 + sigma^2, so densities, scores
// and posterior means at any noise level have closed forms.
//
// Points are stored and passed column-wise: X is d x B for B points.
class GaussianMixture {
  public:
    // weights need not be normalized; they must be positive and finite
    GaussianMixture(Eigen::MatrixXd means, Eigen::VectorXd weights, double tau2);

    int dim() const { return static_cast<int>(means_.rows()); }
    int components() const { return static_cast<int>(means_.cols()); }
    double tau2() const { return tau2_; }
    const Eigen::MatrixXd& means() const { return means_; }
    const Eigen::VectorXd& weights() const { return weights_; }

    // log density of the sigma-smoothed mixture at each column of X
    Eigen::VectorXd smoothed_log_density(const Eigen::MatrixXd& X, double sigma) const;

    // posterior component probabilities, K x B, columns sum to 1
    Eigen::MatrixXd responsibilities(const Eigen::MatrixXd& X, double sigma) const;

    // gradient of smoothed_log_density w.r.t. each column of X, d x B
    Eigen::MatrixXd optimal_conditional_score(const Eigen::MatrixXd& X, double sigma) const;

    // E[x | x_noisy] under x ~ mixture, x_noisy = x + sigma * z; d x B
    Eigen::MatrixXd posterior_mean(const Eigen::MatrixXd& X, double sigma) const;

    // n draws from the unsmoothed mixture (sigma = 0), d x n
    Eigen::MatrixXd sample(int n, Rng& rng) const;

  private:
    // per-point log of w_k * N(x; mu_k, v I) without the shared constant; K x B
    Eigen::MatrixXd component_logits(const Eigen::MatrixXd& X, double v) const;
    double smoothed_variance(double sigma) const;

    Eigen::MatrixXd means_;    // d x K
    Eigen::VectorXd weights_;  // K, normalized in the constructor
    double tau2_;
};

// Best single network output for the shared-across-levels parametrization
// score(x, sigma_i) = F(x) / sigma_i: averaging the per-level normalized
// regression targets uniformly over the schedule gives
//   F*(x) = (1/L) sum_i (posterior_mean(x, sigma_i) - x) / sigma_i.
Eigen::MatrixXd optimal_unconditional_score(const GaussianMixture& gm,
                                             const Eigen::MatrixXd& X,
                                             const NoiseSchedule& schedule);

// Harmonic mean of the schedule levels: 1/sbar = (1/L) sum_i 1/sigma_i.
// For a point mass at x0 the optimum above collapses to (x0 - x) / sbar,
// so sbar is the single scale the shared parametrization actually learns.
double effective_sigma(const NoiseSchedule& schedule);

}  // namespace scorelab
