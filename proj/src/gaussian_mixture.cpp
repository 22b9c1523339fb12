#include "scorelab/gaussian_mixture.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace scorelab {

GaussianMixture::GaussianMixture(Eigen::MatrixXd means, Eigen::VectorXd weights,
                                 double tau2)
    : means_(std::move(means)), weights_(std::move(weights)), tau2_(tau2) {
    if (means_.rows() < 1 || means_.cols() < 1)
        throw std::invalid_argument("GaussianMixture: means must be d x K, K >= 1");
    if (weights_.size() != means_.cols())
        throw std::invalid_argument("GaussianMixture: one weight per component");
    if (!(tau2_ >= 0.0) || !std::isfinite(tau2_))
        throw std::invalid_argument("GaussianMixture: tau2 must be >= 0");
    for (Eigen::Index k = 0; k < weights_.size(); ++k)
        if (!(weights_[k] > 0.0) || !std::isfinite(weights_[k]))
            throw std::invalid_argument("GaussianMixture: weights must be positive");
    weights_ /= weights_.sum();
}

double GaussianMixture::smoothed_variance(double sigma) const {
    if (!(sigma >= 0.0))
        throw std::invalid_argument("GaussianMixture: sigma must be >= 0");
    const double v = tau2_ + sigma * sigma;
    if (v == 0.0)
        throw std::invalid_argument(
            "GaussianMixture: density is degenerate at sigma = 0 with tau2 = 0");
    return v;
}

Eigen::MatrixXd GaussianMixture::component_logits(const Eigen::MatrixXd& X,
                                                  double v) const {
    if (X.rows() != means_.rows())
        throw std::invalid_argument("GaussianMixture: point dimension mismatch");
    const Eigen::Index K = means_.cols();
    const Eigen::Index B = X.cols();
    // ||x - mu_k||^2 = ||x||^2 - 2 mu_k.x + ||mu_k||^2, batched over columns
    const Eigen::VectorXd x2 = X.colwise().squaredNorm();
    const Eigen::VectorXd m2 = means_.colwise().squaredNorm();
    Eigen::MatrixXd logits = means_.transpose() * X;  // K x B
    for (Eigen::Index j = 0; j < B; ++j)
        for (Eigen::Index k = 0; k < K; ++k) {
            const double d2 = x2[j] - 2.0 * logits(k, j) + m2[k];
            logits(k, j) = std::log(weights_[k]) - d2 / (2.0 * v);
        }
    return logits;
}

Eigen::VectorXd GaussianMixture::smoothed_log_density(const Eigen::MatrixXd& X,
                                             double sigma) const {
    const double v = smoothed_variance(sigma);
    const Eigen::MatrixXd logits = component_logits(X, v);
    const double log_norm =
        -0.5 * dim() * std::log(2.0 * std::numbers::pi * v);
    Eigen::VectorXd out(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double m = logits.col(j).maxCoeff();
        out[j] = m + std::log((logits.col(j).array() - m).exp().sum()) + log_norm;
    }
    return out;
}

Eigen::MatrixXd GaussianMixture::responsibilities(const Eigen::MatrixXd& X,
                                                  double sigma) const {
    const double v = smoothed_variance(sigma);
    Eigen::MatrixXd r = component_logits(X, v);
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
        const double m = r.col(j).maxCoeff();
        r.col(j) = (r.col(j).array() - m).exp();
        r.col(j) /= r.col(j).sum();
    }
    return r;
}

Eigen::MatrixXd GaussianMixture::optimal_conditional_score(const Eigen::MatrixXd& X,
                                       double sigma) const {
    const double v = smoothed_variance(sigma);
    const Eigen::MatrixXd r = responsibilities(X, sigma);
    // sum_k r_k (mu_k - x) / v  =  (means * r - x) / v
    return (means_ * r - X) / v;
}

Eigen::MatrixXd GaussianMixture::posterior_mean(const Eigen::MatrixXd& X,
                                                double sigma) const {
    const double v = smoothed_variance(sigma);
    const double s2 = sigma * sigma;
    const Eigen::MatrixXd r = responsibilities(X, sigma);
    return (tau2_ * X + s2 * (means_ * r)) / v;
}

Eigen::MatrixXd GaussianMixture::sample(int n, Rng& rng) const {
    if (n < 0) throw std::invalid_argument("GaussianMixture::sample: n >= 0");
    const double tau = std::sqrt(tau2_);
    Eigen::MatrixXd out(dim(), n);
    // per draw: one uniform for the component, then dim() normals
    for (int j = 0; j < n; ++j) {
        const double u = rng.uniform();
        double cum = 0.0;
        Eigen::Index k = 0;
        for (; k < weights_.size() - 1; ++k) {
            cum += weights_[k];
            if (u <= cum) break;
        }
        out.col(j) = means_.col(k) + tau * rng.normal_vector(dim());
    }
    return out;
}

Eigen::MatrixXd optimal_unconditional_score(const GaussianMixture& gm,
                                             const Eigen::MatrixXd& X,
                                             const NoiseSchedule& schedule) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(X.rows(), X.cols());
    for (double sigma : schedule.sigmas)
        acc += (gm.posterior_mean(X, sigma) - X) / sigma;
    return acc / static_cast<double>(schedule.levels());
}

double effective_sigma(const NoiseSchedule& schedule) {
    double inv = 0.0;
    for (double sigma : schedule.sigmas) inv += 1.0 / sigma;
    return static_cast<double>(schedule.levels()) / inv;
}

}  // namespace scorelab
