#pragma once

#include <Eigen/Core>

#include "scorelab/mlp.hpp"
#include "scorelab/schedule.hpp"
#include "scorelab/score_model.hpp"

namespace scorelab {

// A training batch: clean points X (d x B), one schedule level per sample,
// and the standard-normal draws Z used to corrupt them. The noisy input is
// always x_noisy = X + sigma_j * Z column-wise; losses recompute it so value
// and gradient can never disagree about the corruption.
struct NoisyBatch {
    Eigen::MatrixXd X;       // d x B clean samples
    Eigen::VectorXd sigmas;  // B, each drawn from the schedule
    Eigen::MatrixXd Z;       // d x B standard normals

    Eigen::Index size() const { return X.cols(); }
    Eigen::MatrixXd noisy() const;
};

struct LossValueGrad {
    double value = 0.0;
    Eigen::VectorXd grad;
};

// Score-matching loss, mean over the batch of (1/2)||sigma s(x_noisy, sigma)
// + z||^2. Under the normalized parametrization s = F/sigma this is
// (1/2)||F(x_noisy) + z||^2, which is what the gradient path uses.
LossValueGrad dsm_loss(const Mlp& net, bool conditional, const NoisyBatch& batch);

// Value-only form for arbitrary score models (analytic oracles included).
double dsm_loss_value(const ScoreModel& model, const NoisyBatch& batch);

// Least-squares discriminator loss: mean[(D(real) - 1)^2] +
// mean[(D(fake) + 1)^2]. The fake batch is a plain matrix of denoised
// samples, so no gradient can leak back into the score network.
LossValueGrad lsgan_d_loss(const Mlp& disc, const Eigen::MatrixXd& real,
                           const Eigen::MatrixXd& fake);

// Score-network objective of the hybrid scheme:
//   mean[(D(H(x_noisy, sigma)) - 1)^2] + lambda * dsm_term,
// with H = sigma^2 s + x_noisy built from the score net, and the
// discriminator held frozen. `adv_weight` scales only the adversarial term;
// setting it to 0 is the debug path that must reproduce the pure DSM
// gradient direction. Returns the gradient w.r.t. the score parameters.
struct HybridLoss {
    double total = 0.0;
    double adv = 0.0;  // unweighted adversarial term, mean[(D(H)-1)^2]
    double dsm = 0.0;  // unweighted score-matching term
    Eigen::VectorXd grad;
};
HybridLoss hybrid_g_loss(const Mlp& net, bool conditional, const Mlp& disc,
                         const NoisyBatch& batch, double lambda,
                         double adv_weight = 1.0);

// The denoised batch the discriminator sees: sigma^2 s + x_noisy per column,
// computed from the current net without gradient bookkeeping.
Eigen::MatrixXd eds_batch(const Mlp& net, bool conditional,
                          const NoisyBatch& batch);

}  // namespace scorelab
