#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace scorelab {

// Adaptive-moment optimizer with bias correction. beta1 may be negative
// (down to -1 exclusive): the bias-correction denominator 1 - beta1^t stays
// in [1 - |beta1|, 1 + |beta1|], so the update remains well-defined.
struct AdamState {
    Eigen::VectorXd m;  // first moment
    Eigen::VectorXd v;  // second moment, elementwise >= 0
    std::uint64_t step = 0;
    double lr;
    double beta1;
    double beta2;
    double eps;

    AdamState(Eigen::Index n, double lr, double beta1, double beta2,
              double eps = 1e-8);
};

// One in-place update; throws DivergenceError on non-finite gradients,
// reporting the step index at which they appeared.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
               AdamState& state);

struct EmaState {
    Eigen::VectorXd shadow;
    double decay;  // in [0, 1)

    EmaState(const Eigen::VectorXd& init, double decay);
};

// shadow <- decay * shadow + (1 - decay) * params
void ema_update(EmaState& ema, const Eigen::VectorXd& params);

}  // namespace scorelab
