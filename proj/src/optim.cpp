#include "scorelab/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "scorelab/errors.hpp"

namespace scorelab {

AdamState::AdamState(Eigen::Index n, double lr, double beta1, double beta2,
                     double eps)
    : m(Eigen::VectorXd::Zero(n)),
      v(Eigen::VectorXd::Zero(n)),
      lr(lr),
      beta1(beta1),
      beta2(beta2),
      eps(eps) {
    if (!(lr > 0.0)) throw std::invalid_argument("AdamState: lr must be > 0");
    if (!(beta1 > -1.0 && beta1 < 1.0))
        throw std::invalid_argument("AdamState: beta1 must be in (-1, 1)");
    if (!(beta2 > 0.0 && beta2 < 1.0))
        throw std::invalid_argument("AdamState: beta2 must be in (0, 1)");
    if (!(eps > 0.0)) throw std::invalid_argument("AdamState: eps must be > 0");
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
               AdamState& state) {
    if (params.size() != state.m.size() || grad.size() != state.m.size())
        throw std::invalid_argument("adam_step: size mismatch");
    if (!grad.allFinite())
        throw DivergenceError("adam_step: non-finite gradient",
                              static_cast<std::size_t>(state.step + 1));
    state.step += 1;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
    state.v = state.beta2 * state.v.array() +
              (1.0 - state.beta2) * grad.array().square();
    const auto t = static_cast<double>(state.step);
    const double m_corr = 1.0 - std::pow(state.beta1, t);
    const double v_corr = 1.0 - std::pow(state.beta2, t);
    params.array() -= state.lr * (state.m.array() / m_corr) /
                      ((state.v.array() / v_corr).sqrt() + state.eps);
}

EmaState::EmaState(const Eigen::VectorXd& init, double decay)
    : shadow(init), decay(decay) {
    if (!(decay >= 0.0 && decay < 1.0))
        throw std::invalid_argument("EmaState: decay must be in [0, 1)");
}

void ema_update(EmaState& ema, const Eigen::VectorXd& params) {
    if (params.size() != ema.shadow.size())
        throw std::invalid_argument("ema_update: size mismatch");
    ema.shadow = ema.decay * ema.shadow + (1.0 - ema.decay) * params;
}

}  // namespace scorelab
