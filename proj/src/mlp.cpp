#include "scorelab/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "scorelab/rng.hpp"

namespace scorelab {

Eigen::ArrayXXd softplus(const Eigen::ArrayXXd& z) {
    // max(z, 0) + log1p(exp(-|z|)) is exact in both tails
    return z.max(0.0) + (-z.abs()).exp().log1p();
}

Eigen::ArrayXXd softplus_grad(const Eigen::ArrayXXd& z) {
    // logistic sigmoid, evaluated without overflowing exp
    return 0.5 * (1.0 + (0.5 * z).tanh());
}

Mlp::Mlp(std::vector<int> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2)
        throw std::invalid_argument("Mlp: need at least input and output widths");
    for (int w : widths_)
        if (w < 1) throw std::invalid_argument("Mlp: widths must be positive");
    Eigen::Index total = 0;
    offsets_.reserve(widths_.size() - 1);
    for (int l = 0; l < layers(); ++l) {
        offsets_.push_back(total);
        total += static_cast<Eigen::Index>(widths_[l]) * widths_[l + 1] +
                 widths_[l + 1];
    }
    params_ = Eigen::VectorXd::Zero(total);
}

Mlp::Mlp(std::vector<int> widths, std::uint64_t seed) : Mlp(std::move(widths)) {
    // weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)) in storage order, biases 0
    Rng rng(seed);
    for (int l = 0; l < layers(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
        const Eigen::Index n = static_cast<Eigen::Index>(widths_[l]) * widths_[l + 1];
        for (Eigen::Index i = 0; i < n; ++i)
            params_[weight_offset(l) + i] = bound * (2.0 * rng.uniform() - 1.0);
    }
}

Mlp Mlp::zeros(std::vector<int> widths) { return Mlp(std::move(widths)); }

void Mlp::set_params(const Eigen::VectorXd& p) {
    if (p.size() != params_.size())
        throw std::invalid_argument("Mlp::set_params: size mismatch");
    params_ = p;
}

Eigen::Index Mlp::weight_offset(int layer) const { return offsets_.at(layer); }

Eigen::Index Mlp::bias_offset(int layer) const {
    return offsets_.at(layer) +
           static_cast<Eigen::Index>(widths_[layer]) * widths_[layer + 1];
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(int layer) const {
    return {params_.data() + weight_offset(layer), widths_[layer + 1],
            widths_[layer]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(int layer) const {
    return {params_.data() + bias_offset(layer), widths_[layer + 1]};
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& X) const {
    if (X.rows() != input_dim())
        throw std::invalid_argument("Mlp::forward: input dimension mismatch");
    Eigen::MatrixXd a = X;
    for (int l = 0; l < layers(); ++l) {
        Eigen::MatrixXd z = (weight(l) * a).colwise() + bias(l);
        a = (l + 1 < layers()) ? softplus(z.array()).matrix() : std::move(z);
    }
    return a;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& X, Cache& cache) const {
    if (X.rows() != input_dim())
        throw std::invalid_argument("Mlp::forward: input dimension mismatch");
    cache.inputs.assign(static_cast<std::size_t>(layers()), {});
    cache.pre.assign(static_cast<std::size_t>(layers()), {});
    cache.batch = X.cols();
    Eigen::MatrixXd a = X;
    for (int l = 0; l < layers(); ++l) {
        cache.inputs[static_cast<std::size_t>(l)] = a;
        Eigen::MatrixXd z = (weight(l) * a).colwise() + bias(l);
        cache.pre[static_cast<std::size_t>(l)] = z;
        a = (l + 1 < layers()) ? softplus(z.array()).matrix() : std::move(z);
    }
    return a;
}

Eigen::VectorXd Mlp::backward(const Cache& cache, const Eigen::MatrixXd& dY,
                              Eigen::MatrixXd* dX) const {
    if (cache.inputs.size() != static_cast<std::size_t>(layers()))
        throw std::invalid_argument("Mlp::backward: cache from another network");
    if (dY.rows() != output_dim() || dY.cols() != cache.batch)
        throw std::invalid_argument("Mlp::backward: upstream gradient shape");

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
    Eigen::MatrixXd dz = dY;  // output layer is linear
    for (int l = layers() - 1; l >= 0; --l) {
        const auto& input = cache.inputs[static_cast<std::size_t>(l)];
        Eigen::Map<Eigen::MatrixXd> dW(grad.data() + weight_offset(l),
                                       widths_[l + 1], widths_[l]);
        Eigen::Map<Eigen::VectorXd> db(grad.data() + bias_offset(l),
                                       widths_[l + 1]);
        dW = dz * input.transpose();
        db = dz.rowwise().sum();
        if (l > 0) {
            dz = (weight(l).transpose() * dz).array() *
                 softplus_grad(cache.pre[static_cast<std::size_t>(l - 1)].array());
        } else if (dX) {
            *dX = weight(0).transpose() * dz;
        }
    }
    return grad;
}

}  // namespace scorelab
