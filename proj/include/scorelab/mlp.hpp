#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace scorelab {

// Fully connected network with softplus hidden activations and a linear
// output layer. Parameters live in one flat vector (layer by layer, weights
// then bias) so the optimizer, EMA, and checkpoints treat them uniformly.
// Batches are column-major: X is input_dim x B.
class Mlp {
  public:
    // widths = {input, hidden..., output}; at least {input, output}
    Mlp(std::vector<int> widths, std::uint64_t seed);  // fan-in uniform init
    static Mlp zeros(std::vector<int> widths);

    const std::vector<int>& widths() const { return widths_; }
    int input_dim() const { return widths_.front(); }
    int output_dim() const { return widths_.back(); }
    int layers() const { return static_cast<int>(widths_.size()) - 1; }
    Eigen::Index param_count() const { return params_.size(); }
    const Eigen::VectorXd& params() const { return params_; }
    void set_params(const Eigen::VectorXd& p);

    Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
    Eigen::Map<const Eigen::VectorXd> bias(int layer) const;

    Eigen::MatrixXd forward(const Eigen::MatrixXd& X) const;

    // Activations retained for the matching backward pass. `inputs[l]` is
    // what layer l consumed; `pre[l]` its pre-activation output.
    struct Cache {
        std::vector<Eigen::MatrixXd> inputs;
        std::vector<Eigen::MatrixXd> pre;
        Eigen::Index batch = 0;
    };
    Eigen::MatrixXd forward(const Eigen::MatrixXd& X, Cache& cache) const;

    // dY is d(loss)/d(output), output_dim x B, for the batch that produced
    // `cache`. Returns the flat parameter gradient; when dX is non-null it
    // receives d(loss)/d(input), which lets callers chain through networks
    // (the adversarial loss differentiates the discriminator's input).
    Eigen::VectorXd backward(const Cache& cache, const Eigen::MatrixXd& dY,
                             Eigen::MatrixXd* dX = nullptr) const;

  private:
    explicit Mlp(std::vector<int> widths);
    Eigen::Index weight_offset(int layer) const;
    Eigen::Index bias_offset(int layer) const;

    std::vector<int> widths_;
    std::vector<Eigen::Index> offsets_;  // flat offset of each layer's weights
    Eigen::VectorXd params_;
};

// softplus and its derivative, overflow-safe at both tails
Eigen::ArrayXXd softplus(const Eigen::ArrayXXd& z);
Eigen::ArrayXXd softplus_grad(const Eigen::ArrayXXd& z);

}  // namespace scorelab
