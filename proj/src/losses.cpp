#include "scorelab/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace scorelab {

namespace {

void check_batch(const NoisyBatch& b) {
    if (b.X.cols() < 1) throw std::invalid_argument("empty batch");
    if (b.sigmas.size() != b.X.cols() || b.Z.rows() != b.X.rows() ||
        b.Z.cols() != b.X.cols())
        throw std::invalid_argument("batch field shapes disagree");
    for (Eigen::Index j = 0; j < b.sigmas.size(); ++j)
        if (!(b.sigmas[j] > 0.0))
            throw std::invalid_argument("batch sigma must be positive");
}

// forward through the score net on the noisy batch, returning the
// normalized prediction F and the cache needed to push gradients back
Eigen::MatrixXd net_forward(const Mlp& net, bool conditional,
                            const NoisyBatch& b, const Eigen::MatrixXd& Xn,
                            Mlp::Cache& cache) {
    if (!conditional) return net.forward(Xn, cache);
    Eigen::MatrixXd in(Xn.rows() + 1, Xn.cols());
    in.topRows(Xn.rows()) = Xn;
    in.row(Xn.rows()) = b.sigmas.array().log().transpose();
    return net.forward(in, cache);
}

}  // namespace

Eigen::MatrixXd NoisyBatch::noisy() const {
    return X + Z * sigmas.asDiagonal();
}

LossValueGrad dsm_loss(const Mlp& net, bool conditional, const NoisyBatch& batch) {
    check_batch(batch);
    const Eigen::MatrixXd Xn = batch.noisy();
    Mlp::Cache cache;
    const Eigen::MatrixXd F = net_forward(net, conditional, batch, Xn, cache);
    const Eigen::MatrixXd R = F + batch.Z;  // residual sigma*s + z per column
    const auto B = static_cast<double>(batch.size());

    LossValueGrad out;
    out.value = 0.5 * R.squaredNorm() / B;
    out.grad = net.backward(cache, R / B);
    return out;
}

double dsm_loss_value(const ScoreModel& model, const NoisyBatch& batch) {
    check_batch(batch);
    const Eigen::MatrixXd Xn = batch.noisy();
    double acc = 0.0;
    for (Eigen::Index j = 0; j < batch.size(); ++j) {
        const double s = batch.sigmas[j];
        const Eigen::VectorXd r =
            s * model.score(Xn.col(j), s) + batch.Z.col(j);
        acc += 0.5 * r.squaredNorm();
    }
    return acc / static_cast<double>(batch.size());
}

LossValueGrad lsgan_d_loss(const Mlp& disc, const Eigen::MatrixXd& real,
                           const Eigen::MatrixXd& fake) {
    if (real.cols() < 1 || fake.cols() < 1)
        throw std::invalid_argument("lsgan_d_loss: empty batch");
    Mlp::Cache real_cache, fake_cache;
    const Eigen::MatrixXd dr = disc.forward(real, real_cache);
    const Eigen::MatrixXd df = disc.forward(fake, fake_cache);
    const Eigen::ArrayXXd er = dr.array() - 1.0;  // target +1 on data
    const Eigen::ArrayXXd ef = df.array() + 1.0;  // target -1 on denoised fakes
    const auto Br = static_cast<double>(real.cols());
    const auto Bf = static_cast<double>(fake.cols());

    LossValueGrad out;
    out.value = er.square().sum() / Br + ef.square().sum() / Bf;
    out.grad = disc.backward(real_cache, (2.0 / Br) * er.matrix()) +
               disc.backward(fake_cache, (2.0 / Bf) * ef.matrix());
    return out;
}

Eigen::MatrixXd eds_batch(const Mlp& net, bool conditional,
                          const NoisyBatch& batch) {
    check_batch(batch);
    const Eigen::MatrixXd Xn = batch.noisy();
    Mlp::Cache cache;
    const Eigen::MatrixXd F = net_forward(net, conditional, batch, Xn, cache);
    // H = sigma^2 (F/sigma) + x_noisy = sigma F + x_noisy
    return F * batch.sigmas.asDiagonal() + Xn;
}

HybridLoss hybrid_g_loss(const Mlp& net, bool conditional, const Mlp& disc,
                         const NoisyBatch& batch, double lambda,
                         double adv_weight) {
    check_batch(batch);
    if (lambda < 0.0) throw std::invalid_argument("hybrid_g_loss: lambda >= 0");
    const Eigen::MatrixXd Xn = batch.noisy();
    Mlp::Cache net_cache;
    const Eigen::MatrixXd F = net_forward(net, conditional, batch, Xn, net_cache);
    const Eigen::MatrixXd H = F * batch.sigmas.asDiagonal() + Xn;
    const auto B = static_cast<double>(batch.size());

    Mlp::Cache disc_cache;
    const Eigen::MatrixXd d = disc.forward(H, disc_cache);
    const Eigen::ArrayXXd e = d.array() - 1.0;

    const Eigen::MatrixXd R = F + batch.Z;

    HybridLoss out;
    out.adv = e.square().sum() / B;
    out.dsm = 0.5 * R.squaredNorm() / B;
    out.total = adv_weight * out.adv + lambda * out.dsm;

    // adversarial gradient reaches F through the discriminator's input:
    // dL/dH = disc-input gradient of (adv_weight/B) sum (D(H)-1)^2,
    // then dL/dF += dL/dH * sigma (from H = sigma F + x_noisy)
    Eigen::MatrixXd dH;
    disc.backward(disc_cache, (2.0 * adv_weight / B) * e.matrix(), &dH);
    Eigen::MatrixXd dF = dH * batch.sigmas.asDiagonal();
    dF += (lambda / B) * R;
    out.grad = net.backward(net_cache, dF);
    return out;
}

}  // namespace scorelab
