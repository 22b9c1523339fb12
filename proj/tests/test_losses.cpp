#include <Eigen/Core>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "scorelab/losses.hpp"
#include "scorelab/rng.hpp"
#include "scorelab/schedule.hpp"
#include "scorelab/score_model.hpp"

using namespace scorelab;

namespace {

NoisyBatch make_batch(int d, int B, std::uint64_t seed) {
    const NoiseSchedule s = geometric_schedule(3.0, 0.1, 8);
    Rng rng(seed);
    NoisyBatch b;
    b.X = 2.0 * rng.normal_matrix(d, B);
    b.Z = rng.normal_matrix(d, B);
    b.sigmas.resize(B);
    for (int j = 0; j < B; ++j)
        b.sigmas[j] = s.sigmas[rng.uniform_index(s.levels())];
    return b;
}

// central finite difference of an arbitrary scalar loss in a parameter
template <typename LossFn>
double fd_param(Mlp& net, LossFn loss, Eigen::Index i, double h = 1e-6) {
    const Eigen::VectorXd base = net.params();
    Eigen::VectorXd p = base;
    p[i] += h;
    net.set_params(p);
    const double up = loss();
    p[i] = base[i] - h;
    net.set_params(p);
    const double dn = loss();
    net.set_params(base);
    return (up - dn) / (2.0 * h);
}

}  // namespace

TEST_CASE("noisy batch applies per-sample corruption") {
    NoisyBatch b = make_batch(2, 5, 1);
    const Eigen::MatrixXd Xn = b.noisy();
    for (int j = 0; j < 5; ++j)
        CHECK((Xn.col(j) - (b.X.col(j) + b.sigmas[j] * b.Z.col(j))).norm() ==
              0.0);
}

TEST_CASE("dsm value on the zero network is half the mean noise energy") {
    // F == 0 makes the objective (1/2B) sum ||z_j||^2 exactly
    const Mlp net = Mlp::zeros({2, 4, 2});
    const NoisyBatch b = make_batch(2, 32, 2);
    const LossValueGrad out = dsm_loss(net, false, b);
    const double want =
        0.5 * b.Z.squaredNorm() / static_cast<double>(b.size());
    CHECK(out.value == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("dsm gradient matches finite differences, unconditional") {
    Mlp net({2, 6, 2}, 3);
    const NoisyBatch b = make_batch(2, 9, 4);
    const Eigen::VectorXd grad = dsm_loss(net, false, b).grad;
    auto loss = [&] { return dsm_loss(net, false, b).value; };
    for (Eigen::Index i = 0; i < net.param_count(); i += 2)
        CHECK(grad[i] == doctest::Approx(fd_param(net, loss, i)).epsilon(1e-5));
}

TEST_CASE("dsm gradient matches finite differences, conditional") {
    Mlp net({3, 6, 2}, 5);  // 2-d points plus the log-sigma row
    const NoisyBatch b = make_batch(2, 9, 6);
    const Eigen::VectorXd grad = dsm_loss(net, true, b).grad;
    auto loss = [&] { return dsm_loss(net, true, b).value; };
    for (Eigen::Index i = 0; i < net.param_count(); i += 2)
        CHECK(grad[i] == doctest::Approx(fd_param(net, loss, i)).epsilon(1e-5));
}

TEST_CASE("dsm value agrees between the net path and the model path") {
    const Mlp net({2, 8, 2}, 7);
    const NoisyBatch b = make_batch(2, 16, 8);
    const double via_net = dsm_loss(net, false, b).value;
    const MlpScoreModel model(net, false);
    const double via_model = dsm_loss_value(model, b);
    CHECK(via_net == doctest::Approx(via_model).epsilon(1e-12));
}

TEST_CASE("dsm value of the exact score beats a mismatched score") {
    // sanity direction check: for a Gaussian blob, the true smoothed score
    // achieves a lower objective than a scaled-away version of it
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(2, 1);
    const GaussianMixture gm(mean, Eigen::VectorXd::Ones(1), 0.5);
    const AnalyticConditionalScore exact(gm);
    const FunctionScore off(2, [&](const Eigen::MatrixXd& X, double s) {
        return 3.0 * gm.optimal_conditional_score(X, s);
    });
    NoisyBatch b;
    Rng rng(11);
    b.X = gm.sample(4000, rng);
    b.Z = rng.normal_matrix(2, 4000);
    b.sigmas = Eigen::VectorXd::Constant(4000, 0.7);
    CHECK(dsm_loss_value(exact, b) < dsm_loss_value(off, b));
}

TEST_CASE("discriminator loss on the zero network is two") {
    // D == 0 gives (0-1)^2 + (0+1)^2 per sample pair of terms
    const Mlp disc = Mlp::zeros({2, 4, 1});
    Rng rng(12);
    const LossValueGrad out =
        lsgan_d_loss(disc, rng.normal_matrix(2, 10), rng.normal_matrix(2, 7));
    CHECK(out.value == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("discriminator gradient matches finite differences") {
    Mlp disc({2, 5, 1}, 13);
    Rng rng(14);
    const Eigen::MatrixXd real = rng.normal_matrix(2, 8);
    const Eigen::MatrixXd fake = rng.normal_matrix(2, 6);
    const Eigen::VectorXd grad = lsgan_d_loss(disc, real, fake).grad;
    auto loss = [&] { return lsgan_d_loss(disc, real, fake).value; };
    for (Eigen::Index i = 0; i < disc.param_count(); ++i)
        CHECK(grad[i] ==
              doctest::Approx(fd_param(disc, loss, i)).epsilon(1e-5));
}

TEST_CASE("perfect discriminator drives its loss to zero") {
    // a linear D scoring +1 on reals and -1 on fakes zeroes the objective;
    // approximate it with D(x) = sign-like linear map on separated clusters
    Mlp disc = Mlp::zeros({1, 1});
    Eigen::VectorXd p(2);
    p << 1.0, 0.0;  // D(x) = x
    disc.set_params(p);
    Eigen::MatrixXd real = Eigen::MatrixXd::Constant(1, 4, 1.0);
    Eigen::MatrixXd fake = Eigen::MatrixXd::Constant(1, 4, -1.0);
    CHECK(lsgan_d_loss(disc, real, fake).value == doctest::Approx(0.0));
}

TEST_CASE("eds batch applies the denoising rearrangement") {
    const Mlp net({2, 6, 2}, 15);
    const NoisyBatch b = make_batch(2, 10, 16);
    const Eigen::MatrixXd H = eds_batch(net, false, b);
    const Eigen::MatrixXd Xn = b.noisy();
    const MlpScoreModel model(net, false);
    for (int j = 0; j < b.size(); ++j) {
        const double s = b.sigmas[j];
        const Eigen::VectorXd want =
            Xn.col(j) + s * s * model.score(Xn.col(j), s);
        CHECK((H.col(j) - want).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("hybrid loss decomposes affinely in lambda and adv_weight") {
    const Mlp net({2, 6, 2}, 17);
    const Mlp disc({2, 5, 1}, 18);
    const NoisyBatch b = make_batch(2, 12, 19);
    const HybridLoss h1 = hybrid_g_loss(net, false, disc, b, 0.7, 1.3);
    CHECK(h1.total ==
          doctest::Approx(1.3 * h1.adv + 0.7 * h1.dsm).epsilon(1e-14));
    // the dsm component is exactly the standalone dsm value
    CHECK(h1.dsm ==
          doctest::Approx(dsm_loss(net, false, b).value).epsilon(1e-14));
    // scaling lambda rescales only the dsm part
    const HybridLoss h2 = hybrid_g_loss(net, false, disc, b, 1.4, 1.3);
    CHECK(h2.adv == doctest::Approx(h1.adv).epsilon(1e-15));
    CHECK(h2.total - h1.total == doctest::Approx(0.7 * h1.dsm).epsilon(1e-12));
}

TEST_CASE("hybrid gradient matches finite differences") {
    Mlp net({2, 5, 2}, 20);
    const Mlp disc({2, 4, 1}, 21);
    const NoisyBatch b = make_batch(2, 7, 22);
    const Eigen::VectorXd grad =
        hybrid_g_loss(net, false, disc, b, 0.5, 1.0).grad;
    auto loss = [&] { return hybrid_g_loss(net, false, disc, b, 0.5, 1.0).total; };
    for (Eigen::Index i = 0; i < net.param_count(); ++i)
        CHECK(grad[i] == doctest::Approx(fd_param(net, loss, i)).epsilon(1e-5));
}

TEST_CASE("hybrid gradient matches finite differences, conditional") {
    Mlp net({3, 5, 2}, 23);
    const Mlp disc({2, 4, 1}, 24);
    const NoisyBatch b = make_batch(2, 7, 25);
    const Eigen::VectorXd grad =
        hybrid_g_loss(net, true, disc, b, 0.9, 0.8).grad;
    auto loss = [&] { return hybrid_g_loss(net, true, disc, b, 0.9, 0.8).total; };
    for (Eigen::Index i = 0; i < net.param_count(); i += 2)
        CHECK(grad[i] == doctest::Approx(fd_param(net, loss, i)).epsilon(1e-5));
}

TEST_CASE("zero adversarial weight reproduces the scaled dsm gradient") {
    const Mlp net({2, 6, 2}, 26);
    const Mlp disc({2, 5, 1}, 27);
    const NoisyBatch b = make_batch(2, 10, 28);
    const double lambda = 0.6;
    const HybridLoss h = hybrid_g_loss(net, false, disc, b, lambda, 0.0);
    const LossValueGrad d = dsm_loss(net, false, b);
    CHECK((h.grad - lambda * d.grad).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(h.total == doctest::Approx(lambda * d.value).epsilon(1e-14));
}

TEST_CASE("loss input validation") {
    const Mlp net({2, 4, 2}, 29);
    const Mlp disc({2, 4, 1}, 30);
    NoisyBatch b = make_batch(2, 4, 31);
    NoisyBatch empty;
    empty.X = Eigen::MatrixXd(2, 0);
    empty.Z = Eigen::MatrixXd(2, 0);
    empty.sigmas = Eigen::VectorXd(0);
    CHECK_THROWS_AS(dsm_loss(net, false, empty), std::invalid_argument);

    NoisyBatch bad = b;
    bad.sigmas[2] = 0.0;
    CHECK_THROWS_AS(dsm_loss(net, false, bad), std::invalid_argument);
    bad = b;
    bad.Z = Eigen::MatrixXd::Zero(2, 3);
    CHECK_THROWS_AS(dsm_loss(net, false, bad), std::invalid_argument);

    CHECK_THROWS_AS(lsgan_d_loss(disc, Eigen::MatrixXd(2, 0),
                                 Eigen::MatrixXd::Zero(2, 3)),
                    std::invalid_argument);
    CHECK_THROWS_AS(hybrid_g_loss(net, false, disc, b, -0.1, 1.0),
                    std::invalid_argument);
}
