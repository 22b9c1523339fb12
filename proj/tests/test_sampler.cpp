#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "scorelab/datasets.hpp"
#include "scorelab/errors.hpp"
#include "scorelab/sampler.hpp"
#include "scorelab/schedule.hpp"
#include "scorelab/score_model.hpp"

using namespace scorelab;

namespace {

// exact score of a point mass at x0 smoothed with sigma
FunctionScore dirac_score(const Eigen::Vector2d& x0) {
    return FunctionScore(2, [x0](const Eigen::MatrixXd& X, double sigma) {
        return (x0.replicate(1, X.cols()) - X) / (sigma * sigma);
    });
}

}  // namespace

TEST_CASE("initializers corrupt at the level above the schedule") {
    const NoiseSchedule s = geometric_schedule(2.0, 0.5, 5);
    const double sigma0 = s.sigma1() / s.gamma;

    const Eigen::MatrixXd X = init_pure_noise(s, 2, 6, 42);
    REQUIRE(X.rows() == 2);
    REQUIRE(X.cols() == 6);
    for (int c = 0; c < 6; ++c) {
        const Eigen::VectorXd z =
            ChainRng(42, static_cast<std::uint64_t>(c)).normal_vector(0, 2);
        CHECK((X.col(c) - sigma0 * z).norm() == 0.0);
    }

    Eigen::MatrixXd data(2, 3);
    data << 1.0, -2.0, 0.5, 0.0, 3.0, -1.0;
    const Eigen::MatrixXd Y = init_data_plus_noise(s, data, 42);
    for (int c = 0; c < 3; ++c) {
        const Eigen::VectorXd z =
            ChainRng(42, static_cast<std::uint64_t>(c)).normal_vector(0, 2);
        CHECK((Y.col(c) - (data.col(c) + sigma0 * z)).norm() == 0.0);
    }

    CHECK_THROWS_AS(init_pure_noise(s, 2, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(init_data_plus_noise(s, Eigen::MatrixXd(2, 0), 1),
                    std::invalid_argument);
}

TEST_CASE("single updates follow their stated formulas") {
    const auto zero = zero_score(2);
    Eigen::MatrixXd X(2, 3), Z(2, 3);
    X << 1.0, -0.5, 2.0, 0.3, 1.5, -1.0;
    Z << 0.2, -1.1, 0.7, 0.9, 0.1, -0.4;

    // annealed update with a silent score is pure noise injection
    const double sigma = 0.8, eta = 0.3;
    const Eigen::MatrixXd A = als_step(*zero, X, sigma, eta, Z);
    const double alpha = eta * sigma * sigma;
    CHECK((A - (X + std::sqrt(2.0 * alpha) * Z)).cwiseAbs().maxCoeff() <
          1e-15);

    // consistent update mixes in exactly beta * sigma_to noise
    const double s_from = 0.8, s_to = 0.6;
    const Eigen::MatrixXd C = cas_step(*zero, X, s_from, s_to, eta, Z);
    const double g = s_to / s_from;
    const double beta = std::sqrt(1.0 - (1.0 - eta) * (1.0 - eta) / (g * g));
    CHECK((C - (X + beta * s_to * Z)).cwiseAbs().maxCoeff() < 1e-15);

    // a full step (eta = 1) lands on the denoised point plus fresh noise
    const FunctionScore ds = dirac_score({1.0, -2.0});
    const Eigen::MatrixXd F = cas_step(ds, X, s_from, s_to, 1.0, Z);
    Eigen::MatrixXd want = s_to * Z;
    want.row(0).array() += 1.0;
    want.row(1).array() += -2.0;
    CHECK((F - want).cwiseAbs().maxCoeff() < 1e-12);

    // ratio too steep for the contraction: hard error, never clamped
    CHECK_THROWS_AS(cas_step(*zero, X, 0.8, 0.2, 0.3, Z), ConfigError);
}

TEST_CASE("full-step consistent sampling teleports a point mass") {
    // with eta = 1 each update is x0 + sigma_t * z exactly, so the final
    // state carries sigmaL noise around the mass regardless of the init
    const NoiseSchedule s = geometric_schedule(3.0, 0.2, 6);
    const Eigen::Vector2d x0(1.0, -2.0);
    const FunctionScore model = dirac_score(x0);
    const double epsilon = s.sigmaL() * s.sigmaL();  // eta = 1
    const std::uint64_t seed = 9;

    Eigen::MatrixXd X = init_pure_noise(s, 2, 5, seed);
    X = cas_sample(model, s, epsilon, std::move(X), seed);
    for (int c = 0; c < 5; ++c) {
        const Eigen::VectorXd z =
            ChainRng(seed, static_cast<std::uint64_t>(c))
                .normal_vector(static_cast<std::uint64_t>(s.levels()), 2);
        CHECK((X.col(c) - (x0 + s.sigmaL() * z)).cwiseAbs().maxCoeff() <
              1e-12);
    }
}

TEST_CASE("consistent sampling keeps the residual at the schedule level") {
    // point mass + exact score: the cross-chain std after update t must sit
    // at sigma_t for every t (the estimator's own noise is ~1.1% here)
    const NoiseSchedule s = geometric_schedule(1.0, 0.343, 4);
    const Eigen::Vector2d x0(0.7, -0.3);
    const FunctionScore model = dirac_score(x0);
    const double eta = 0.5;
    const double epsilon = eta * s.sigmaL() * s.sigmaL();
    const int chains = 2000;

    const Eigen::MatrixXd data = x0.replicate(1, chains);
    Eigen::MatrixXd X = init_data_plus_noise(s, data, 4);
    std::vector<double> stds;
    cas_sample(model, s, epsilon, std::move(X), 4,
               [&](int, int, double, const Eigen::MatrixXd& state) {
                   const Eigen::MatrixXd R =
                       state - x0.replicate(1, state.cols());
                   stds.push_back(
                       std::sqrt(R.squaredNorm() / static_cast<double>(R.size())));
               });
    REQUIRE(stds.size() == 4);
    for (int i = 0; i < 4; ++i)
        CHECK(stds[static_cast<std::size_t>(i)] ==
              doctest::Approx(s.sigmas[static_cast<std::size_t>(i)])
                  .epsilon(0.05));
}

TEST_CASE("interpolation form matches the direct updates") {
    const GaussianMixture gm = grid25_mixture(2.0, 0.05);
    const AnalyticConditionalScore model(gm);
    Rng rng(31);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::MatrixXd X = 3.0 * rng.normal_matrix(2, 4);
        const Eigen::MatrixXd Z = rng.normal_matrix(2, 4);
        const double s_from = 0.05 + 2.0 * rng.uniform();
        const double ratio = 0.55 + 0.4 * rng.uniform();
        const double s_to = s_from * ratio;
        const double eta = 0.5 + 0.45 * rng.uniform();  // valid for ratio>.55

        const Eigen::MatrixXd a1 = als_step(model, X, s_from, eta, Z);
        const Eigen::MatrixXd a2 = interpolation_step(
            model, X, s_from, s_to, eta, SamplerVariant::als, Z);
        CHECK((a1 - a2).cwiseAbs().maxCoeff() <
              1e-10 * std::max(1.0, a1.cwiseAbs().maxCoeff()));

        const Eigen::MatrixXd c1 = cas_step(model, X, s_from, s_to, eta, Z);
        const Eigen::MatrixXd c2 = interpolation_step(
            model, X, s_from, s_to, eta, SamplerVariant::cas, Z);
        CHECK((c1 - c2).cwiseAbs().maxCoeff() <
              1e-10 * std::max(1.0, c1.cwiseAbs().maxCoeff()));
        checked += 2;
    }
    CHECK(checked == 400);
}

TEST_CASE("run_sampler dilates the schedule for fine consistent sampling") {
    const NoiseSchedule s = geometric_schedule(2.0, 0.25, 4);
    const GaussianMixture gm = grid25_mixture(1.0, 0.1);
    const AnalyticConditionalScore model(gm);

    SampleRunConfig cfg;
    cfg.variant = SamplerVariant::cas;
    cfg.epsilon = 0.02;  // eta = 0.32 on the dilated schedule
    cfg.n_sigma = 3;
    cfg.chains = 8;
    cfg.seed = 5;
    const Eigen::MatrixXd got = run_sampler(model, s, cfg);

    const NoiseSchedule fine = dilate(s, 3);
    Eigen::MatrixXd X = init_pure_noise(fine, 2, 8, 5);
    const Eigen::MatrixXd want =
        cas_sample(model, fine, cfg.epsilon, std::move(X), 5);
    CHECK((got - want).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("callbacks fire once per update with the entered level") {
    const NoiseSchedule s = geometric_schedule(2.0, 0.25, 4);
    const auto zero = zero_score(2);

    std::vector<int> steps, levels;
    std::vector<double> sigmas;
    Eigen::MatrixXd X0 = init_pure_noise(s, 2, 3, 1);
    als_sample(*zero, s, 0.01, 2, X0, 1,
               [&](int step, int level, double sigma, const Eigen::MatrixXd&) {
                   steps.push_back(step);
                   levels.push_back(level);
                   sigmas.push_back(sigma);
               });
    REQUIRE(steps.size() == 8);  // L * n_sigma updates
    for (int i = 0; i < 8; ++i) {
        CHECK(steps[static_cast<std::size_t>(i)] == i + 1);
        CHECK(levels[static_cast<std::size_t>(i)] == i / 2);
        CHECK(sigmas[static_cast<std::size_t>(i)] ==
              s.sigmas[static_cast<std::size_t>(i / 2)]);
    }

    steps.clear();
    SampleRunConfig cfg;
    cfg.variant = SamplerVariant::cas;
    cfg.epsilon = 0.02;
    cfg.n_sigma = 3;
    cfg.chains = 2;
    const GaussianMixture gm = grid25_mixture(1.0, 0.1);
    const AnalyticConditionalScore model(gm);
    run_sampler(model, s, cfg,
                nullptr, [&](int step, int, double, const Eigen::MatrixXd&) {
                    steps.push_back(step);
                });
    CHECK(steps.size() == 10);  // (L - 1) * n_sigma + 1 dilated updates
}

TEST_CASE("data columns become the chains under data_plus_noise init") {
    const NoiseSchedule s = geometric_schedule(2.0, 0.5, 5);
    const GaussianMixture gm = grid25_mixture(1.0, 0.1);
    const AnalyticConditionalScore model(gm);
    Rng rng(8);
    const Eigen::MatrixXd data = rng.normal_matrix(2, 7);

    SampleRunConfig cfg;
    cfg.variant = SamplerVariant::cas;
    cfg.epsilon = 0.15;  // eta = 0.6 >= 1 - gamma
    cfg.init = InitMode::data_plus_noise;
    cfg.chains = 99;  // ignored: the data defines the chain count
    const Eigen::MatrixXd out = run_sampler(model, s, cfg, &data);
    CHECK(out.cols() == 7);
    CHECK_THROWS_AS(run_sampler(model, s, cfg, nullptr), ConfigError);
}

TEST_CASE("final denoising composes with the sampler deterministically") {
    const NoiseSchedule s = geometric_schedule(2.0, 0.5, 5);
    const GaussianMixture gm = grid25_mixture(1.0, 0.1);
    const AnalyticConditionalScore model(gm);

    SampleRunConfig raw;
    raw.variant = SamplerVariant::cas;
    raw.epsilon = 0.15;
    raw.chains = 6;
    raw.seed = 12;
    SampleRunConfig den = raw;
    den.denoise = true;

    const Eigen::MatrixXd no_clean = run_sampler(model, s, raw);
    const Eigen::MatrixXd cleaned = run_sampler(model, s, den);
    const Eigen::MatrixXd want = denoise_final(model, no_clean, s.sigmaL());
    CHECK((cleaned - want).cwiseAbs().maxCoeff() == 0.0);
    CHECK((cleaned - no_clean).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("runaway chains trip the divergence guard with the step index") {
    const NoiseSchedule s = geometric_schedule(1.0, 0.5, 3);
    const FunctionScore runaway(2, [](const Eigen::MatrixXd& X, double) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, X.cols());
        g.row(0).setConstant(1e9);
        return g;
    });
    Eigen::MatrixXd X = init_pure_noise(s, 2, 3, 2);
    try {
        als_sample(runaway, s, 0.05, 1, X, 2);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(e.step == 1);
    }
    CHECK_THROWS_AS(cas_sample(runaway, s, 0.15, X, 2), DivergenceError);
}

TEST_CASE("sampler argument validation") {
    const NoiseSchedule s = geometric_schedule(1.0, 0.5, 3);
    const auto zero = zero_score(2);
    Eigen::MatrixXd X = init_pure_noise(s, 2, 2, 1);
    CHECK_THROWS_AS(als_sample(*zero, s, 0.0, 1, X, 1), ConfigError);
    CHECK_THROWS_AS(als_sample(*zero, s, 0.01, 0, X, 1), ConfigError);
    CHECK_THROWS_AS(als_sample(*zero, s, 0.01, 1, Eigen::MatrixXd::Zero(3, 2), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(cas_sample(*zero, s, 0.01, Eigen::MatrixXd::Zero(3, 2), 1),
                    ConfigError);  // eta too small for gamma, caught first

    SampleRunConfig cfg;
    cfg.epsilon = 0.0;
    const GaussianMixture gm = grid25_mixture(1.0, 0.1);
    const AnalyticConditionalScore model(gm);
    CHECK_THROWS_AS(run_sampler(model, s, cfg), ConfigError);
    cfg.epsilon = 0.15;
    cfg.chains = 0;
    CHECK_THROWS_AS(run_sampler(model, s, cfg), ConfigError);
}
