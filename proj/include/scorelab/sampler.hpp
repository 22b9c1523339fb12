#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>

#include "scorelab/rng.hpp"
#include "scorelab/schedule.hpp"
#include "scorelab/score_model.hpp"

namespace scorelab {

enum class SamplerVariant { als, cas };
enum class InitMode { pure_noise, data_plus_noise };

// Called after every update with the aggregate chain state (d x chains).
// `step` counts updates from 1; `level` indexes the schedule entry whose
// noise the state carries after the update.
using StepCallback =
    std::function<void(int step, int level, double sigma_level,
                       const Eigen::MatrixXd& X)>;

// Both initializers corrupt at sigma0 = sigma1/gamma, the level just above
// the schedule: the first sampler update then lands exactly on sigma1.
// Chain c of a run draws its noise from ChainRng(seed, c) at step 0.
Eigen::MatrixXd init_pure_noise(const NoiseSchedule& s, int dim, int chains,
                                std::uint64_t seed);
Eigen::MatrixXd init_data_plus_noise(const NoiseSchedule& s,
                                     const Eigen::MatrixXd& data,
                                     std::uint64_t seed);

// Annealed Langevin sampling: for each level i, n_sigma updates
//   x <- x + a_i s(x, sigma_i) + sqrt(2 a_i) z,  a_i = epsilon sigma_i^2 / sigmaL^2.
// Exactly L * n_sigma updates; chain c consumes ChainRng(seed, c) at steps
// 1..L*n_sigma. Throws DivergenceError (naming the update) if any chain
// leaves the ||x|| <= 1e6 * sigma1 guard or goes non-finite.
Eigen::MatrixXd als_sample(const ScoreModel& model, const NoiseSchedule& s,
                           double epsilon, int n_sigma, Eigen::MatrixXd X,
                           std::uint64_t seed, const StepCallback& cb = {});

// Consistent annealed sampling: one update per level,
//   x <- x + eta sigma_prev^2 s(x, sigma_prev) + beta sigma_i z,
// where sigma_prev is the level the state is entering from (sigma1/gamma
// ahead of the first update) and beta = sqrt(1 - (1-eta)^2/gamma^2). Each
// update hands the state from one schedule level to the next, so under the
// optimal score the residual noise std is sigma_i exactly after update i
// and sigmaL at the end. Finer sampling comes from dilating the schedule
// first, never from an inner loop.
Eigen::MatrixXd cas_sample(const ScoreModel& model, const NoiseSchedule& s,
                           double epsilon, Eigen::MatrixXd X,
                           std::uint64_t seed, const StepCallback& cb = {});

// Single direct-form updates (the samplers are built on these).
Eigen::MatrixXd als_step(const ScoreModel& model, const Eigen::MatrixXd& X,
                         double sigma, double eta, const Eigen::MatrixXd& Z);
Eigen::MatrixXd cas_step(const ScoreModel& model, const Eigen::MatrixXd& X,
                         double sigma_from, double sigma_to, double eta,
                         const Eigen::MatrixXd& Z);

// The same updates written through the denoiser H(x, sigma):
//   als: (1-eta) x + eta H(x, sigma_from) + sqrt(2 eta) sigma_from z
//   cas: (1-eta) x + eta H(x, sigma_from) + beta sigma_to z
// Algebraically identical to the direct forms; floating-point orderings
// differ, so comparisons are up to relative tolerance.
Eigen::MatrixXd interpolation_step(const ScoreModel& model,
                                   const Eigen::MatrixXd& X, double sigma_from,
                                   double sigma_to, double eta,
                                   SamplerVariant variant,
                                   const Eigen::MatrixXd& Z);

struct SampleRunConfig {
    SamplerVariant variant = SamplerVariant::cas;
    double epsilon = 0.0;
    int n_sigma = 1;  // als: inner updates per level; cas: schedule dilation
    bool denoise = false;
    InitMode init = InitMode::pure_noise;
    int chains = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

// End-to-end convenience used by the CLI and experiments: initialize,
// run the variant (dilating first for cas when n_sigma > 1), optionally
// denoise at sigmaL. `data` is required for data_plus_noise init and is
// otherwise only consulted for the dimension.
Eigen::MatrixXd run_sampler(const ScoreModel& model, const NoiseSchedule& s,
                            const SampleRunConfig& cfg,
                            const Eigen::MatrixXd* data = nullptr,
                            const StepCallback& cb = {});

}  // namespace scorelab
