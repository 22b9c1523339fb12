#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scorelab/losses.hpp"
#include "scorelab/mlp.hpp"
#include "scorelab/optim.hpp"
#include "scorelab/schedule.hpp"

namespace scorelab {

struct TrainConfig {
    NoiseSchedule schedule;
    int iterations = 20000;
    int batch_size = 128;
    std::vector<int> hidden = {128, 128, 128};
    std::vector<int> disc_hidden = {128, 128};
    bool conditional = false;
    double lambda = 1.0;  // score-matching weight in the hybrid objective
    int n_disc = 1;       // discriminator updates per score update
    double lr = 1e-3;
    double score_beta1 = 0.0;
    double score_beta2 = 0.9;
    double disc_beta1 = -0.5;
    double disc_beta2 = 0.9;
    double ema_decay = 0.999;
    std::uint64_t seed = 0;
    int checkpoint_every = 2500;
    std::string checkpoint_dir;  // empty: keep everything in memory
    int log_every = 100;
    double adv_weight = 1.0;  // debug scale on the adversarial term only

    void validate() const;
};

struct LossRow {
    int iteration;
    double dsm_loss;
    double d_loss;      // NaN for non-adversarial training
    double g_adv_loss;  // NaN for non-adversarial training
};

struct TrainReport {
    std::vector<LossRow> rows;
    double wall_seconds = 0.0;
    std::string final_checkpoint;  // empty when checkpoint_dir unset
};

struct TrainResult {
    Mlp net;
    EmaState ema;
    Mlp disc;  // untouched zero net for the non-adversarial trainer
    std::uint64_t steps = 0;
    std::uint64_t disc_steps = 0;
    TrainReport report;
};

// Non-adversarial training. One sequential RNG stream drives everything;
// per iteration the draw order is: batch indices, then per-sample level
// indices, then the corruption normals column by column.
TrainResult train_dsm(const Eigen::MatrixXd& data, const TrainConfig& cfg);

// Alternating hybrid training: per outer iteration, n_disc discriminator
// updates (each drawing a real batch, then a fake triple in the same order
// as above) followed by one score update whose (x, sigma, z) triple feeds
// both the score-matching term and the adversarial term.
TrainResult train_hybrid(const Eigen::MatrixXd& data, const TrainConfig& cfg);

// Draw one training batch from the stream: indices, levels, normals.
NoisyBatch draw_batch(const Eigen::MatrixXd& data, const NoiseSchedule& schedule,
                      int batch_size, Rng& rng);

}  // namespace scorelab
