#include "scorelab/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "scorelab/checkpoint.hpp"
#include "scorelab/errors.hpp"

namespace scorelab {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<int> full_widths(int dim, const std::vector<int>& hidden, int out,
                             bool conditional) {
    std::vector<int> widths;
    widths.push_back(conditional ? dim + 1 : dim);
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(out);
    return widths;
}

void check_finite_loss(double value, std::uint64_t iteration) {
    if (!std::isfinite(value))
        throw DivergenceError("training loss is not finite",
                              static_cast<std::size_t>(iteration));
}

std::string write_snapshot(const TrainConfig& cfg, const Mlp& net,
                           const EmaState& ema, std::uint64_t step) {
    Checkpoint ckpt;
    ckpt.widths = net.widths();
    ckpt.conditional = cfg.conditional;
    ckpt.step = step;
    ckpt.params = net.params();
    ckpt.ema = ema.shadow;
    ckpt.ema_decay = cfg.ema_decay;
    const std::string path =
        cfg.checkpoint_dir + "/ckpt_" + std::to_string(step) + ".slcp";
    save_checkpoint(path, ckpt);
    return path;
}

}  // namespace

void TrainConfig::validate() const {
    if (schedule.sigmas.empty())
        throw ConfigError("TrainConfig: schedule is required");
    if (iterations < 0) throw ConfigError("TrainConfig: iterations >= 0");
    if (batch_size < 1) throw ConfigError("TrainConfig: batch size >= 1");
    if (lambda < 0.0) throw ConfigError("TrainConfig: lambda >= 0");
    if (n_disc < 1) throw ConfigError("TrainConfig: n_disc >= 1");
    if (checkpoint_every < 1) throw ConfigError("TrainConfig: checkpoint cadence >= 1");
    if (log_every < 1) throw ConfigError("TrainConfig: log cadence >= 1");
}

NoisyBatch draw_batch(const Eigen::MatrixXd& data, const NoiseSchedule& schedule,
                      int batch_size, Rng& rng) {
    const auto n = static_cast<std::uint64_t>(data.cols());
    const auto L = static_cast<std::uint64_t>(schedule.levels());
    NoisyBatch b;
    b.X.resize(data.rows(), batch_size);
    for (int j = 0; j < batch_size; ++j)
        b.X.col(j) = data.col(static_cast<Eigen::Index>(rng.uniform_index(n)));
    b.sigmas.resize(batch_size);
    for (int j = 0; j < batch_size; ++j)
        b.sigmas[j] = schedule.sigmas[rng.uniform_index(L)];
    b.Z = rng.normal_matrix(static_cast<int>(data.rows()), batch_size);
    return b;
}

TrainResult train_dsm(const Eigen::MatrixXd& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.cols() < 1) throw ConfigError("train_dsm: empty dataset");
    const auto start = std::chrono::steady_clock::now();
    const int d = static_cast<int>(data.rows());

    Mlp net(full_widths(d, cfg.hidden, d, cfg.conditional), cfg.seed);
    Eigen::VectorXd params = net.params();
    AdamState adam(net.param_count(), cfg.lr, cfg.score_beta1, cfg.score_beta2);
    EmaState ema(params, cfg.ema_decay);
    Rng rng(cfg.seed + 1);  // distinct from the init stream

    TrainResult result{net, ema, Mlp::zeros({1, 1}), 0, 0, {}};
    for (int it = 1; it <= cfg.iterations; ++it) {
        const NoisyBatch batch = draw_batch(data, cfg.schedule, cfg.batch_size, rng);
        const LossValueGrad loss = dsm_loss(net, cfg.conditional, batch);
        check_finite_loss(loss.value, static_cast<std::uint64_t>(it));
        adam_step(params, loss.grad, adam);
        net.set_params(params);
        ema_update(ema, params);
        ++result.steps;
        if (it % cfg.log_every == 0 || it == cfg.iterations)
            result.report.rows.push_back({it, loss.value, kNan, kNan});
        if (!cfg.checkpoint_dir.empty() &&
            (it % cfg.checkpoint_every == 0 || it == cfg.iterations))
            result.report.final_checkpoint =
                write_snapshot(cfg, net, ema, static_cast<std::uint64_t>(it));
    }
    result.net = net;
    result.ema = ema;
    result.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return result;
}

TrainResult train_hybrid(const Eigen::MatrixXd& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.cols() < 1) throw ConfigError("train_hybrid: empty dataset");
    const auto start = std::chrono::steady_clock::now();
    const int d = static_cast<int>(data.rows());

    Mlp net(full_widths(d, cfg.hidden, d, cfg.conditional), cfg.seed);
    Mlp disc(full_widths(d, cfg.disc_hidden, 1, false), cfg.seed + 2);
    Eigen::VectorXd params = net.params();
    Eigen::VectorXd disc_params = disc.params();
    AdamState adam(net.param_count(), cfg.lr, cfg.score_beta1, cfg.score_beta2);
    AdamState disc_adam(disc.param_count(), cfg.lr, cfg.disc_beta1,
                        cfg.disc_beta2);
    EmaState ema(params, cfg.ema_decay);
    Rng rng(cfg.seed + 1);

    TrainResult result{net, ema, disc, 0, 0, {}};
    for (int it = 1; it <= cfg.iterations; ++it) {
        double d_loss_last = kNan;
        for (int k = 0; k < cfg.n_disc; ++k) {
            // real batch: indices only; the discriminator sees clean data
            Eigen::MatrixXd real(d, cfg.batch_size);
            for (int j = 0; j < cfg.batch_size; ++j)
                real.col(j) = data.col(static_cast<Eigen::Index>(
                    rng.uniform_index(static_cast<std::uint64_t>(data.cols()))));
            const NoisyBatch fake_src =
                draw_batch(data, cfg.schedule, cfg.batch_size, rng);
            const Eigen::MatrixXd fake = eds_batch(net, cfg.conditional, fake_src);
            const LossValueGrad dl = lsgan_d_loss(disc, real, fake);
            check_finite_loss(dl.value, static_cast<std::uint64_t>(it));
            adam_step(disc_params, dl.grad, disc_adam);
            disc.set_params(disc_params);
            ++result.disc_steps;
            d_loss_last = dl.value;
        }

        const NoisyBatch batch = draw_batch(data, cfg.schedule, cfg.batch_size, rng);
        const HybridLoss gl = hybrid_g_loss(net, cfg.conditional, disc, batch,
                                            cfg.lambda, cfg.adv_weight);
        check_finite_loss(gl.total, static_cast<std::uint64_t>(it));
        adam_step(params, gl.grad, adam);
        net.set_params(params);
        ema_update(ema, params);
        ++result.steps;

        if (it % cfg.log_every == 0 || it == cfg.iterations)
            result.report.rows.push_back({it, gl.dsm, d_loss_last, gl.adv});
        if (!cfg.checkpoint_dir.empty() &&
            (it % cfg.checkpoint_every == 0 || it == cfg.iterations))
            result.report.final_checkpoint =
                write_snapshot(cfg, net, ema, static_cast<std::uint64_t>(it));
    }
    result.net = net;
    result.disc = disc;
    result.ema = ema;
    result.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return result;
}

}  // namespace scorelab
