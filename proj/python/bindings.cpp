#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scorelab/checkpoint.hpp"
#include "scorelab/checks.hpp"
#include "scorelab/cli.hpp"
#include "scorelab/datasets.hpp"
#include "scorelab/errors.hpp"
#include "scorelab/gaussian_mixture.hpp"
#include "scorelab/metrics.hpp"
#include "scorelab/noise_trace.hpp"
#include "scorelab/rng.hpp"
#include "scorelab/sampler.hpp"
#include "scorelab/schedule.hpp"
#include "scorelab/score_model.hpp"
#include "scorelab/trainer.hpp"

namespace py = pybind11;

namespace scorelab {
namespace {

// The core stores points column-wise (d x n); python callers pass and receive
// the usual rows-as-points layout (n, d). All conversions happen here.
Eigen::MatrixXd to_cols(const Eigen::MatrixXd& rows) { return rows.transpose(); }
Eigen::MatrixXd to_rows(const Eigen::MatrixXd& cols) { return cols.transpose(); }

// Uniform handle for anything that can evaluate a score: analytic oracles,
// loaded checkpoints, freshly trained networks.
struct Model {
    std::shared_ptr<const ScoreModel> impl;

    int dim() const { return impl->dim(); }
    Eigen::MatrixXd score(const Eigen::MatrixXd& X, double sigma) const {
        return to_rows(impl->score(to_cols(X), sigma));
    }
    Eigen::MatrixXd denoised(const Eigen::MatrixXd& X, double sigma) const {
        return to_rows(eds(*impl, to_cols(X), sigma));
    }
};

Model model_from_checkpoint(const std::string& path, bool use_ema) {
    const Checkpoint ckpt = load_checkpoint(path);
    if (use_ema && !ckpt.ema.has_value())
        throw ConfigError("checkpoint has no EMA parameters; pass use_ema=False");
    return Model{std::make_shared<MlpScoreModel>(ckpt.make_net(use_ema),
                                                 ckpt.conditional)};
}

SamplerVariant parse_variant(const std::string& v) {
    if (v == "als") return SamplerVariant::als;
    if (v == "cas") return SamplerVariant::cas;
    throw ConfigError("variant must be \"als\" or \"cas\", got \"" + v + "\"");
}

InitMode parse_init(const std::string& v) {
    if (v == "pure-noise") return InitMode::pure_noise;
    if (v == "data-plus-noise") return InitMode::data_plus_noise;
    throw ConfigError(
        "init must be \"pure-noise\" or \"data-plus-noise\", got \"" + v + "\"");
}

Eigen::MatrixXd trace_matrix(const VarianceTrace& t) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(t.rows.size()), 5);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        m.row(static_cast<Eigen::Index>(i)) << static_cast<double>(r.step),
            static_cast<double>(r.level), r.sigma_t, r.v, r.diff;
    }
    return m;
}

Eigen::MatrixXd combined_matrix(const std::vector<CombinedTraceRow>& rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), 6);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        m.row(static_cast<Eigen::Index>(i)) << static_cast<double>(r.step),
            static_cast<double>(r.level), r.sigma_t, r.v_als, r.v_cas, r.diff;
    }
    return m;
}

Eigen::MatrixXd losses_matrix(const std::vector<LossRow>& rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), 4);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        m.row(static_cast<Eigen::Index>(i)) << static_cast<double>(r.iteration),
            r.dsm_loss, r.d_loss, r.g_adv_loss;
    }
    return m;
}

py::dict report_dict(const ModeReport& r) {
    py::dict d;
    d["covered"] = r.covered;
    d["total_modes"] = r.total_modes;
    d["kl_nats"] = r.kl_nats;
    d["counts"] = r.counts;
    d["unassigned"] = r.unassigned;
    d["samples"] = r.samples;
    d["threshold"] = r.threshold;
    return d;
}

py::dict train_dict(TrainResult result, bool conditional) {
    Mlp ema_net = result.net;
    ema_net.set_params(result.ema.shadow);
    py::dict d;
    d["model"] = Model{
        std::make_shared<MlpScoreModel>(std::move(result.net), conditional)};
    d["ema_model"] = Model{
        std::make_shared<MlpScoreModel>(std::move(ema_net), conditional)};
    d["losses"] = losses_matrix(result.report.rows);
    d["steps"] = result.steps;
    d["disc_steps"] = result.disc_steps;
    d["wall_seconds"] = result.report.wall_seconds;
    d["final_checkpoint"] = result.report.final_checkpoint;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "score-based sampling lab (C++ core)";
    m.attr("__version__") = kToolVersion;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError",
                                            PyExc_RuntimeError);

    py::class_<NoiseSchedule>(m, "Schedule")
        .def_readonly("sigmas", &NoiseSchedule::sigmas)
        .def_readonly("gamma", &NoiseSchedule::gamma)
        .def("levels", &NoiseSchedule::levels)
        .def("sigma1", &NoiseSchedule::sigma1)
        .def("sigmaL", &NoiseSchedule::sigmaL)
        .def("__len__", &NoiseSchedule::levels)
        .def("__repr__", [](const NoiseSchedule& s) {
            return "Schedule(L=" + std::to_string(s.levels()) +
                   ", sigma1=" + std::to_string(s.sigma1()) +
                   ", sigmaL=" + std::to_string(s.sigmaL()) + ")";
        });

    m.def("geometric_schedule", &geometric_schedule, py::arg("sigma1"),
          py::arg("sigmaL"), py::arg("L"),
          "L noise levels from sigma1 down to sigmaL with a constant ratio");
    m.def("dilate", &dilate, py::arg("schedule"), py::arg("n_sigma"),
          "insert n_sigma - 1 geometric levels between consecutive pairs");
    m.def("effective_sigma", &effective_sigma, py::arg("schedule"),
          "harmonic mean of the levels; the single scale the shared "
          "parametrization collapses to on a point mass");
    m.def("schedule_to_json", &schedule_to_json, py::arg("schedule"));
    m.def("schedule_from_json", &schedule_from_json, py::arg("text"));
    m.def(
        "cas_constants",
        [](const NoiseSchedule& s, double epsilon) {
            const SamplerConstants c = cas_constants(s, epsilon);
            return py::make_tuple(c.epsilon, c.eta, c.beta);
        },
        py::arg("schedule"), py::arg("epsilon"),
        "(epsilon, eta, beta) for the consistent sampler on this schedule");
    m.def(
        "sigma1_from_data",
        [](const Eigen::MatrixXd& points) {
            return sigma1_from_data(to_cols(points));
        },
        py::arg("points"), "max pairwise distance of a (n, d) point set");

    py::class_<GaussianMixture>(m, "GaussianMixture")
        .def(py::init([](const Eigen::MatrixXd& means,
                         const Eigen::VectorXd& weights, double tau2) {
                 return GaussianMixture(to_cols(means), weights, tau2);
             }),
             py::arg("means"), py::arg("weights"), py::arg("tau2"),
             "isotropic mixture; means is (K, d), weights (K,), shared "
             "component variance tau2")
        .def_property_readonly("dim", &GaussianMixture::dim)
        .def_property_readonly("components", &GaussianMixture::components)
        .def_property_readonly("tau2", &GaussianMixture::tau2)
        .def_property_readonly(
            "means",
            [](const GaussianMixture& g) { return to_rows(g.means()); })
        .def_property_readonly(
            "weights", [](const GaussianMixture& g) { return g.weights(); })
        .def(
            "log_density",
            [](const GaussianMixture& g, const Eigen::MatrixXd& X,
               double sigma) { return g.smoothed_log_density(to_cols(X), sigma); },
            py::arg("X"), py::arg("sigma") = 0.0,
            "log density of the sigma-smoothed mixture at each row of X")
        .def(
            "responsibilities",
            [](const GaussianMixture& g, const Eigen::MatrixXd& X,
               double sigma) {
                return to_rows(g.responsibilities(to_cols(X), sigma));
            },
            py::arg("X"), py::arg("sigma") = 0.0)
        .def(
            "score",
            [](const GaussianMixture& g, const Eigen::MatrixXd& X,
               double sigma) {
                return to_rows(g.optimal_conditional_score(to_cols(X), sigma));
            },
            py::arg("X"), py::arg("sigma"),
            "gradient of the smoothed log density at each row of X")
        .def(
            "posterior_mean",
            [](const GaussianMixture& g, const Eigen::MatrixXd& X,
               double sigma) {
                return to_rows(g.posterior_mean(to_cols(X), sigma));
            },
            py::arg("X"), py::arg("sigma"))
        .def(
            "sample",
            [](const GaussianMixture& g, int n, std::uint64_t seed) {
                Rng rng(seed);
                return to_rows(g.sample(n, rng));
            },
            py::arg("n"), py::arg("seed") = 0);

    m.def("grid25_mixture", &grid25_mixture, py::arg("spacing") = 2.0,
          py::arg("tau") = 0.05);
    m.def(
        "grid25_centers",
        [](double spacing) { return to_rows(grid25_centers(spacing)); },
        py::arg("spacing") = 2.0);
    m.def(
        "gen_grid25",
        [](int n, double spacing, double tau, std::uint64_t seed) {
            return to_rows(gen_grid25(n, spacing, tau, seed).points);
        },
        py::arg("n"), py::arg("spacing") = 2.0, py::arg("tau") = 0.05,
        py::arg("seed") = 0);
    m.def(
        "gen_swiss_roll",
        [](int n, double noise, std::uint64_t seed) {
            return to_rows(gen_swiss_roll(n, noise, seed).points);
        },
        py::arg("n"), py::arg("noise") = 0.0, py::arg("seed") = 0);

    py::class_<Model>(m, "Model")
        .def_property_readonly("dim", &Model::dim)
        .def("score", &Model::score, py::arg("X"), py::arg("sigma"))
        .def("denoised", &Model::denoised, py::arg("X"), py::arg("sigma"),
             "expected denoised points: sigma^2 * score(X, sigma) + X");

    m.def(
        "conditional_oracle",
        [](const GaussianMixture& gm) {
            return Model{std::make_shared<AnalyticConditionalScore>(gm)};
        },
        py::arg("mixture"), "exact score of the sigma-smoothed mixture");
    m.def(
        "unconditional_oracle",
        [](const GaussianMixture& gm, const NoiseSchedule& s) {
            return Model{std::make_shared<AnalyticUnconditionalScore>(gm, s)};
        },
        py::arg("mixture"), py::arg("schedule"),
        "best single shared network under score = F(x)/sigma");
    m.def("load_model", &model_from_checkpoint, py::arg("path"),
          py::arg("use_ema") = true);

    m.def(
        "run_sampler",
        [](const Model& model, const NoiseSchedule& s, const std::string& variant,
           double epsilon, int n_sigma, bool denoise, const std::string& init,
           int chains, std::uint64_t seed,
           const std::optional<Eigen::MatrixXd>& data) {
            SampleRunConfig cfg;
            cfg.variant = parse_variant(variant);
            cfg.epsilon = epsilon;
            cfg.n_sigma = n_sigma;
            cfg.denoise = denoise;
            cfg.init = parse_init(init);
            cfg.chains = chains;
            cfg.seed = seed;
            Eigen::MatrixXd cols;
            const Eigen::MatrixXd* ptr = nullptr;
            if (data) {
                cols = to_cols(*data);
                ptr = &cols;
            }
            return to_rows(run_sampler(*model.impl, s, cfg, ptr));
        },
        py::arg("model"), py::arg("schedule"), py::arg("variant") = "cas",
        py::arg("epsilon") = 5.6e-6, py::arg("n_sigma") = 1,
        py::arg("denoise") = false, py::arg("init") = "pure-noise",
        py::arg("chains") = 1000, py::arg("seed") = 0,
        py::arg("data") = py::none(),
        "run the annealed (als) or consistent (cas) sampler; returns (chains, d)");

    m.def(
        "als_trace",
        [](const NoiseSchedule& s, double eta, int n_sigma, double v0) {
            if (v0 <= 0.0) v0 = s.sigma1() / s.gamma;
            return trace_matrix(als_trace(s, eta, n_sigma, v0));
        },
        py::arg("schedule"), py::arg("eta"), py::arg("n_sigma") = 1,
        py::arg("v0") = 0.0,
        "columns: step, level, sigma_t, v, diff; v0 <= 0 means sigma1/gamma");
    m.def(
        "cas_trace",
        [](const NoiseSchedule& s, double eta) {
            return trace_matrix(cas_trace(s, eta));
        },
        py::arg("schedule"), py::arg("eta"),
        "columns: step, level, sigma_t, v, diff");
    m.def(
        "combined_trace",
        [](const NoiseSchedule& s, double eta, int n_sigma) {
            return combined_matrix(combined_trace(s, eta, n_sigma));
        },
        py::arg("schedule"), py::arg("eta"), py::arg("n_sigma") = 1,
        "columns: step, level, sigma_t, v_als, v_cas, diff");

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("schedule", &TrainConfig::schedule)
        .def_readwrite("iterations", &TrainConfig::iterations)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("hidden", &TrainConfig::hidden)
        .def_readwrite("disc_hidden", &TrainConfig::disc_hidden)
        .def_readwrite("conditional", &TrainConfig::conditional)
        .def_readwrite("lambda_", &TrainConfig::lambda)
        .def_readwrite("n_disc", &TrainConfig::n_disc)
        .def_readwrite("lr", &TrainConfig::lr)
        .def_readwrite("score_beta1", &TrainConfig::score_beta1)
        .def_readwrite("score_beta2", &TrainConfig::score_beta2)
        .def_readwrite("disc_beta1", &TrainConfig::disc_beta1)
        .def_readwrite("disc_beta2", &TrainConfig::disc_beta2)
        .def_readwrite("ema_decay", &TrainConfig::ema_decay)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("checkpoint_every", &TrainConfig::checkpoint_every)
        .def_readwrite("checkpoint_dir", &TrainConfig::checkpoint_dir)
        .def_readwrite("log_every", &TrainConfig::log_every)
        .def_readwrite("adv_weight", &TrainConfig::adv_weight);

    m.def(
        "train_dsm",
        [](const Eigen::MatrixXd& points, const TrainConfig& cfg) {
            return train_dict(train_dsm(to_cols(points), cfg), cfg.conditional);
        },
        py::arg("points"), py::arg("config"),
        "denoising score matching on a (n, d) point set");
    m.def(
        "train_hybrid",
        [](const Eigen::MatrixXd& points, const TrainConfig& cfg) {
            return train_dict(train_hybrid(to_cols(points), cfg),
                              cfg.conditional);
        },
        py::arg("points"), py::arg("config"),
        "least-squares adversarial objective plus weighted score matching");

    m.def(
        "mode_coverage",
        [](const Eigen::MatrixXd& samples, const Eigen::MatrixXd& centers,
           double threshold) {
            return report_dict(
                mode_coverage(to_cols(samples), to_cols(centers), threshold));
        },
        py::arg("samples"), py::arg("centers"), py::arg("threshold"));
    m.def(
        "mean_nearest_mode_distance",
        [](const Eigen::MatrixXd& samples, const Eigen::MatrixXd& centers) {
            return mean_nearest_mode_distance(to_cols(samples), to_cols(centers));
        },
        py::arg("samples"), py::arg("centers"));
    m.def(
        "energy_distance",
        [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
            return energy_distance(to_cols(a), to_cols(b));
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "run_checks",
        [](std::uint64_t seed) {
            py::list out;
            for (const auto& r : run_check_battery(seed)) {
                py::dict d;
                d["name"] = r.name;
                d["pass"] = r.pass;
                d["measured"] = r.measured;
                d["tolerance"] = r.tolerance;
                d["detail"] = r.detail;
                out.append(std::move(d));
            }
            return out;
        },
        py::arg("seed") = 7,
        "the numerical oracle battery; each entry has name/pass/measured/"
        "tolerance/detail");
}

}  // namespace scorelab
