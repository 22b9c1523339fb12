#include "scorelab/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "scorelab/errors.hpp"

namespace scorelab {

namespace {

Eigen::MatrixXd chain_normals(std::uint64_t seed, std::uint64_t step, int dim,
                              Eigen::Index chains) {
    Eigen::MatrixXd Z(dim, chains);
    for (Eigen::Index c = 0; c < chains; ++c)
        Z.col(c) = ChainRng(seed, static_cast<std::uint64_t>(c))
                       .normal_vector(step, dim);
    return Z;
}

void guard_state(const Eigen::MatrixXd& X, double sigma1, int step) {
    const double limit = 1e6 * sigma1;
    if (!X.allFinite() || X.colwise().norm().maxCoeff() > limit)
        throw DivergenceError("sampler state diverged (bad epsilon?)",
                              static_cast<std::size_t>(step));
}

}  // namespace

Eigen::MatrixXd init_pure_noise(const NoiseSchedule& s, int dim, int chains,
                                std::uint64_t seed) {
    if (chains < 1) throw std::invalid_argument("init_pure_noise: chains >= 1");
    const double sigma0 = s.sigma1() / s.gamma;
    return sigma0 * chain_normals(seed, 0, dim, chains);
}

Eigen::MatrixXd init_data_plus_noise(const NoiseSchedule& s,
                                     const Eigen::MatrixXd& data,
                                     std::uint64_t seed) {
    if (data.cols() < 1)
        throw std::invalid_argument("init_data_plus_noise: empty data");
    const double sigma0 = s.sigma1() / s.gamma;
    return data + sigma0 * chain_normals(seed, 0, static_cast<int>(data.rows()),
                                         data.cols());
}

Eigen::MatrixXd als_step(const ScoreModel& model, const Eigen::MatrixXd& X,
                         double sigma, double eta, const Eigen::MatrixXd& Z) {
    const double alpha = eta * sigma * sigma;
    return X + alpha * model.score(X, sigma) + std::sqrt(2.0 * alpha) * Z;
}

Eigen::MatrixXd cas_step(const ScoreModel& model, const Eigen::MatrixXd& X,
                         double sigma_from, double sigma_to, double eta,
                         const Eigen::MatrixXd& Z) {
    const double gamma = sigma_to / sigma_from;
    const double contraction = (1.0 - eta) / gamma;
    if (contraction > 1.0)
        throw ConfigError("cas_step: step size too small for this level ratio");
    const double beta = std::sqrt(1.0 - contraction * contraction);
    const double alpha = eta * sigma_from * sigma_from;
    return X + alpha * model.score(X, sigma_from) + beta * sigma_to * Z;
}

Eigen::MatrixXd interpolation_step(const ScoreModel& model,
                                   const Eigen::MatrixXd& X, double sigma_from,
                                   double sigma_to, double eta,
                                   SamplerVariant variant,
                                   const Eigen::MatrixXd& Z) {
    const Eigen::MatrixXd H = eds(model, X, sigma_from);
    if (variant == SamplerVariant::als)
        return (1.0 - eta) * X + eta * H + std::sqrt(2.0 * eta) * sigma_from * Z;
    const double gamma = sigma_to / sigma_from;
    const double contraction = (1.0 - eta) / gamma;
    if (contraction > 1.0)
        throw ConfigError("interpolation_step: step size too small for ratio");
    const double beta = std::sqrt(1.0 - contraction * contraction);
    return (1.0 - eta) * X + eta * H + beta * sigma_to * Z;
}

Eigen::MatrixXd als_sample(const ScoreModel& model, const NoiseSchedule& s,
                           double epsilon, int n_sigma, Eigen::MatrixXd X,
                           std::uint64_t seed, const StepCallback& cb) {
    if (!(epsilon > 0.0)) throw ConfigError("als_sample: epsilon must be > 0");
    if (n_sigma < 1) throw ConfigError("als_sample: n_sigma >= 1");
    if (X.rows() != model.dim())
        throw std::invalid_argument("als_sample: state dimension mismatch");
    const double sigmaL2 = s.sigmaL() * s.sigmaL();
    const double eta = epsilon / sigmaL2;
    const int dim = static_cast<int>(X.rows());
    int step = 0;
    for (int i = 0; i < s.levels(); ++i) {
        const double sigma = s.sigmas[static_cast<std::size_t>(i)];
        for (int k = 0; k < n_sigma; ++k) {
            ++step;
            const Eigen::MatrixXd Z =
                chain_normals(seed, static_cast<std::uint64_t>(step), dim, X.cols());
            X = als_step(model, X, sigma, eta, Z);
            guard_state(X, s.sigma1(), step);
            if (cb) cb(step, i, sigma, X);
        }
    }
    return X;
}

Eigen::MatrixXd cas_sample(const ScoreModel& model, const NoiseSchedule& s,
                           double epsilon, Eigen::MatrixXd X,
                           std::uint64_t seed, const StepCallback& cb) {
    const SamplerConstants c = cas_constants(s, epsilon);
    if (X.rows() != model.dim())
        throw std::invalid_argument("cas_sample: state dimension mismatch");
    const int dim = static_cast<int>(X.rows());
    double sigma_from = s.sigma1() / s.gamma;
    for (int i = 0; i < s.levels(); ++i) {
        const double sigma_to = s.sigmas[static_cast<std::size_t>(i)];
        const Eigen::MatrixXd Z =
            chain_normals(seed, static_cast<std::uint64_t>(i + 1), dim, X.cols());
        const double alpha = c.eta * sigma_from * sigma_from;
        X = X + alpha * model.score(X, sigma_from) + c.beta * sigma_to * Z;
        guard_state(X, s.sigma1(), i + 1);
        if (cb) cb(i + 1, i, sigma_to, X);
        sigma_from = sigma_to;
    }
    return X;
}

void SampleRunConfig::validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("sampler: epsilon must be > 0");
    if (n_sigma < 1) throw ConfigError("sampler: n_sigma >= 1");
    if (chains < 1) throw ConfigError("sampler: chains >= 1");
}

Eigen::MatrixXd run_sampler(const ScoreModel& model, const NoiseSchedule& s,
                            const SampleRunConfig& cfg,
                            const Eigen::MatrixXd* data, const StepCallback& cb) {
    cfg.validate();
    const NoiseSchedule run_schedule =
        (cfg.variant == SamplerVariant::cas && cfg.n_sigma > 1)
            ? dilate(s, cfg.n_sigma)
            : s;

    Eigen::MatrixXd X;
    if (cfg.init == InitMode::data_plus_noise) {
        if (!data)
            throw ConfigError("sampler: data_plus_noise init requires a dataset");
        X = init_data_plus_noise(run_schedule, *data, cfg.seed);
    } else {
        X = init_pure_noise(run_schedule, model.dim(), cfg.chains, cfg.seed);
    }

    X = (cfg.variant == SamplerVariant::als)
            ? als_sample(model, run_schedule, cfg.epsilon, cfg.n_sigma, std::move(X),
                         cfg.seed, cb)
            : cas_sample(model, run_schedule, cfg.epsilon, std::move(X), cfg.seed, cb);
    if (cfg.denoise) X = denoise_final(model, X, run_schedule.sigmaL());
    return X;
}

}  // namespace scorelab
