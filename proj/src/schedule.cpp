#include "scorelab/schedule.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "scorelab/errors.hpp"

namespace scorelab {

NoiseSchedule geometric_schedule(double sigma1, double sigmaL, int L) {
    if (!(sigmaL > 0.0) || !std::isfinite(sigma1) || !std::isfinite(sigmaL))
        throw std::invalid_argument("geometric_schedule: need sigma1 >= sigmaL > 0");
    if (sigma1 < sigmaL)
        throw std::invalid_argument("geometric_schedule: need sigma1 >= sigmaL");
    if (L < 1) throw std::invalid_argument("geometric_schedule: need L >= 1");
    if (L == 1 && sigma1 != sigmaL)
        throw std::invalid_argument(
            "geometric_schedule: a single level requires sigma1 == sigmaL");
    if (L > 1 && sigma1 == sigmaL)
        throw std::invalid_argument(
            "geometric_schedule: equal endpoints require L == 1");

    NoiseSchedule s;
    s.sigmas.resize(static_cast<std::size_t>(L));
    s.gamma = (L == 1) ? 1.0
                       : std::pow(sigmaL / sigma1, 1.0 / static_cast<double>(L - 1));
    for (int i = 0; i < L; ++i)
        s.sigmas[static_cast<std::size_t>(i)] = sigma1 * std::pow(s.gamma, i);
    s.sigmas.front() = sigma1;  // exact endpoints regardless of pow rounding
    s.sigmas.back() = sigmaL;
    return s;
}

NoiseSchedule dilate(const NoiseSchedule& s, int n_sigma) {
    if (n_sigma < 1) throw std::invalid_argument("dilate: need n_sigma >= 1");
    if (s.sigmas.empty()) throw std::invalid_argument("dilate: empty schedule");
    if (n_sigma == 1 || s.levels() == 1) return s;

    const double r = std::pow(s.gamma, 1.0 / static_cast<double>(n_sigma));
    NoiseSchedule out;
    out.gamma = r;
    out.sigmas.reserve(static_cast<std::size_t>((s.levels() - 1) * n_sigma + 1));
    // fill each interval from its own left endpoint so original levels are
    // reproduced exactly, not reached through accumulated rounding
    for (int i = 0; i + 1 < s.levels(); ++i) {
        const double left = s.sigmas[static_cast<std::size_t>(i)];
        out.sigmas.push_back(left);
        for (int j = 1; j < n_sigma; ++j)
            out.sigmas.push_back(left * std::pow(r, j));
    }
    out.sigmas.push_back(s.sigmas.back());
    return out;
}

double max_pairwise_distance(const Eigen::MatrixXd& points) {
    const Eigen::Index n = points.cols();
    if (n < 2)
        throw std::invalid_argument("max_pairwise_distance: need at least 2 points");
    double best = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            best = std::max(best, (points.col(i) - points.col(j)).norm());
    return best;
}

double sigma1_from_data(const Eigen::MatrixXd& points) {
    return max_pairwise_distance(points);
}

SamplerConstants cas_constants(const NoiseSchedule& s, double epsilon) {
    if (!(epsilon > 0.0))
        throw ConfigError("cas_constants: epsilon must be positive");
    const double sigmaL = s.sigmaL();
    const double eta = epsilon / (sigmaL * sigmaL);
    if (eta > 1.0)
        throw ConfigError("cas_constants: step size too large (eta > 1)");
    const double contraction = (1.0 - eta) / s.gamma;
    if (contraction > 1.0)
        throw ConfigError(
            "cas_constants: step size too small for this schedule "
            "((1 - eta) exceeds gamma)");
    const double beta = std::sqrt(1.0 - contraction * contraction);
    return SamplerConstants{epsilon, eta, beta};
}

std::string schedule_to_json(const NoiseSchedule& s) {
    nlohmann::json j;
    j["sigma1"] = s.sigma1();
    j["sigmaL"] = s.sigmaL();
    j["L"] = s.levels();
    j["gamma"] = s.gamma;
    j["sigmas"] = s.sigmas;
    return j.dump(2) + "\n";
}

NoiseSchedule schedule_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("schedule_from_json: ") + e.what());
    }
    if (!j.contains("sigmas") || !j["sigmas"].is_array() || j["sigmas"].empty())
        throw ConfigError("schedule_from_json: missing \"sigmas\" array");
    NoiseSchedule s;
    s.sigmas = j["sigmas"].get<std::vector<double>>();
    for (std::size_t i = 0; i + 1 < s.sigmas.size(); ++i)
        if (!(s.sigmas[i] >= s.sigmas[i + 1]))
            throw ConfigError("schedule_from_json: sigmas must be non-increasing");
    if (!(s.sigmas.back() > 0.0))
        throw ConfigError("schedule_from_json: sigmas must be positive");
    if (j.contains("L") && j["L"].get<int>() != s.levels())
        throw ConfigError("schedule_from_json: L does not match sigmas length");
    if (j.contains("sigma1") && j["sigma1"].get<double>() != s.sigma1())
        throw ConfigError("schedule_from_json: sigma1 does not match sigmas[0]");
    if (j.contains("sigmaL") && j["sigmaL"].get<double>() != s.sigmaL())
        throw ConfigError("schedule_from_json: sigmaL does not match sigmas back");
    for (std::size_t i = 0; i + 1 < s.sigmas.size(); ++i)
        if (s.sigmas[i] == s.sigmas[i + 1])
            throw ConfigError("schedule_from_json: sigmas must be strictly decreasing");
    s.gamma = (s.levels() == 1)
                  ? 1.0
                  : std::pow(s.sigmaL() / s.sigma1(),
                             1.0 / static_cast<double>(s.levels() - 1));
    return s;
}

}  // namespace scorelab
