#include "scorelab/noise_trace.hpp"

#include <cmath>
#include <stdexcept>

#include "scorelab/errors.hpp"

namespace scorelab {

VarianceTrace als_trace(const NoiseSchedule& schedule, double eta, int n_sigma,
                        double v0) {
    if (!(eta > 0.0 && eta < 1.0))
        throw ConfigError("als_trace: eta must lie in (0, 1)");
    if (n_sigma < 1) throw ConfigError("als_trace: n_sigma >= 1");
    if (!(v0 > 0.0)) throw ConfigError("als_trace: v0 must be > 0");

    VarianceTrace trace;
    trace.rows.reserve(schedule.sigmas.size() * static_cast<std::size_t>(n_sigma));
    const double contraction2 = (1.0 - eta) * (1.0 - eta);
    double v2 = v0 * v0;
    int step = 0;
    for (std::size_t i = 0; i < schedule.sigmas.size(); ++i) {
        const double sigma = schedule.sigmas[i];
        for (int k = 0; k < n_sigma; ++k) {
            v2 = v2 * contraction2 + 2.0 * eta * sigma * sigma;
            const double v = std::sqrt(v2);
            ++step;
            trace.rows.push_back(
                {step, static_cast<int>(i), sigma, v, v - sigma});
        }
    }
    return trace;
}

VarianceTrace cas_trace(const NoiseSchedule& schedule, double eta) {
    if (!(eta > 0.0 && eta <= 1.0))
        throw ConfigError("cas_trace: eta must lie in (0, 1]");

    VarianceTrace trace;
    trace.rows.reserve(schedule.sigmas.size());
    const double contraction = 1.0 - eta;
    double v2 = 0.0;
    double sigma_prev = schedule.sigma1() / schedule.gamma;
    v2 = sigma_prev * sigma_prev;
    for (std::size_t t = 0; t < schedule.sigmas.size(); ++t) {
        const double sigma = schedule.sigmas[t];
        const double ratio = contraction * sigma_prev / sigma;
        if (ratio > 1.0)
            throw ConfigError(
                "cas_trace: step size too small for the level ratio");
        const double beta2 = 1.0 - ratio * ratio;
        v2 = v2 * contraction * contraction + beta2 * sigma * sigma;
        const double v = std::sqrt(v2);
        trace.rows.push_back(
            {static_cast<int>(t) + 1, static_cast<int>(t), sigma, v, v - sigma});
        sigma_prev = sigma;
    }
    return trace;
}

double als_monotonicity_condition(double sigma_t, double v0) {
    if (!(v0 > 0.0))
        throw std::invalid_argument("als_monotonicity_condition: v0 > 0");
    return 2.0 - 2.0 * (sigma_t * sigma_t) / (v0 * v0);
}

double als_within_level_closed_form(double v0, double sigma_t, double eta,
                                    int n) {
    if (n < 0)
        throw std::invalid_argument("als_within_level_closed_form: n >= 0");
    const double decay = std::pow((1.0 - eta) * (1.0 - eta), n);
    const double v2 = v0 * v0 * decay +
                      (2.0 * sigma_t * sigma_t / (2.0 - eta)) * (1.0 - decay);
    return std::sqrt(v2);
}

double als_limit(double sigma_t, double eta) {
    return sigma_t * std::sqrt(2.0 / (2.0 - eta));
}

std::vector<CombinedTraceRow> combined_trace(const NoiseSchedule& schedule,
                                             double eta, int n_sigma) {
    if (n_sigma < 1) throw ConfigError("combined_trace: n_sigma >= 1");
    const NoiseSchedule dilated =
        n_sigma > 1 ? dilate(schedule, n_sigma) : schedule;
    const double v0 = schedule.sigma1() / dilated.gamma;

    const VarianceTrace als = als_trace(schedule, eta, n_sigma, v0);
    const VarianceTrace cas = cas_trace(dilated, eta);

    const std::size_t rows_out = cas.rows.size();
    std::vector<CombinedTraceRow> out;
    out.reserve(rows_out);
    for (std::size_t t = 0; t < rows_out; ++t) {
        // The last row absorbs the final level's remaining inner updates so
        // both columns terminate at sigma_L.
        const std::size_t als_index =
            (t + 1 < rows_out) ? t : als.rows.size() - 1;
        const double v_als = als.rows[als_index].v;
        const double v_cas = cas.rows[t].v;
        out.push_back({static_cast<int>(t) + 1, static_cast<int>(t),
                       dilated.sigmas[t], v_als, v_cas, v_als - v_cas});
    }
    return out;
}

}  // namespace scorelab
