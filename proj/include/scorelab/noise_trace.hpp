#pragma once

#include <vector>

#include "scorelab/schedule.hpp"

namespace scorelab {

// Closed-form propagation of the residual-noise standard deviation through an
// annealed sampler, assuming the model returns the optimal score at every
// level. Traces track only the noise component; the clean-data component
// factors out under the optimal score, so no samples are involved.
struct TraceRow {
    int step = 0;        // global update index, 1-based
    int level = 0;       // schedule level the update belongs to, 0-based
    double sigma_t = 0;  // prescribed noise std at this row
    double v = 0;        // idealized residual noise std after the update
    double diff = 0;     // v - sigma_t
};

struct VarianceTrace {
    std::vector<TraceRow> rows;
};

// Langevin variance recurrence v^2 <- v^2 (1-eta)^2 + 2 eta sigma_i^2, applied
// n_sigma times per level with v carried across levels. Requires eta in (0,1)
// and v0 > 0. One row per update: L * n_sigma rows total.
VarianceTrace als_trace(const NoiseSchedule& schedule, double eta, int n_sigma,
                        double v0);

// Consistent-sampler recurrence v_t^2 = v_{t-1}^2 (1-eta)^2 + beta^2 sigma_t^2
// with v0 = sigma1/gamma and beta chosen per transition so that v_t = sigma_t
// exactly. One row per level. Throws ConfigError when eta is outside (0,1] or
// the step is too small for a level ratio ((1-eta) > sigma_t/sigma_{t-1}).
VarianceTrace cas_trace(const NoiseSchedule& schedule, double eta);

// Largest eta for which one Langevin update at fixed sigma_t decreases v from
// v0: returns 2 - 2 sigma_t^2 / v0^2 (non-positive means no eta decreases v).
double als_monotonicity_condition(double sigma_t, double v0);

// Within a fixed level, the Langevin recurrence has the closed form
//   v_n^2 = v0^2 (1-eta)^{2n} + (2 sigma_t^2 / (2-eta)) (1 - (1-eta)^{2n}).
double als_within_level_closed_form(double v0, double sigma_t, double eta,
                                    int n);

// n -> infinity limit of the above: sigma_t * sqrt(2/(2-eta)).
double als_limit(double sigma_t, double eta);

// Side-by-side trace on the dilated grid, one row per dilated level. The CAS
// column runs on dilate(schedule, n_sigma) and equals the dilated schedule
// exactly; the ALS column runs n_sigma Langevin updates per original level.
// Row t <= (L-1)*n_sigma reports the ALS std after its t-th update; the final
// row reports it after all L*n_sigma updates (the last level's inner loop
// collapses into the single terminal row). Both columns start from
// v0 = sigma1 / gamma_dilated.
struct CombinedTraceRow {
    int step = 0;        // row index, 1-based
    int level = 0;       // dilated-schedule level index, 0-based
    double sigma_t = 0;  // dilated schedule value at this row
    double v_als = 0;
    double v_cas = 0;
    double diff = 0;  // v_als - v_cas
};

std::vector<CombinedTraceRow> combined_trace(const NoiseSchedule& schedule,
                                             double eta, int n_sigma);

}  // namespace scorelab
