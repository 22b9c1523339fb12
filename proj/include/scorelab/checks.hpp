#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace scorelab {

// One verdict from the oracle battery: the statistic that was measured, the
// bound it had to stay inside, and enough context to debug a failure.
struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

// Schedule construction: exact endpoints, monotone levels, constant ratio.
CheckResult check_schedule_construction(std::uint64_t seed);

// dilate(dilate(s, a), b) agrees with dilate(s, a*b); originals exact.
CheckResult check_dilation_associativity(std::uint64_t seed);

// The consistent sampler's variance recurrence reproduces the schedule to
// machine precision for random (schedule, eta) pairs.
CheckResult check_cas_trace_exactness(std::uint64_t seed);

// Sensitivity canary: a deliberately corrupted beta formula must blow the
// exactness tolerance, proving the check above can actually fail.
CheckResult check_cas_mutation_canary();

// Langevin variance recurrence matches its within-level closed form.
CheckResult check_als_closed_form(std::uint64_t seed);

// Langevin variance stays strictly above the prescribed level everywhere.
CheckResult check_als_variance_floor(std::uint64_t seed);

// Fixed-level Langevin variance converges to sigma * sqrt(2/(2-eta)).
CheckResult check_als_single_level_limit();

// Direct update rules match their denoiser-interpolation forms under shared
// noise, for both sampler variants.
CheckResult check_interpolation_equivalence(std::uint64_t seed);

// Analytic mixture score equals the finite-difference gradient of the
// smoothed log density.
CheckResult check_conditional_score_gradient(std::uint64_t seed);

// For point-mass data the shared (sigma-independent) parametrization
// collapses to (x0 - x) / (sbar * sigma_i), over/under-shooting the true
// per-level score exactly by the factor sigma_i / sbar.
CheckResult check_shared_parametrization_reconstruction(std::uint64_t seed);

// sigma^2 * score + x equals the mixture posterior mean.
CheckResult check_eds_posterior_identity(std::uint64_t seed);

// Analytic gradients of every training loss pass central finite-difference
// checks on all parameters of small networks.
CheckResult check_loss_gradients(std::uint64_t seed);

// Streams are reproducible; counter-based chains are order-independent.
CheckResult check_rng_reproducibility();

// Monte Carlo bridge: sampled residual noise matches the variance traces.
CheckResult check_cas_residual_monte_carlo(std::uint64_t seed);
CheckResult check_als_residual_monte_carlo(std::uint64_t seed);

// Side-by-side trace: Langevin column dominates the consistent column, which
// equals the schedule, and the terminal gap shrinks as n_sigma grows.
CheckResult check_trace_ordering();

// Everything above, in a fixed order.
std::vector<CheckResult> run_check_battery(std::uint64_t seed = 7);

bool all_passed(const std::vector<CheckResult>& results);
nlohmann::json check_results_to_json(const std::vector<CheckResult>& results);

}  // namespace scorelab
