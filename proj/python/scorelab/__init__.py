"""Desk-scale lab for score-based generative sampling.

Thin package front for the C++ core: geometric noise schedules, analytic
Gaussian-mixture oracles, annealed / consistent samplers, noise-variance
traces, training, diversity metrics, and the numerical check battery.
Point sets are numpy arrays with one point per row.
"""

from scorelab._core import (
    ConfigError,
    DivergenceError,
    GaussianMixture,
    Model,
    Schedule,
    TrainConfig,
    __version__,
    als_trace,
    cas_constants,
    cas_trace,
    combined_trace,
    conditional_oracle,
    dilate,
    effective_sigma,
    energy_distance,
    gen_grid25,
    gen_swiss_roll,
    geometric_schedule,
    grid25_centers,
    grid25_mixture,
    load_model,
    mean_nearest_mode_distance,
    mode_coverage,
    run_checks,
    run_sampler,
    schedule_from_json,
    schedule_to_json,
    sigma1_from_data,
    train_dsm,
    train_hybrid,
    unconditional_oracle,
)

__all__ = [
    "ConfigError",
    "DivergenceError",
    "GaussianMixture",
    "Model",
    "Schedule",
    "TrainConfig",
    "__version__",
    "als_trace",
    "cas_constants",
    "cas_trace",
    "combined_trace",
    "conditional_oracle",
    "dilate",
    "effective_sigma",
    "energy_distance",
    "gen_grid25",
    "gen_swiss_roll",
    "geometric_schedule",
    "grid25_centers",
    "grid25_mixture",
    "load_model",
    "mean_nearest_mode_distance",
    "mode_coverage",
    "run_checks",
    "run_sampler",
    "schedule_from_json",
    "schedule_to_json",
    "sigma1_from_data",
    "train_dsm",
    "train_hybrid",
    "unconditional_oracle",
]
