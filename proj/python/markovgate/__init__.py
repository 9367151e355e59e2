"""Chapman-Kolmogorov tests of the Markov property for discretely sampled diffusions."""

from ._core import (
    CalibrationFailure,
    ConfigError,
    DegenerateDesign,
    DegenerateWindow,
    InsufficientSupport,
    MarkovGateError,
    NonstationaryFit,
    NumericalFailure,
    config_hash,
    fit_ou,
    run_experiment,
    select_bandwidths,
    simulate,
    test_statistic,
    transition_estimates,
)

__all__ = [
    "CalibrationFailure",
    "ConfigError",
    "DegenerateDesign",
    "DegenerateWindow",
    "InsufficientSupport",
    "MarkovGateError",
    "NonstationaryFit",
    "NumericalFailure",
    "config_hash",
    "fit_ou",
    "run_experiment",
    "select_bandwidths",
    "simulate",
    "test_statistic",
    "transition_estimates",
]
