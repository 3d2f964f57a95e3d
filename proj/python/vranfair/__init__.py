"""Two-sided horizon-fair resource allocation simulator."""

from ._vranfair import (
    canonical_scenario,
    dual_gradient,
    f_alpha,
    f_alpha_prime,
    fairness_sum,
    fit_profiles,
    simulate,
)

__all__ = [
    "canonical_scenario",
    "dual_gradient",
    "f_alpha",
    "f_alpha_prime",
    "fairness_sum",
    "fit_profiles",
    "simulate",
]
