"""Poisson source localization on the plane from change-point event streams.

Thin wrapper over the C++ core: simulation of change-point Poisson records,
likelihood-ratio evaluation, Bayesian / maximum-likelihood / trilateration
estimators, and the limit-process sampler behind the efficiency bound.
"""

from ._core import (
    DirectionFrame,
    EstimateDiagnostics,
    EstimateResult,
    EventRecord,
    LimitModel,
    ParameterRectangle,
    PlanePoint,
    PoissonlocError,
    SensorArray,
    SidedValue,
    SignalModel,
    ZetaSample,
    bayes_estimate,
    cli,
    counting_value,
    default_config_json,
    delay,
    direction_frame,
    efficiency_bound,
    estimate_arrival,
    expected_half_lr,
    hellinger,
    limit_model_for,
    log_lr,
    log_lr_constant,
    mle_estimate,
    sample_events,
    sample_ln_z,
    sample_zeta,
    trilaterate,
    validate_identifiability,
)

__all__ = [
    "DirectionFrame",
    "EstimateDiagnostics",
    "EstimateResult",
    "EventRecord",
    "LimitModel",
    "ParameterRectangle",
    "PlanePoint",
    "PoissonlocError",
    "SensorArray",
    "SidedValue",
    "SignalModel",
    "ZetaSample",
    "bayes_estimate",
    "cli",
    "counting_value",
    "default_config_json",
    "delay",
    "direction_frame",
    "efficiency_bound",
    "estimate_arrival",
    "expected_half_lr",
    "hellinger",
    "limit_model_for",
    "log_lr",
    "log_lr_constant",
    "mle_estimate",
    "sample_events",
    "sample_ln_z",
    "sample_zeta",
    "trilaterate",
    "validate_identifiability",
]

__version__ = "0.1.0"
