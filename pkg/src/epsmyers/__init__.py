"""Numerics for diameter bounds of weighted manifolds under integral eps-range curvature conditions."""

from .epsrange import EpsParams, c_constant, d_tilde, d_tilde_lambda, lambda0, lambda_window, validate_eps_range
from .errors import DomainError, EpsMyersError, NumericError, PreconditionError, UnsupportedError
from .thresholds import GeometryBounds, ThresholdReport

__all__ = [
    "EpsParams",
    "GeometryBounds",
    "ThresholdReport",
    "c_constant",
    "d_tilde",
    "d_tilde_lambda",
    "lambda0",
    "lambda_window",
    "validate_eps_range",
    "DomainError",
    "EpsMyersError",
    "NumericError",
    "PreconditionError",
    "UnsupportedError",
]
