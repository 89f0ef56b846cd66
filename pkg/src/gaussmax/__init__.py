"""Concentration of maxima in Gaussian arrays: constants, packing numbers,
rate bounds, exact samplers and Monte Carlo checks."""

__version__ = "0.1.0"

from .covariance import PRESETS, CovarianceModel, materialize
from .errors import ConfigError, DomainError, InadmissibleError, ModelInvalidError
from .normal_toolkit import (
    constants_for,
    delta_opt,
    mills_ratio_bounds,
    std_normal_cdf,
    std_normal_isf,
    std_normal_quantile,
    std_normal_sf,
    u_star,
    up_gap,
)
from .packing import alpha_p, greedy_packing, n_tau, n_tau_model, packing_report, r_q
from .rates import TransformKind, TransformSpec, capstone_auto, capstone_bound, g_beta, transform_rate

__all__ = [
    "__version__",
    "PRESETS",
    "CovarianceModel",
    "materialize",
    "ConfigError",
    "DomainError",
    "InadmissibleError",
    "ModelInvalidError",
    "constants_for",
    "delta_opt",
    "mills_ratio_bounds",
    "std_normal_cdf",
    "std_normal_isf",
    "std_normal_quantile",
    "std_normal_sf",
    "u_star",
    "up_gap",
    "alpha_p",
    "greedy_packing",
    "n_tau",
    "n_tau_model",
    "packing_report",
    "r_q",
    "TransformKind",
    "TransformSpec",
    "capstone_auto",
    "capstone_bound",
    "g_beta",
    "transform_rate",
]
