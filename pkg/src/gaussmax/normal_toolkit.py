"""Standard normal primitives and the normalizing constants attached to a dimension p.

Tail probabilities are always computed through ``erfc`` on the relevant side,
never as ``1 - cdf``; this keeps ``p * sf(u_p) == 1`` accurate to ~1e-15 for
every p up to 2**63 - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import special

from .errors import DomainError

__all__ = [
    "NormalizingConstants",
    "MillsBounds",
    "std_normal_pdf",
    "std_normal_cdf",
    "std_normal_sf",
    "std_normal_quantile",
    "std_normal_isf",
    "mills_ratio",
    "mills_ratio_bounds",
    "quantile_level",
    "u_star",
    "constants_for",
    "up_gap",
    "delta_opt",
]

P_MAX = 2**63 - 1

_SQRT2 = math.sqrt(2.0)
_SQRT_HALF_PI = math.sqrt(math.pi / 2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation, relative error < 1.2e-9 before refinement.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549671010243137e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425
_NEWTON_STEPS = 2


def _scalar_or_array(x, out):
    if np.ndim(x) == 0:
        return float(out)
    return out


def _check_finite(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("standard normal functions require finite input")
    return arr


def std_normal_pdf(x):
    arr = np.asarray(x, dtype=float)
    return _scalar_or_array(x, np.exp(-0.5 * arr * arr) / math.sqrt(2.0 * math.pi))


def std_normal_cdf(x):
    """Phi(x), computed as ``erfc(-x/sqrt 2)/2`` so the lower tail keeps full relative accuracy."""
    arr = _check_finite(x)
    return _scalar_or_array(x, 0.5 * special.erfc(-arr / _SQRT2))


def std_normal_sf(x):
    """Upper tail 1 - Phi(x), evaluated directly (no subtraction)."""
    arr = _check_finite(x)
    return _scalar_or_array(x, 0.5 * special.erfc(arr / _SQRT2))


def mills_ratio(x):
    """sf(x) / pdf(x), via the scaled complementary error function.

    Finite for every real x, including where sf and pdf both underflow.
    """
    arr = _check_finite(x)
    return _scalar_or_array(x, _SQRT_HALF_PI * special.erfcx(arr / _SQRT2))


def _log_sf(x):
    return special.log_ndtr(-x)


def _acklam_lower(t):
    """Initial guess for Phi^{-1}(t), t in (0, 0.5]."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    low = t < _P_LOW
    if np.any(low):
        q = np.sqrt(-2.0 * np.log(t[low]))
        c, d = _C, _D
        num = ((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]
        den = (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        out[low] = num / den
    mid = ~low
    if np.any(mid):
        q = t[mid] - 0.5
        r = q * q
        a, b = _A, _B
        num = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
        den = ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0
        out[mid] = num / den
    return out


def _isf_upper(t):
    """Solve sf(x) = t for t in (0, 0.5], returning x >= 0.

    In the tail the Newton iterations run on log sf, whose slope is
    -1/mills_ratio; this stays well conditioned however deep the tail.
    """
    x = -_acklam_lower(t)
    tail = t < _P_LOW
    if np.any(tail):
        xt, log_t = x[tail], np.log(t[tail])
        for _ in range(_NEWTON_STEPS):
            xt = xt + (_log_sf(xt) - log_t) * _SQRT_HALF_PI * special.erfcx(xt / _SQRT2)
        x[tail] = xt
    body = ~tail
    if np.any(body):
        # Central region: t is not small, so plain Newton on sf loses nothing.
        xb, tb = x[body], t[body]
        for _ in range(_NEWTON_STEPS):
            xb = xb + (0.5 * special.erfc(xb / _SQRT2) - tb) * _SQRT_2PI * np.exp(0.5 * xb * xb)
        x[body] = xb
    return x


def _isf_upper_scalar(t: float) -> float:
    """Scalar twin of ``_isf_upper``; skips array overhead in per-draw loops."""
    if t < _P_LOW:
        q = math.sqrt(-2.0 * math.log(t))
        c, d = _C, _D
        num = ((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]
        den = (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        x, log_t = -num / den, math.log(t)
        for _ in range(_NEWTON_STEPS):
            x = x + float(_log_sf(x) - log_t) * _SQRT_HALF_PI * float(special.erfcx(x / _SQRT2))
        return x
    q = t - 0.5
    r = q * q
    a, b = _A, _B
    num = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
    den = ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0
    x = -num / den
    for _ in range(_NEWTON_STEPS):
        x = x + (0.5 * math.erfc(x / _SQRT2) - t) * _SQRT_2PI * math.exp(0.5 * x * x)
    return x


def _scalar_prob(t):
    if isinstance(t, (float, int, np.floating)) and not isinstance(t, bool):
        t = float(t)
        if not 0.0 < t < 1.0:
            raise DomainError("probability must lie in (0, 1)")
        return t
    return None


def std_normal_isf(t):
    """Inverse survival function: the x with sf(x) = t.

    Use this rather than ``std_normal_quantile(1 - t)`` for small t; forming
    ``1 - t`` in double precision already loses the tail.
    """
    ts = _scalar_prob(t)
    if ts is not None:
        return _isf_upper_scalar(ts) if ts <= 0.5 else -_isf_upper_scalar(1.0 - ts)
    arr = np.asarray(t, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError("tail probability must lie in (0, 1)")
    flat = np.atleast_1d(arr).astype(float)
    out = np.empty_like(flat)
    upper = flat <= 0.5
    if np.any(upper):
        out[upper] = _isf_upper(flat[upper])
    if np.any(~upper):
        # 1 - t is exact here (Sterbenz).
        out[~upper] = -_isf_upper(1.0 - flat[~upper])
    return _scalar_or_array(t, out.reshape(arr.shape))


def std_normal_quantile(q):
    """Phi^{-1}(q) for q in (0, 1); |Phi(result) - q| <= 1e-12."""
    qs = _scalar_prob(q)
    if qs is not None:
        return -_isf_upper_scalar(qs) if qs <= 0.5 else _isf_upper_scalar(1.0 - qs)
    arr = np.asarray(q, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError("probability must lie in (0, 1)")
    flat = np.atleast_1d(arr).astype(float)
    out = np.empty_like(flat)
    lower = flat <= 0.5
    if np.any(lower):
        out[lower] = -_isf_upper(flat[lower])
    if np.any(~lower):
        out[~lower] = _isf_upper(1.0 - flat[~lower])
    return _scalar_or_array(q, out.reshape(arr.shape))


def quantile_level(x: float) -> float:
    """u_x = Phi^{-1}(1 - 1/x) for real x >= 2 (u_2 = 0).

    Non-integer x arises in the packing lower bound, where the level is q/N + 1.
    """
    if not x >= 2.0:
        raise DomainError(f"u_x needs x >= 2, got {x!r}")
    if x == 2.0:
        return 0.0
    return float(std_normal_isf(1.0 / x))


def _check_dimension(p, minimum=2):
    if isinstance(p, bool) or not isinstance(p, (int, np.integer)):
        raise DomainError(f"dimension must be an integer, got {p!r}")
    if p < minimum or p > P_MAX:
        raise DomainError(f"dimension must lie in [{minimum}, 2**63 - 1], got {p}")
    return int(p)


def u_star(p: int) -> float:
    """Classical Gumbel centering sqrt(2 log p) * (1 - (log log p + log 4 pi) / (4 log p))."""
    p = _check_dimension(p, 3)
    log_p = math.log(p)
    return math.sqrt(2.0 * log_p) * (
        1.0 - (math.log(log_p) + math.log(4.0 * math.pi)) / (4.0 * log_p)
    )


@dataclass(frozen=True)
class NormalizingConstants:
    p: int
    u_p: float
    u_star: Optional[float]  # None for p = 2
    sqrt_2_log_p: float
    delta_opt: float

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "u_p": self.u_p,
            "u_star": self.u_star,
            "sqrt_2_log_p": self.sqrt_2_log_p,
            "delta_opt": self.delta_opt,
        }


def constants_for(p: int) -> NormalizingConstants:
    """Normalizing constants for the maximum of p standard normals.

    ``delta_opt`` is 1/u_p**2, the optimal rate for the choice a_p = b_p = u_p.
    For p = 2, u_p = 0 so ``delta_opt`` is infinite and ``u_star`` is None.
    """
    p = _check_dimension(p, 2)
    u_p = quantile_level(float(p)) if p > 2 else 0.0
    return NormalizingConstants(
        p=p,
        u_p=u_p,
        u_star=u_star(p) if p >= 3 else None,
        sqrt_2_log_p=math.sqrt(2.0 * math.log(p)),
        delta_opt=1.0 / (u_p * u_p) if u_p > 0 else math.inf,
    )


def up_gap(p: int) -> float:
    """sqrt(2 log p) * (u_p - u_star(p)); tends to 0 as p grows."""
    p = _check_dimension(p, 3)
    return math.sqrt(2.0 * math.log(p)) * (quantile_level(float(p)) - u_star(p))


class MillsBounds(NamedTuple):
    lower: float
    ratio: float
    upper: float


def mills_ratio_bounds(u: float) -> MillsBounds:
    """The sandwich 1 - 1/max(1, u^2) <= sf(u) / (pdf(u)/u) <= 1 for u > 0."""
    if not (math.isfinite(u) and u > 0):
        raise DomainError(f"Mills ratio sandwich needs u > 0, got {u!r}")
    ratio = u * mills_ratio(u)
    lower = 1.0 - 1.0 / max(1.0, u * u)
    return MillsBounds(lower=lower, ratio=ratio, upper=1.0)


def delta_opt(a_p: float, b_p: float) -> float:
    """Optimal concentration rate 1/a_p^2 + |b_p/a_p - 1| for the normalization (a_p, b_p)."""
    if not a_p > 0:
        raise DomainError(f"a_p must be positive, got {a_p!r}")
    return 1.0 / (a_p * a_p) + abs(b_p / a_p - 1.0)
