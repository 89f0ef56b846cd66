"""Closed-form rate bounds.

* the capstone bound alpha(p) + tau(p) + 1/log p and its optimal tau(p) for
  power-law and logarithmic covariance decay,
* the rate d_p* for maxima of entrywise-transformed arrays,
* the support-recovery boundary g(beta).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .covariance import CovarianceModel, Kind
from .errors import DomainError, InadmissibleError
from .normal_toolkit import constants_for
from .packing import alpha_p, n_tau_model

__all__ = [
    "RateBound",
    "TransformKind",
    "TransformSpec",
    "capstone_bound",
    "optimize_tau_powerlaw",
    "optimize_tau_logdecay",
    "logdecay_optimal_tau",
    "powerlaw_n_tau_cap",
    "capstone_auto",
    "transform_rate",
    "transform_rate_closed_form",
    "transform_rate_from_u",
    "exp_power_nu_threshold",
    "lognormal_urs_check",
    "LognormalCheck",
    "g_beta",
]


@dataclass(frozen=True)
class RateBound:
    p: int
    tau_p: float
    alpha_p: float
    n_tau: int
    term_alpha: float
    term_tau: float
    term_log: float
    total: float
    model_tag: str = ""
    guard_ok: bool = True

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "tau_p": self.tau_p,
            "alpha_p": self.alpha_p,
            "n_tau": self.n_tau,
            "term_alpha": self.term_alpha,
            "term_tau": self.term_tau,
            "term_log": self.term_log,
            "total": self.total,
            "model": self.model_tag,
            "guard_ok": self.guard_ok,
        }


def capstone_bound(p: int, tau_p: float, n_tau: int, model_tag: str = "") -> RateBound:
    """alpha(p) + tau(p) + 1/log p with alpha(p) = log N(tau) / log p.

    ``tau_p = 0`` is accepted for arrays (iid) where N(tau) = 1 for every tau > 0.
    """
    if p < 3:
        raise DomainError(f"p must be >= 3, got {p}")
    if not (0.0 <= tau_p < 1.0):
        raise DomainError(f"tau_p must lie in [0, 1), got {tau_p!r}")
    if n_tau < 1:
        raise DomainError(f"n_tau must be >= 1, got {n_tau}")
    a = alpha_p(n_tau, p)
    term_log = 1.0 / math.log(p)
    return RateBound(
        p=p,
        tau_p=tau_p,
        alpha_p=a,
        n_tau=n_tau,
        term_alpha=a,
        term_tau=tau_p,
        term_log=term_log,
        total=a + tau_p + term_log,
        model_tag=model_tag,
    )


def powerlaw_n_tau_cap(tau: float, gamma: float, c: float = 1.0) -> float:
    """Analytic cap 2 (c/tau)^(1/gamma) + 1 on N(tau) under |Cov| <= c |i-j|^-gamma."""
    return 2.0 * (c / tau) ** (1.0 / gamma) + 1.0


def optimize_tau_powerlaw(p: int, gamma: float, c: float = 1.0) -> RateBound:
    """Capstone bound at tau(p) = 1/log p for power-law decay."""
    if p < 3:
        raise DomainError(f"p must be >= 3, got {p}")
    model = CovarianceModel.power_law(gamma, c)
    tau = 1.0 / math.log(p)
    return capstone_bound(p, tau, n_tau_model(model, tau, p), model.tag)


def logdecay_optimal_tau(log_p: float, nu: float) -> float:
    """Minimizer (nu log p)^(-nu/(nu+1)) of tau^(-1/nu)/log p + tau."""
    if not (nu > 0 and log_p > 0):
        raise DomainError("need nu > 0 and log p > 0")
    return (nu * log_p) ** (-nu / (nu + 1.0))


def optimize_tau_logdecay(p: int, nu: float, c: float = 1.0, c_tilde: float = 1.0) -> RateBound:
    """Capstone bound at the optimal tau(p) for logarithmic decay.

    The packing estimate N(tau) = O(exp(tau^(-1/nu))) is only usable once
    p >= c_tilde * exp((nu log p)^(1/(nu+1))); failure of that guard is
    reported in ``guard_ok`` (and warned about), not raised.
    """
    if p < 3:
        raise DomainError(f"p must be >= 3, got {p}")
    model = CovarianceModel.log_decay(nu, c)
    log_p = math.log(p)
    tau = logdecay_optimal_tau(log_p, nu)
    guard_ok = log_p >= math.log(c_tilde) + (nu * log_p) ** (1.0 / (nu + 1.0))
    if not guard_ok:
        warnings.warn(f"log-decay validity guard fails at p={p}, nu={nu}", RuntimeWarning, stacklevel=2)
    b = capstone_bound(p, tau, n_tau_model(model, tau, p), model.tag)
    return RateBound(**{**b.__dict__, "guard_ok": guard_ok})


def capstone_auto(model: CovarianceModel, p: int) -> RateBound:
    """Capstone bound with the per-model optimal tau(p)."""
    inner = model.inner if model.kind is Kind.PERMUTED else model
    if inner.kind is Kind.IID:
        return capstone_bound(p, 0.0, 1, "iid")
    if inner.kind is Kind.POWER_LAW:
        return optimize_tau_powerlaw(p, inner.gamma, inner.c)
    if inner.kind is Kind.LOG_DECAY:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return optimize_tau_logdecay(p, inner.nu, inner.c)
    raise DomainError("no automatic tau(p) for explicit covariance matrices")


class TransformKind(str, enum.Enum):
    IDENTITY = "identity"
    EXP = "exp"
    SQUARE = "square"
    ABS_POWER = "abspower"
    SIGNED_POWER = "signedpower"
    EXP_ABS_POWER = "expabspower"
    EXP_SIGNED_POWER = "expsignedpower"


_POWER_KINDS = {TransformKind.ABS_POWER, TransformKind.SIGNED_POWER}
_EXP_POWER_KINDS = {TransformKind.EXP_ABS_POWER, TransformKind.EXP_SIGNED_POWER}
_EVEN_KINDS = {TransformKind.SQUARE, TransformKind.ABS_POWER, TransformKind.EXP_ABS_POWER}


@dataclass(frozen=True)
class TransformSpec:
    """Entrywise function f applied to a Gaussian array."""

    kind: TransformKind = TransformKind.IDENTITY
    lam: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", TransformKind(self.kind))
        if self.kind in _POWER_KINDS | _EXP_POWER_KINDS:
            if self.lam is None or not (self.lam > 0 and math.isfinite(self.lam)):
                raise InadmissibleError(f"{self.kind.value} needs lambda > 0")
            if self.kind in _EXP_POWER_KINDS and self.lam >= 2:
                raise InadmissibleError(
                    f"exp-power transforms need lambda < 2 (got {self.lam}); heavier ones give power-law tails"
                )
        elif self.lam is not None:
            raise InadmissibleError(f"{self.kind.value} takes no lambda")

    @property
    def is_even(self) -> bool:
        return self.kind in _EVEN_KINDS

    @property
    def name(self) -> str:
        return self.kind.value if self.lam is None else f"{self.kind.value}{self.lam:g}"

    @property
    def exponent(self) -> float:
        """Power of u_p in the admissibility guard u_p^lambda * delta_p < 1 (0: no guard)."""
        if self.kind is TransformKind.EXP:
            return 1.0
        if self.kind in _EXP_POWER_KINDS:
            return self.lam
        return 0.0

    def f(self, x):
        # Always evaluate through the array ufunc loops: numpy scalars take a
        # different pow/exp path, which would break max(f(x)) == f(max(x)).
        x = np.asarray(x, dtype=float)
        shape = x.shape
        x = np.atleast_1d(x)
        k, lam = self.kind, self.lam
        with np.errstate(over="ignore"):
            if k is TransformKind.IDENTITY:
                y = x.copy()
            elif k is TransformKind.EXP:
                y = np.exp(x)
            elif k is TransformKind.SQUARE:
                y = np.multiply(x, x)
            else:
                a = np.power(np.abs(x), lam)
                if k is TransformKind.ABS_POWER:
                    y = a
                elif k is TransformKind.SIGNED_POWER:
                    y = np.copysign(a, x)
                elif k is TransformKind.EXP_ABS_POWER:
                    y = np.exp(a)
                else:
                    y = np.exp(np.copysign(a, x))
        return y.reshape(shape)

    def fprime(self, x):
        """Derivative for x > 0 (all transforms are evaluated there)."""
        x = np.asarray(x, dtype=float)
        k, lam = self.kind, self.lam
        if k is TransformKind.IDENTITY:
            return np.ones_like(x)
        if k is TransformKind.EXP:
            return np.exp(x)
        if k is TransformKind.SQUARE:
            return 2.0 * x
        if k in _POWER_KINDS:
            return lam * x ** (lam - 1.0)
        return lam * x ** (lam - 1.0) * np.exp(x**lam)


def _check_transform_args(spec, p, delta_p):
    if not (0.0 < delta_p < 1.0):
        raise DomainError(f"delta_p must lie in (0, 1), got {delta_p!r}")
    min_p = 8 if spec.kind in _POWER_KINDS | _EXP_POWER_KINDS else 3
    if p < min_p:
        raise DomainError(f"{spec.kind.value} needs p >= {min_p}, got {p}")
    u = constants_for(p).u_p
    if spec.exponent and u**spec.exponent * delta_p >= 1.0:
        raise InadmissibleError(
            f"guard u_p^lambda * delta_p < 1 fails: {u**spec.exponent * delta_p:.4g} at p={p}"
        )
    return u


def transform_rate(spec: TransformSpec, p: int, delta_p: float) -> float:
    """d_p* = u_p delta_p max(|f'(u_p(1-delta_p))|, |f'(u_p(1+delta_p))|) / |f(u_p)|.

    Implemented literally from f and f'; see ``transform_rate_closed_form``
    for the per-transform simplifications.
    """
    u = _check_transform_args(spec, p, delta_p)
    return transform_rate_from_u(spec, u, delta_p)


def transform_rate_from_u(spec: TransformSpec, u_p: float, delta_p: float) -> float:
    """The literal d_p* rule at a given normalizer u_p (no dimension guards).

    Lets the large-p limit be probed at levels u_p beyond any representable p.
    """
    if spec.exponent:
        # f'(x) / f(u) = lam x^(lam-1) exp(x^lam - u^lam); the exponentials alone overflow.
        lam = spec.exponent
        ul = u_p**lam

        def ratio(x):
            return lam * x ** (lam - 1.0) * math.exp(ul * ((x / u_p) ** lam - 1.0))

        lo = ratio(u_p * (1.0 - delta_p))
        hi = ratio(u_p * (1.0 + delta_p))
        return u_p * delta_p * max(lo, hi)
    lo = abs(float(spec.fprime(u_p * (1.0 - delta_p))))
    hi = abs(float(spec.fprime(u_p * (1.0 + delta_p))))
    return u_p * delta_p * max(lo, hi) / abs(float(spec.f(u_p)))


def transform_rate_closed_form(spec: TransformSpec, p: int, delta_p: float) -> float:
    """Simplified d_p* for each transform, evaluated branch by branch."""
    u = _check_transform_args(spec, p, delta_p)
    d, k, lam = delta_p, spec.kind, spec.lam
    if k is TransformKind.IDENTITY:
        return d
    if k is TransformKind.EXP:
        return u * d * math.exp(u * d)
    if k is TransformKind.SQUARE:
        return 2.0 * d * (1.0 + d)
    if k in _POWER_KINDS:
        return lam * d * max((1.0 + d) ** (lam - 1.0), (1.0 - d) ** (lam - 1.0))
    ul = u**lam

    def branch(s):
        return lam * ul * d * (1.0 + s * d) ** (lam - 1.0) * math.exp(ul * ((1.0 + s * d) ** lam - 1.0))

    # The upper branch wins once f' is increasing around u_p, which for lambda < 1
    # holds whenever lambda u_p^lambda > 1 - lambda.
    return max(branch(+1.0), branch(-1.0))


def exp_power_nu_threshold(lam: float) -> float:
    """Log-decay exponent above which exp(|x|^lambda) arrays keep a vanishing rate bound."""
    return lam / (2.0 + lam)


class LognormalCheck(NamedTuple):
    urs: bool
    gaussian_c: float


def lognormal_urs_check(nu: float, c: float = 1.0) -> LognormalCheck:
    """Uniform relative stability of a lognormal array with |Cov| <= c (log lag)^-nu.

    URS holds for nu > 1/3. ``gaussian_c`` is c/e, the constant inherited by
    the underlying Gaussian covariances through |x| <= e |e^x - 1| on [-1, 1].
    """
    if not nu > 0:
        raise DomainError(f"nu must be positive, got {nu!r}")
    return LognormalCheck(urs=nu > exp_power_nu_threshold(1.0), gaussian_c=c / math.e)


def g_beta(beta: float) -> float:
    """Exact-support-recovery boundary (1 + sqrt(1 - beta))^2 in signal strength r."""
    if not (0.0 < beta < 1.0):
        raise DomainError(f"beta must lie in (0, 1), got {beta!r}")
    return (1.0 + math.sqrt(1.0 - beta)) ** 2
