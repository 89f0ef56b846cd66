"""Packing numbers of the uniformly-decreasing-dependence condition.

N(tau) counts, for the worst row i, the coordinates k with Cov(k, i) > tau
(strict). The diagonal always counts, so an iid array has N(tau) = 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .covariance import CovarianceMatrix, CovarianceModel, Kind, _lag_value, materialize
from .errors import DomainError
from .normal_toolkit import quantile_level

__all__ = [
    "PackingReport",
    "n_tau",
    "n_tau_model",
    "lag_count",
    "alpha_p",
    "greedy_packing",
    "r_q",
    "iid_expected_max_lower_bound",
    "LowerBound",
    "packing_report",
]

_ROW_CHUNK = 512
_TINY = 1e-300
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def _check_tau(tau):
    if not (0.0 < tau < 1.0):
        raise DomainError(f"tau must lie in (0, 1), got {tau!r}")


def _entries(cov):
    return cov.entries if isinstance(cov, CovarianceMatrix) else np.asarray(cov, dtype=float)


def n_tau(cov, tau: float) -> int:
    """Packing number N(tau) by a chunked scan over the rows of the matrix."""
    _check_tau(tau)
    a = _entries(cov)
    best = 0
    for start in range(0, a.shape[0], _ROW_CHUNK):
        counts = np.count_nonzero(a[start:start + _ROW_CHUNK] > tau, axis=1)
        best = max(best, int(counts.max()))
    return best


def lag_count(model: CovarianceModel, tau: float, p: int) -> int:
    """Largest lag K in [0, p-1] with rho(K) > tau, for a lag model.

    The autocorrelation is non-increasing, so the exceeding lags form the
    prefix {1, ..., K}; K is found by bisection on exact formula values.
    """
    _check_tau(tau)
    if not model.is_lag_model:
        raise DomainError(f"{model.kind.value} is not a lag model")
    if model.kind is Kind.IID or p < 2:
        return 0
    lo, hi = 0, p - 1  # invariant: rho(lo) > tau
    if _lag_value(model, hi) > tau:
        return hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _lag_value(model, mid) > tau:
            lo = mid
        else:
            hi = mid
    return lo


def n_tau_model(model: CovarianceModel, tau: float, p: Optional[int] = None) -> int:
    """N(tau) straight from the model, without a dense matrix where possible.

    For a lag model row i sees min(i, K) + min(p-1-i, K) exceeding lags plus
    itself, so the maximum over rows is 1 + min(2K, p-1). A permutation
    reorders each row's entries and leaves the maximum count unchanged.
    """
    _check_tau(tau)
    if model.kind is Kind.PERMUTED:
        return n_tau_model(model.inner, tau, len(model.permutation))
    if model.kind is Kind.EXPLICIT:
        return n_tau(model.matrix, tau)
    if p is None:
        raise DomainError("lag models need a dimension p")
    k = lag_count(model, tau, p)
    return 1 + min(2 * k, p - 1)


def alpha_p(n: int, p: int) -> float:
    """log N / log p."""
    if n < 1 or p < 2:
        raise DomainError(f"alpha_p needs n >= 1 and p >= 2, got n={n}, p={p}")
    return math.log(n) / math.log(p)


def greedy_packing(cov, tau: float) -> list:
    """Greedy tau-packing: indices with pairwise covariance <= tau.

    Repeatedly take the lowest remaining index j and discard its ball
    {i : Cov(i, j) > tau}, i.e. canonical distance below sqrt(2 (1 - tau)).
    Each ball holds at most N(tau) points, so at least ceil(p / N(tau))
    indices survive.
    """
    _check_tau(tau)
    a = _entries(cov)
    remaining = np.ones(a.shape[0], dtype=bool)
    chosen = []
    while True:
        idx = np.flatnonzero(remaining)
        if idx.size == 0:
            break
        j = int(idx[0])
        chosen.append(j)
        remaining &= ~(a[j] > tau)
        remaining[j] = False
    return chosen


def _pow2_neg(m):
    """2**(-m), flushed to 0 below 1e-300."""
    log_val = -m * math.log(2.0)
    return 0.0 if log_val < math.log(_TINY) else math.exp(log_val)


def r_q(q: int, tau: float, n: int) -> float:
    """Deficiency R_q of the expected-maximum lower bound E[max/u_q] >= 1 - R_q.

    Evaluated as 1 - sqrt(1-tau)/u_q * (u_{m+1} (1 - 2^-m) - sqrt(2/pi) 2^-m)
    with m = q/n real-valued, which is finite at the m = 1 edge where u_2 = 0.
    """
    if q < 2 or n < 1:
        raise DomainError(f"r_q needs q >= 2 and n >= 1, got q={q}, n={n}")
    if not (0.0 <= tau < 1.0):
        raise DomainError(f"tau must lie in [0, 1), got {tau!r}")
    m = q / n
    if m + 1.0 < 2.0:
        raise DomainError(f"q/n + 1 = {m + 1.0} < 2: u is undefined there")
    if q == 2:
        raise DomainError("u_2 = 0, so R_q needs q >= 3")
    two_m = _pow2_neg(m)
    inner = quantile_level(m + 1.0) * (1.0 - two_m) - _SQRT_2_OVER_PI * two_m
    return 1.0 - math.sqrt(1.0 - tau) / quantile_level(float(q)) * inner


class LowerBound(NamedTuple):
    value: float
    degenerate: bool


def iid_expected_max_lower_bound(p: int) -> LowerBound:
    """Lower bound on E[max of p iid N(0,1)] / u_{p+1}.

    At p = 1, u_2 = 0 leaves the second term undefined; only the first term
    is returned and the result is flagged degenerate.
    """
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    two_p = _pow2_neg(p)
    if p == 1:
        return LowerBound(1.0 - two_p, True)
    return LowerBound((1.0 - two_p) - _SQRT_2_OVER_PI / quantile_level(p + 1.0) * two_p, False)


@dataclass(frozen=True)
class PackingReport:
    p: int
    tau: float
    n_tau: int
    alpha: float
    gamma_set: tuple
    r_q: Optional[float]

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "tau": self.tau,
            "n_tau": self.n_tau,
            "alpha": self.alpha,
            "gamma_size": len(self.gamma_set),
            "gamma_set": sorted(self.gamma_set),
            "r_q": self.r_q,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)


def packing_report(model: CovarianceModel, p: Optional[int], tau: float) -> PackingReport:
    if model.kind is Kind.IID:
        # Identity matrix: nothing to materialize, every index survives.
        _check_tau(tau)
        n, gamma_set = 1, tuple(range(p))
    else:
        cov = materialize(model, p)
        p = cov.p
        n = n_tau(cov, tau)
        gamma_set = tuple(greedy_packing(cov, tau))
    try:
        rq = r_q(p, tau, n)
    except DomainError:
        rq = None
    return PackingReport(p=p, tau=tau, n_tau=n, alpha=alpha_p(n, p), gamma_set=gamma_set, r_q=rq)
