"""Monte Carlo experiments on maxima of Gaussian arrays.

Every engine here is a pure function of its arguments and ``seed``: each
replication draws from its own counter-based stream and results are
aggregated in replication order, so ``workers`` only changes wall time.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .covariance import CovarianceModel
from .errors import DomainError, InadmissibleError
from .normal_toolkit import constants_for, std_normal_isf
from .rates import TransformKind, TransformSpec, capstone_auto, g_beta
from .sampler import prepare, rng_for, sample_extremes, sample_row, transformed_max

__all__ = [
    "NORM_KINDS",
    "DeltaSchedule",
    "ConcentrationEstimate",
    "estimate_concentration",
    "RateFit",
    "empirical_rate_fit",
    "ks_distance",
    "gumbel_cdf",
    "GumbelCheck",
    "gumbel_check",
    "FixedThreshold",
    "BonferroniThreshold",
    "DEFAULT_RULE",
    "support_size",
    "signal_strength",
    "support_recovery_trial",
    "PhaseDiagramCell",
    "phase_diagram",
    "ProbeRow",
    "conjecture_probe",
    "map_replications",
]

NORM_KINDS = ("u_p", "sqrt2logp", "u_star", "f_of_up")
_Z95 = 1.96


def map_replications(fn: Callable[[int], object], reps: int, workers: int = 1) -> list:
    """[fn(0), ..., fn(reps-1)] computed on ``workers`` threads, in order."""
    if workers <= 1 or reps < 2:
        return [fn(r) for r in range(reps)]
    bounds = np.linspace(0, reps, min(workers, reps) + 1).astype(int)

    def block(k):
        return [fn(r) for r in range(bounds[k], bounds[k + 1])]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(block, range(len(bounds) - 1)))
    return [x for part in parts for x in part]


@dataclass(frozen=True)
class DeltaSchedule:
    """Named rule p -> delta_p.

    c_over_logp       c / log p
    loglog_over_log   c log log p / log p
    capstone_auto     c * (capstone bound at the model's optimal tau(p))
    constant          c
    """

    name: str = "c_over_logp"
    c: float = 1.0

    def __post_init__(self):
        if self.name not in ("c_over_logp", "loglog_over_log", "capstone_auto", "constant"):
            raise DomainError(f"unknown delta schedule {self.name!r}")
        if not self.c > 0:
            raise DomainError(f"schedule constant must be positive, got {self.c!r}")

    def __call__(self, model: CovarianceModel, p: int) -> float:
        log_p = math.log(p)
        if self.name == "c_over_logp":
            return self.c / log_p
        if self.name == "loglog_over_log":
            return self.c * math.log(log_p) / log_p
        if self.name == "capstone_auto":
            return self.c * capstone_auto(model, p).total
        return self.c


@dataclass(frozen=True)
class ConcentrationEstimate:
    """Empirical P(|max/norm - 1| > delta_p), split into its two tails."""

    p: int
    delta_p: float
    norm_kind: str
    norm_value: float
    transform: str
    model: str
    reps: int
    count_above: int
    count_below: int
    prob: float
    half_width: float
    mean_abs_dev: float

    def as_dict(self) -> dict:
        return asdict(self)


def _norm_value(norm_kind, spec, p):
    c = constants_for(p)
    if norm_kind == "f_of_up":
        v = float(spec.f(c.u_p))
        if not (math.isfinite(v) and v != 0.0):
            raise InadmissibleError(f"f(u_p) = {v} cannot normalize at p={p}")
        return v
    if spec.kind is not TransformKind.IDENTITY:
        raise InadmissibleError(f"transform {spec.name} must be normalized by f(u_p), not {norm_kind}")
    if norm_kind == "u_p":
        return c.u_p
    if norm_kind == "sqrt2logp":
        return c.sqrt_2_log_p
    if norm_kind == "u_star":
        if c.u_star is None:
            raise DomainError("u_star needs p >= 3")
        return c.u_star
    raise DomainError(f"unknown norm kind {norm_kind!r}; expected one of {NORM_KINDS}")


def _binomial_half_width(prob, reps):
    return _Z95 * math.sqrt(prob * (1.0 - prob) / reps)


def estimate_concentration(
    model: CovarianceModel,
    transform: Optional[TransformSpec],
    p_grid: Sequence[int],
    delta_schedule: Callable[[CovarianceModel, int], float],
    norm_kind: str = "u_p",
    reps: int = 1000,
    seed: int = 0,
    workers: int = 1,
) -> list:
    """Concentration probabilities of the normalized maximum across a grid of p.

    For each p the row maxima (of f(eps) when a transform is given) are divided
    by the normalizer and compared with 1 +/- delta_p. Streams are keyed by p,
    so a given (seed, p) sees the same rows whatever the grid or transform.
    """
    spec = transform or TransformSpec()
    if reps < 100:
        raise DomainError(f"reps must be >= 100, got {reps}")
    out = []
    for p in p_grid:
        p = int(p)
        norm = _norm_value(norm_kind, spec, p)
        delta = float(delta_schedule(model, p))
        if not delta > 0:
            raise DomainError(f"delta_p must be positive, got {delta} at p={p}")
        state = prepare(model, p, seed=seed, cell=p)

        def one(r, state=state):
            return transformed_max(sample_extremes(state, r), spec)

        tops = np.array(map_replications(one, reps, workers))
        with np.errstate(invalid="ignore", over="ignore"):
            dev = tops / norm - 1.0
        above = int(np.count_nonzero(dev > delta))
        below = int(np.count_nonzero(dev < -delta))
        prob = (above + below) / reps
        out.append(
            ConcentrationEstimate(
                p=p,
                delta_p=delta,
                norm_kind=norm_kind,
                norm_value=norm,
                transform=spec.name,
                model=model.tag,
                reps=reps,
                count_above=above,
                count_below=below,
                prob=prob,
                half_width=_binomial_half_width(prob, reps),
                mean_abs_dev=float(np.mean(np.abs(dev))),
            )
        )
    return out


@dataclass(frozen=True)
class RateFit:
    """Fits of y = mean_abs_dev * log p as a constant (rate 1/log p) and as
    b * log log p (rate log log p / log p)."""

    const_coef: float
    const_residual: float
    loglog_coef: float
    loglog_residual: float
    best: str
    band_logp: float
    band_loglog: float


def empirical_rate_fit(estimates: Sequence[ConcentrationEstimate]) -> RateFit:
    """Discriminate the 1/log p and log log p / log p rates by least squares.

    Residuals are relative sums of squares; the bands are max/min ratios of
    mean_abs_dev * log p and of mean_abs_dev * log p / log log p over the grid.
    """
    ps = np.array([e.p for e in estimates], dtype=float)
    if len(np.unique(ps)) < 4 or ps.max() / ps.min() < 100.0 or ps.min() < 3:
        raise DomainError("rate fit needs >= 4 distinct p >= 3 spanning >= 2 decades")
    mad = np.array([e.mean_abs_dev for e in estimates])
    log_p = np.log(ps)
    loglog = np.log(log_p)
    y = mad * log_p
    ss = float(np.sum(y * y))
    a = float(np.mean(y))
    res_a = float(np.sum((y - a) ** 2)) / ss
    b = float(np.sum(y * loglog) / np.sum(loglog * loglog))
    res_b = float(np.sum((y - b * loglog) ** 2)) / ss
    z = y / loglog
    return RateFit(
        const_coef=a,
        const_residual=res_a,
        loglog_coef=b,
        loglog_residual=res_b,
        best="1/log p" if res_a <= res_b else "loglog p/log p",
        band_logp=float(y.max() / y.min()),
        band_loglog=float(z.max() / z.min()),
    )


def gumbel_cdf(x):
    return np.exp(-np.exp(-np.asarray(x, dtype=float)))


def ks_distance(sample, cdf: Callable = gumbel_cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance sup |F_n - F|."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n == 0:
        raise DomainError("KS distance of an empty sample")
    f = cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


@dataclass(frozen=True)
class GumbelCheck:
    p: int
    reps: int
    ks: float
    critical_1pct: float

    def as_dict(self) -> dict:
        return asdict(self)


def gumbel_check(p: int, reps: int = 5000, seed: int = 0, workers: int = 1) -> GumbelCheck:
    """KS distance between u_p (M_p - u_p) for iid maxima and the standard Gumbel law."""
    if reps < 1000:
        raise DomainError(f"reps must be >= 1000, got {reps}")
    u = constants_for(p).u_p
    state = prepare(CovarianceModel.iid(), p, seed=seed, cell=p)
    tops = np.array(map_replications(lambda r: sample_extremes(state, r).max, reps, workers))
    return GumbelCheck(p=p, reps=reps, ks=ks_distance(u * (tops - u)), critical_1pct=1.63 / math.sqrt(reps))


@dataclass(frozen=True)
class FixedThreshold:
    """t_p = sqrt(2 q log p)."""

    q: float = 1.0

    def __call__(self, x: np.ndarray, p: int) -> float:
        return math.sqrt(2.0 * self.q * math.log(p))


@dataclass(frozen=True)
class BonferroniThreshold:
    """t_p = Phi-bar^{-1}(alpha / p): family-wise false-inclusion rate alpha.

    Asymptotically equivalent to sqrt(2 log p); at p ~ 1e4 the plain
    sqrt(2 log p) threshold still admits a noise exceedance in ~8% of rows.
    """

    alpha: float = 0.01

    def __call__(self, x: np.ndarray, p: int) -> float:
        return float(std_normal_isf(self.alpha / p))


DEFAULT_RULE = BonferroniThreshold()


def support_size(p: int, beta: float) -> int:
    """ceil(p^(1 - beta)), guarded against round-off just above an integer."""
    return max(1, math.ceil(p ** (1.0 - beta) - 1e-9))


def signal_strength(p: int, r: float) -> float:
    """mu_p = sqrt(2 r log p)."""
    return math.sqrt(2.0 * r * math.log(p))


def support_recovery_trial(state, beta: float, r: float, replication: int, rule=DEFAULT_RULE) -> bool:
    """One draw of x = mu 1_S + eps; True iff {i : x_i > t_p} equals S exactly.

    S is a seeded random subset of size ceil(p^(1-beta)); its stream is
    separate from the noise stream of the same replication.
    """
    if not (0.0 < beta < 1.0):
        raise DomainError(f"beta must lie in (0, 1), got {beta!r}")
    if not r >= 0:
        raise DomainError(f"r must be nonnegative, got {r!r}")
    p = state.p
    k = support_size(p, beta)
    if k >= p:
        raise DomainError(f"support size {k} must be smaller than p={p}")
    support = rng_for(state.seed, state.cell + 1_000_003, replication).permutation(p)[:k]
    x = sample_row(state, replication)
    x[support] += signal_strength(p, r)
    t = rule(x, p)
    chosen = x > t
    return bool(chosen[support].all() and np.count_nonzero(chosen) == k)


@dataclass(frozen=True)
class PhaseDiagramCell:
    beta: float
    r: float
    p: int
    reps: int
    support_size: int
    recovery_freq: float
    g_beta: float

    def as_dict(self) -> dict:
        return asdict(self)


def phase_diagram(
    p: int,
    beta_grid: Sequence[float],
    r_grid: Sequence[float],
    model: Optional[CovarianceModel] = None,
    reps: int = 100,
    seed: int = 0,
    rule=DEFAULT_RULE,
    workers: int = 1,
    r_relative: bool = False,
) -> list:
    """Exact-recovery frequencies over a (beta, r) grid.

    With ``r_relative`` the r grid holds multiples of the boundary g(beta).
    Cells in one beta row share supports and noise (common random numbers),
    which makes recovery frequency exactly non-decreasing in r.
    """
    if not beta_grid or not r_grid:
        raise DomainError("beta and r grids must be nonempty")
    if reps < 50:
        raise DomainError(f"reps must be >= 50, got {reps}")
    model = model or CovarianceModel.iid()
    base = prepare(model, p, seed=seed, cell=0)
    cells = []
    for ib, beta in enumerate(beta_grid):
        state = replace(base, cell=ib)
        scale = g_beta(beta) if r_relative else 1.0
        for r in (scale * float(x) for x in r_grid):
            hits = map_replications(
                lambda rep, state=state, r=r: support_recovery_trial(state, beta, r, rep, rule),
                reps,
                workers,
            )
            cells.append(
                PhaseDiagramCell(
                    beta=float(beta),
                    r=float(r),
                    p=p,
                    reps=reps,
                    support_size=support_size(p, beta),
                    recovery_freq=sum(hits) / reps,
                    g_beta=g_beta(beta),
                )
            )
    return cells


@dataclass(frozen=True)
class ProbeRow:
    p: int
    c: float
    delta_p: float
    reps: int
    prob: float
    half_width: float

    def as_dict(self) -> dict:
        return asdict(self)


def conjecture_probe(
    model: CovarianceModel,
    p_grid: Sequence[int],
    c_grid: Sequence[float],
    reps: int = 1000,
    seed: int = 0,
    workers: int = 1,
) -> list:
    """P(|M_p/u_p - 1| > c/log p) over p and c: evidence on whether rates
    faster than 1/log p are possible. Exploratory, not a test of anything."""
    if reps < 100:
        raise DomainError(f"reps must be >= 100, got {reps}")
    rows = []
    for p in p_grid:
        u = constants_for(int(p)).u_p
        state = prepare(model, int(p), seed=seed, cell=int(p))
        tops = np.array(map_replications(lambda r, state=state: sample_extremes(state, r).max, reps, workers))
        dev = np.abs(tops / u - 1.0)
        for c in c_grid:
            delta = c / math.log(p)
            prob = float(np.count_nonzero(dev > delta)) / reps
            rows.append(ProbeRow(int(p), float(c), delta, reps, prob, _binomial_half_width(prob, reps)))
    return rows
