"""Exact sampling of Gaussian array rows, entrywise transforms and max statistics.

Every draw comes from a counter-based stream keyed by (seed, cell, replication),
so a replication's output does not depend on which worker produced it or in
what order. Normals are produced by inverse-cdf on 53-bit uniforms.

Methods
-------
IID            independent coordinates; extremes are drawn directly from
               their exact joint law, without forming the row.
CIRCULANT_FFT  lag models (and permutations of them): circulant embedding of
               the Toeplitz covariance in size m >= 2p, O(m log m) per row.
CHOLESKY       anything else, via a dense factor (p <= 8192).
"""

from __future__ import annotations

import enum
import functools
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy import fft as sp_fft
from scipy import linalg

from .covariance import CovarianceModel, Kind, acf, materialize
from .errors import DomainError, ModelInvalidError
from .normal_toolkit import std_normal_isf, std_normal_quantile
from .rates import TransformSpec

__all__ = [
    "Method",
    "SamplerState",
    "Extremes",
    "prepare",
    "rng_for",
    "standard_normals",
    "sample_row",
    "sample_extremes",
    "apply_transform",
    "transformed_max",
    "normalized_max",
    "embedding_eigenvalues",
]

log = logging.getLogger(__name__)

EMBEDDING_TOL = 1e-10
CHOLESKY_MAX_P = 8192


class Method(str, enum.Enum):
    IID = "iid-fast"
    CHOLESKY = "cholesky"
    CIRCULANT_FFT = "circulant-fft"


@dataclass(frozen=True, eq=False)
class SamplerState:
    model: CovarianceModel
    p: int
    method: Method
    seed: int = 0
    cell: int = 0
    factor: Optional[np.ndarray] = field(default=None, repr=False)
    embedding_size: int = 0
    clipped_mass: float = 0.0
    permutation: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def seed_scheme(self) -> str:
        return (
            f"philox4x64(key=seedsequence(entropy={self.seed}, spawn_key=({self.cell},)), "
            "counter=(0, 0, 0, replication))"
        )

    def describe(self) -> dict:
        return {
            "method": self.method.value,
            "embedding_size": self.embedding_size,
            "clipped_mass": self.clipped_mass,
            "seed_scheme": self.seed_scheme,
        }


@functools.lru_cache(maxsize=4096)
def _stream_key(seed: int, cell: int) -> tuple:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(cell),))
    return tuple(int(k) for k in ss.generate_state(2, dtype=np.uint64))


def _bitgen_for(seed: int, cell: int, replication: int) -> np.random.Philox:
    # Replication r owns the counter block starting at r * 2**192.
    return np.random.Philox(key=list(_stream_key(seed, cell)), counter=[0, 0, 0, int(replication)])


def rng_for(seed: int, cell: int, replication: int) -> np.random.Generator:
    """Generator over the stream of one (seed, cell, replication) triple."""
    return np.random.Generator(_bitgen_for(seed, cell, replication))


def _open_uniforms(gen, n):
    # Top 53 bits of each raw word, centred: (k + 1/2) / 2**53 is never 0 or 1.
    raw = gen.bit_generator.random_raw(n)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def standard_normals(gen: np.random.Generator, n: int) -> np.ndarray:
    return std_normal_quantile(_open_uniforms(gen, n))


def embedding_eigenvalues(model: CovarianceModel, p: int):
    """Eigenvalues of the circulant embedding of a lag model, and its size m.

    The first row carries rho at circular distance min(k, m - k), so its
    leading p x p block is exactly the Toeplitz covariance.
    """
    m = sp_fft.next_fast_len(2 * p, real=True)
    k = np.arange(m)
    row = acf(model, np.minimum(k, m - k))
    return sp_fft.rfft(row).real, m


def prepare(
    model: CovarianceModel,
    p: Optional[int] = None,
    *,
    seed: int = 0,
    cell: int = 0,
    method: Optional[Method] = None,
) -> SamplerState:
    """Pick a sampling method for (model, p) and precompute its factor.

    ``method`` forces a particular route (used to cross-check FFT against
    Cholesky); by default the cheapest exact route is chosen.
    """
    perm = None
    base = model
    if model.kind is Kind.PERMUTED:
        perm = np.asarray(model.permutation)
        base = model.inner
        if p is not None and p != len(perm):
            raise DomainError(f"permuted model has dimension {len(perm)}, got p={p}")
        p = len(perm)
    elif model.kind is Kind.EXPLICIT:
        p = model.matrix.shape[0] if p is None else p
    if p is None or p < 1:
        raise DomainError("a positive dimension p is required")
    common = dict(model=model, p=int(p), seed=int(seed), cell=int(cell))

    if method is None:
        if base.kind is Kind.IID:
            method = Method.IID
        elif base.is_lag_model:
            method = Method.CIRCULANT_FFT
        else:
            method = Method.CHOLESKY

    if method is Method.IID:
        if base.kind is not Kind.IID:
            raise DomainError("iid-fast sampling needs an iid model")
        return SamplerState(method=Method.IID, **common)

    if method is Method.CIRCULANT_FFT:
        if not base.is_lag_model:
            raise DomainError("circulant embedding needs a lag (stationary) model")
        lam, m = embedding_eigenvalues(base, p)
        lowest = float(lam.min())
        if lowest >= -EMBEDDING_TOL:
            neg = np.clip(lam, None, 0.0)
            clipped = float(-neg.sum() / lam.clip(0.0, None).sum())
            return SamplerState(
                method=Method.CIRCULANT_FFT,
                factor=np.sqrt(np.clip(lam, 0.0, None)),
                embedding_size=m,
                clipped_mass=clipped,
                permutation=perm,
                **common,
            )
        log.warning(
            "circulant embedding of %s at p=%d has eigenvalue %.3e; falling back to Cholesky",
            model.tag, p, lowest,
        )

    if p > CHOLESKY_MAX_P:
        raise DomainError(f"Cholesky sampling is capped at p={CHOLESKY_MAX_P}, got {p}")
    cov = materialize(model, p, max_p=CHOLESKY_MAX_P)
    if cov.repaired:
        log.warning("covariance for %s was PSD-repaired (max change %.2e)", model.tag, cov.max_repair_change)
    try:
        factor = linalg.cholesky(cov.entries, lower=True)
    except linalg.LinAlgError:
        if not cov.repaired and cov.min_eigenvalue > 0:
            raise ModelInvalidError(f"Cholesky factorization of {model.tag} failed") from None
        # Singular but PSD: a symmetric square root serves as the factor.
        w, v = linalg.eigh(cov.entries)
        factor = v * np.sqrt(np.clip(w, 0.0, None))
    return SamplerState(method=Method.CHOLESKY, factor=factor, **common)


def sample_row(state: SamplerState, replication: int) -> np.ndarray:
    """One row eps_p(0..p-1), deterministic in (seed, cell, replication)."""
    gen = rng_for(state.seed, state.cell, replication)
    if state.method is Method.IID:
        return standard_normals(gen, state.p)
    if state.method is Method.CHOLESKY:
        return state.factor @ standard_normals(gen, state.p)
    m = state.embedding_size
    # Circulant square root applied to real white noise: ifft(sqrt(lam) * fft(xi)).
    xi = standard_normals(gen, m)
    y = sp_fft.irfft(state.factor * sp_fft.rfft(xi), n=m)[: state.p]
    if state.permutation is not None:
        y = y[state.permutation]
    return y


class Extremes(NamedTuple):
    max: float
    min: float


def _uniform(bitgen) -> float:
    return ((int(bitgen.random_raw()) >> 11) + 0.5) * 2.0**-53


def _iid_extremes(bitgen, p):
    u, v = _uniform(bitgen), _uniform(bitgen)
    # P(max <= x) = Phi(x)^p, so sf(max) = 1 - U^(1/p).
    tail = -math.expm1(math.log(u) / p)
    top = std_normal_isf(tail)
    if p == 1:
        return Extremes(top, top)
    # Given the max, the other p-1 are iid N(0,1) conditioned below it.
    below = (1.0 - tail) * -math.expm1(math.log(v) / (p - 1))
    return Extremes(top, std_normal_quantile(below))


def sample_extremes(state: SamplerState, replication: int) -> Extremes:
    """(max, min) of one row; for iid models drawn exactly without the row."""
    if state.method is Method.IID:
        return _iid_extremes(_bitgen_for(state.seed, state.cell, replication), state.p)
    row = sample_row(state, replication)
    return Extremes(float(row.max()), float(row.min()))


def apply_transform(x, spec: TransformSpec) -> np.ndarray:
    """Entrywise f(x); exp overflow yields +inf entries."""
    return spec.f(x)


def transformed_max(ext: Extremes, spec: TransformSpec) -> float:
    """max_i f(x_i) from the row extremes alone.

    Monotone f: f(max). Even f, non-decreasing on (0, inf): max(f(max), f(min)).
    """
    top = float(spec.f(ext.max))
    if spec.is_even:
        return max(top, float(spec.f(ext.min)))
    return top


def normalized_max(x, norm: float) -> float:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise DomainError("normalized_max of an empty vector")
    if norm == 0:
        raise DomainError("normalizer must be nonzero")
    return float(x.max()) / norm
