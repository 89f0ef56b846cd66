"""Covariance models for Gaussian triangular arrays.

Indices are 0-based throughout. Lag-based models are parametrized so that the
autocorrelation is a convex, non-increasing sequence tending to 0; such
sequences are positive definite (Polya's criterion), and so is their minimal
circulant embedding.

    PowerLaw   rho(k) = c * (1 + k)**(-gamma)            k >= 1
    LogDecay   rho(k) = c * (1 + log(1 + k))**(-nu)      k >= 1

with rho(0) = 1 and c in (0, 1]. For c < 1 the matrix is a convex combination
of the c = 1 matrix and the identity, so it stays positive semidefinite.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from .errors import DomainError, ModelInvalidError

__all__ = [
    "Kind",
    "CovarianceModel",
    "CovarianceMatrix",
    "cov_at",
    "acf",
    "materialize",
    "psd_repair",
    "min_eigenvalue",
    "load_matrix_csv",
    "model_from_descriptor",
    "model_to_descriptor",
    "load_model_json",
    "PRESETS",
    "DEFAULT_MAX_P",
    "LOG_FORM_NOTE",
]

DEFAULT_MAX_P = 8192
PSD_TOL = 1e-8
LOG_FORM_NOTE = "LogDecay uses log(1+k) in place of log(k); asymptotically identical"


class Kind(str, enum.Enum):
    IID = "iid"
    POWER_LAW = "powerlaw"
    LOG_DECAY = "logdecay"
    PERMUTED = "permuted"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class CovarianceModel:
    """Declarative dependence structure of one row of a triangular array.

    Build instances with the classmethods rather than the raw constructor.
    """

    kind: Kind
    gamma: Optional[float] = None
    nu: Optional[float] = None
    c: float = 1.0
    permutation: Optional[tuple] = None
    inner: Optional["CovarianceModel"] = None
    matrix: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    @classmethod
    def iid(cls) -> "CovarianceModel":
        return cls(Kind.IID)

    @classmethod
    def power_law(cls, gamma: float, c: float = 1.0) -> "CovarianceModel":
        if not (gamma > 0 and math.isfinite(gamma)):
            raise DomainError(f"gamma must be positive, got {gamma!r}")
        return cls(Kind.POWER_LAW, gamma=float(gamma), c=_check_c(c))

    @classmethod
    def log_decay(cls, nu: float, c: float = 1.0) -> "CovarianceModel":
        if not (nu > 0 and math.isfinite(nu)):
            raise DomainError(f"nu must be positive, got {nu!r}")
        return cls(Kind.LOG_DECAY, nu=float(nu), c=_check_c(c))

    @classmethod
    def permuted(cls, inner: "CovarianceModel", permutation: Sequence[int]) -> "CovarianceModel":
        perm = tuple(int(k) for k in permutation)
        if sorted(perm) != list(range(len(perm))):
            raise DomainError("permutation must be a bijection on {0, ..., p-1}")
        if inner.kind in (Kind.PERMUTED, Kind.EXPLICIT):
            raise DomainError("only lag-based models can be permuted")
        return cls(Kind.PERMUTED, permutation=perm, inner=inner)

    @classmethod
    def explicit(cls, matrix) -> "CovarianceModel":
        m = np.array(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ModelInvalidError(f"explicit covariance must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ModelInvalidError("explicit covariance has non-finite entries")
        if not np.array_equal(m, m.T):
            raise ModelInvalidError("explicit covariance is not symmetric")
        if not np.all(np.diag(m) == 1.0):
            raise ModelInvalidError("explicit covariance must have unit diagonal")
        if np.any(np.abs(m) > 1.0):
            worst = float(np.abs(m).max())
            raise ModelInvalidError(f"explicit covariance has |entry| = {worst} > 1")
        m.setflags(write=False)
        return cls(Kind.EXPLICIT, matrix=m)

    @property
    def is_lag_model(self) -> bool:
        """Covariance depends only on |i - j| (stationary)."""
        return self.kind in (Kind.IID, Kind.POWER_LAW, Kind.LOG_DECAY)

    @property
    def fixed_dimension(self) -> Optional[int]:
        if self.kind is Kind.EXPLICIT:
            return self.matrix.shape[0]
        if self.kind is Kind.PERMUTED:
            return len(self.permutation)
        return None

    @property
    def tag(self) -> str:
        if self.kind is Kind.POWER_LAW:
            return f"powerlaw(gamma={self.gamma:g},c={self.c:g})"
        if self.kind is Kind.LOG_DECAY:
            return f"logdecay(nu={self.nu:g},c={self.c:g})"
        if self.kind is Kind.PERMUTED:
            return f"permuted[{self.inner.tag}]"
        if self.kind is Kind.EXPLICIT:
            return f"explicit(p={self.matrix.shape[0]})"
        return "iid"


def _check_c(c):
    if not (c > 0 and math.isfinite(c)):
        raise DomainError(f"c must be positive, got {c!r}")
    # Capped so that rho(1) <= 1.
    return min(float(c), 1.0)


def acf(model: CovarianceModel, lags) -> np.ndarray:
    """Autocorrelation of a lag model at integer lags (vectorized)."""
    if not model.is_lag_model:
        raise DomainError(f"{model.kind.value} is not a lag model")
    k = np.abs(np.asarray(lags, dtype=float))
    out = np.zeros_like(k)
    pos = k > 0
    if model.kind is Kind.POWER_LAW:
        out[pos] = model.c * (1.0 + k[pos]) ** (-model.gamma)
    elif model.kind is Kind.LOG_DECAY:
        out[pos] = model.c * (1.0 + np.log1p(k[pos])) ** (-model.nu)
    out[~pos] = 1.0
    return out


def _lag_value(model, k):
    if k == 0:
        return 1.0
    if model.kind is Kind.POWER_LAW:
        return model.c * (1.0 + k) ** (-model.gamma)
    if model.kind is Kind.LOG_DECAY:
        return model.c * (1.0 + math.log1p(k)) ** (-model.nu)
    return 0.0


def _resolve_p(model, p):
    fixed = model.fixed_dimension
    if p is None:
        if fixed is None:
            raise DomainError(f"{model.kind.value} model needs an explicit dimension p")
        return fixed
    if fixed is not None and p != fixed:
        raise DomainError(f"model has fixed dimension {fixed}, got p={p}")
    if p < 1:
        raise DomainError(f"dimension must be >= 1, got {p}")
    return int(p)


def cov_at(model: CovarianceModel, i: int, j: int, p: Optional[int] = None) -> float:
    """Cov(eps_p(i), eps_p(j)) for 0 <= i, j < p."""
    p = _resolve_p(model, p)
    if not (0 <= i < p and 0 <= j < p):
        raise DomainError(f"indices ({i}, {j}) out of range for p={p}")
    if model.kind is Kind.EXPLICIT:
        return float(model.matrix[i, j])
    if model.kind is Kind.PERMUTED:
        perm = model.permutation
        return _lag_value(model.inner, abs(perm[i] - perm[j]))
    return _lag_value(model, abs(i - j))


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    p: int
    entries: np.ndarray
    min_eigenvalue: float
    repaired: bool = False
    max_repair_change: float = 0.0


def min_eigenvalue(a: np.ndarray) -> float:
    if a.shape[0] == 1:
        return float(a[0, 0])
    return float(linalg.eigh(a, eigvals_only=True, subset_by_index=[0, 0])[0])


def _roundoff_floor(a: np.ndarray) -> float:
    # Eigenvalues this close to zero are indistinguishable from it in double precision.
    return -a.shape[0] * np.finfo(float).eps * max(1.0, float(np.abs(a).sum(axis=1).max()))


def _entries(model: CovarianceModel, p: int) -> np.ndarray:
    if model.kind is Kind.EXPLICIT:
        return np.array(model.matrix, dtype=float)
    if model.kind is Kind.PERMUTED:
        base = _entries(model.inner, p)
        perm = np.asarray(model.permutation)
        return base[np.ix_(perm, perm)]
    if model.kind is Kind.IID:
        return np.eye(p)
    return linalg.toeplitz(acf(model, np.arange(p)))


def materialize(
    model: CovarianceModel,
    p: Optional[int] = None,
    *,
    tol: float = PSD_TOL,
    max_p: int = DEFAULT_MAX_P,
) -> CovarianceMatrix:
    """Dense correlation matrix for ``model`` at dimension ``p``, checked for PSD.

    Matrices whose smallest eigenvalue lies in [-tol, 0) are repaired with
    :func:`psd_repair`; anything more negative raises ModelInvalidError.
    """
    p = _resolve_p(model, p)
    if p > max_p:
        raise DomainError(f"p={p} exceeds the materialization cap {max_p}")
    a = _entries(model, p)
    lam = min_eigenvalue(a)
    mat = CovarianceMatrix(p=p, entries=a, min_eigenvalue=lam)
    if lam < -tol:
        raise ModelInvalidError(
            f"{model.tag} is not positive semidefinite at p={p}: min eigenvalue {lam:.3e}"
        )
    if lam < _roundoff_floor(a):
        mat = psd_repair(mat, tol)
    a.setflags(write=False)
    return mat


def psd_repair(matrix: CovarianceMatrix, tol: float = PSD_TOL) -> CovarianceMatrix:
    """Clip negative eigenvalues at zero and rescale back to unit diagonal.

    Inputs already PSD (up to round-off) come back unchanged with
    ``repaired=False``, so repairing twice equals repairing once.
    """
    a = matrix.entries
    w, v = linalg.eigh(a)
    lam = float(w[0])
    if lam < -tol:
        raise ModelInvalidError(f"cannot repair: min eigenvalue {lam:.3e} below -{tol:g}")
    if lam >= _roundoff_floor(a):
        return matrix
    w = np.clip(w, 0.0, None)
    b = (v * w) @ v.T
    d = 1.0 / np.sqrt(np.diag(b))
    b = b * d[:, None] * d[None, :]
    b = 0.5 * (b + b.T)
    np.fill_diagonal(b, 1.0)
    change = float(np.abs(b - a).max())
    b.setflags(write=False)
    return CovarianceMatrix(
        p=matrix.p,
        entries=b,
        min_eigenvalue=max(min_eigenvalue(b), 0.0),
        repaired=True,
        max_repair_change=change,
    )


def load_matrix_csv(path) -> CovarianceModel:
    """Explicit model from a square, header-free, row-major CSV file."""
    m = np.loadtxt(path, delimiter=",", ndmin=2)
    return CovarianceModel.explicit(m)


def model_from_descriptor(desc: dict, p: Optional[int] = None) -> CovarianceModel:
    """Model from the compact JSON form ``{kind, gamma|nu, c, permutation}``.

    ``permutation`` is "identity" (the default) or an explicit 0-based array.
    Explicit models take ``matrix`` (nested lists) or ``csv`` (a path).
    """
    try:
        kind = Kind(str(desc["kind"]).lower())
    except KeyError:
        raise DomainError("model descriptor is missing 'kind'") from None
    except ValueError:
        raise DomainError(f"unknown model kind {desc['kind']!r}") from None
    c = desc.get("c", 1.0)
    if kind is Kind.IID:
        base = CovarianceModel.iid()
    elif kind is Kind.POWER_LAW:
        if "gamma" not in desc:
            raise DomainError("powerlaw descriptor needs 'gamma'")
        base = CovarianceModel.power_law(float(desc["gamma"]), float(c))
    elif kind is Kind.LOG_DECAY:
        if "nu" not in desc:
            raise DomainError("logdecay descriptor needs 'nu'")
        base = CovarianceModel.log_decay(float(desc["nu"]), float(c))
    elif kind is Kind.EXPLICIT:
        if "matrix" in desc:
            return CovarianceModel.explicit(desc["matrix"])
        if "csv" in desc:
            return load_matrix_csv(desc["csv"])
        raise DomainError("explicit descriptor needs 'matrix' or 'csv'")
    else:
        if "inner" not in desc:
            raise DomainError("permuted descriptor needs 'inner'")
        base = model_from_descriptor(desc["inner"])
        return CovarianceModel.permuted(base, desc["permutation"])
    perm = desc.get("permutation", "identity")
    if isinstance(perm, str):
        if perm != "identity":
            raise DomainError(f"permutation must be 'identity' or an array, got {perm!r}")
        return base
    return CovarianceModel.permuted(base, perm)


def model_to_descriptor(model: CovarianceModel) -> dict:
    if model.kind is Kind.PERMUTED:
        d = model_to_descriptor(model.inner)
        d["permutation"] = list(model.permutation)
        return d
    d = {"kind": model.kind.value}
    if model.kind is Kind.POWER_LAW:
        d.update(gamma=model.gamma, c=model.c)
    elif model.kind is Kind.LOG_DECAY:
        d.update(nu=model.nu, c=model.c)
    elif model.kind is Kind.EXPLICIT:
        d["matrix"] = model.matrix.tolist()
        return d
    d["permutation"] = "identity"
    return d


def load_model_json(path) -> CovarianceModel:
    return model_from_descriptor(json.loads(Path(path).read_text()))


PRESETS = {
    "iid": CovarianceModel.iid(),
    "powerlaw-g1": CovarianceModel.power_law(1.0),
    "powerlaw-g2": CovarianceModel.power_law(2.0),
    "powerlaw-g0.5-c0.8": CovarianceModel.power_law(0.5, 0.8),
    "logdecay-nu1": CovarianceModel.log_decay(1.0),
    "logdecay-nu0.5": CovarianceModel.log_decay(0.5),
}
