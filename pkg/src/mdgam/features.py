"""Mahalanobis-distance and local-Mahalanobis-distance features.

MD features are the per-class standardized distances
``delta_j(x) = sqrt((x - mu_j)' Sigma_j^{-1} (x - mu_j))``. LMD features
localize the squared version with a kernel profile ``Psi`` applied to
the squared standardized distance:

    beta_h(x)  = mean_i Psi(q_i / h^2) * q_i,   q_i = (x - x_i)' Sigma^{-1} (x - x_i)
    gamma_h(x) = beta_h(x)            if h > 1
               = beta_h(x) / h^{d+2}  if h <= 1

For large h, gamma_h approaches Psi(0) * (delta(x)^2 + d); for small h
it is proportional to the underlying density. ``Psi`` takes the squared
standardized distance directly, which is the convention consistent with
defining the kernel as K(t) = Psi(t't).
"""

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (DimensionMismatch, EmptyModelList, NonPositiveH,
                     NumericalError)
from .estimators import ScatterModel

MD = "md"
LMD = "lmd"
MD_SQUARED_SCALED = "md2_scaled"

#: Quadratic forms may round off slightly negative; anything below this
#: (relative) floor is a genuine numerical problem, not round-off.
NEG_QFORM_TOL = 1e-10


@dataclass(frozen=True)
class KernelProfile:
    """Kernel profile Psi over squared standardized distances.

    ``psi_at_zero`` is Psi(0) and ``kappa2`` the second moment
    ``integral ||z||^2 K(z) dz`` of the corresponding kernel (NaN when
    the profile is not normalized to a density).
    """

    psi: Callable[[np.ndarray], np.ndarray]
    psi_at_zero: float
    kappa2: float
    kind: str


def gaussian_profile(d: int) -> KernelProfile:
    """Profile of the standard d-variate Gaussian kernel.

    Psi(s) = (2 pi)^{-d/2} exp(-s/2); kappa2 equals d (the mean of a
    chi-square with d degrees of freedom).
    """
    if d < 1:
        raise DimensionMismatch(f"kernel dimension must be >= 1, got {d}")
    const = (2.0 * math.pi) ** (-d / 2.0)

    def psi(s):
        return const * np.exp(-0.5 * np.asarray(s, dtype=float))

    return KernelProfile(psi, const, float(d), kind=f"gaussian:{d}")


def flat_gaussian_profile() -> KernelProfile:
    """Gaussian profile without the dimension-dependent normalizing constant.

    Psi(s) = exp(-s/2). Used in high-dimensional settings where
    (2 pi)^{-d/2} underflows; dropping a positive constant rescales all
    feature columns equally and changes no decision rule.
    """

    def psi(s):
        return np.exp(-0.5 * np.asarray(s, dtype=float))

    return KernelProfile(psi, 1.0, math.nan, kind="gaussian-flat")


def kernel_profile_from_kind(kind: str) -> KernelProfile:
    """Rebuild a profile from its serialized ``kind`` tag."""
    if kind == "gaussian-flat":
        return flat_gaussian_profile()
    if kind.startswith("gaussian:"):
        return gaussian_profile(int(kind.split(":", 1)[1]))
    raise NumericalError(f"unknown kernel profile kind {kind!r}")


@dataclass(frozen=True)
class FeatureMatrix:
    """n x J matrix of per-class features of one kind.

    ``kind`` is one of ``md``, ``lmd``, ``md2_scaled``; LMD features
    record the exact localization parameter ``h`` they were built with.
    """

    values: np.ndarray
    kind: str
    class_count: int
    h: float | None = None

    def __post_init__(self):
        if self.kind == LMD and self.h is None:
            raise NonPositiveH("LMD feature matrix must record its h")


def _clamp_qforms(q: np.ndarray) -> np.ndarray:
    """Zero out tiny negative round-off in quadratic forms."""
    scale = max(1.0, float(np.max(np.abs(q))) if q.size else 1.0)
    if np.any(q < -NEG_QFORM_TOL * scale):
        raise NumericalError(
            f"quadratic form below round-off floor: min={np.min(q):.3e}")
    return np.maximum(q, 0.0)


def squared_mahalanobis(X, model: ScatterModel) -> np.ndarray:
    """Squared standardized distances of rows of X from ``model``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.dim:
        raise DimensionMismatch(
            f"x has dimension {X.shape[1]}, model has {model.dim}")
    Xc = X - model.location
    q = np.einsum("ij,jk,ik->i", Xc, model.scatter_inv, Xc)
    return _clamp_qforms(q)


def mahalanobis(x, model: ScatterModel) -> float:
    """Mahalanobis distance of a single point from ``model``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch("mahalanobis expects a single vector")
    return float(np.sqrt(squared_mahalanobis(x[None, :], model)[0]))


def md_features(X, models: Sequence[ScatterModel]) -> FeatureMatrix:
    """Matrix of Mahalanobis distances of each row from each class model."""
    if len(models) == 0:
        raise EmptyModelList("need at least one scatter model")
    dims = {m.dim for m in models}
    if len(dims) != 1:
        raise DimensionMismatch(f"models disagree on dimension: {sorted(dims)}")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    cols = [np.sqrt(squared_mahalanobis(X, m)) for m in models]
    return FeatureMatrix(np.column_stack(cols), MD, len(models))


def pairwise_qforms(X, rows, scatter_inv) -> np.ndarray:
    """Quadratic forms (x_i - r_j)' A (x_i - r_j) for all pairs.

    Returns an (n, m) matrix; used by LMD features and the h-grid
    machinery, where the same pair matrix is reused across many h.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    R = np.atleast_2d(np.asarray(rows, dtype=float))
    A = np.asarray(scatter_inv, dtype=float)
    XA = X @ A
    sx = np.einsum("ij,ij->i", XA, X)
    sr = np.einsum("ij,ij->i", R @ A, R)
    q = sx[:, None] - 2.0 * (XA @ R.T) + sr[None, :]
    return _clamp_qforms(q)


def lmd_branch_factor(h: float, d: int) -> float:
    """1 for h > 1, h^{-(d+2)} for h <= 1 (the two-branch LMD definition)."""
    if h > 1.0:
        return 1.0
    return math.exp(-(d + 2) * math.log(h))


def lmd_beta_from_qforms(q: np.ndarray, h: float, kernel: KernelProfile) -> np.ndarray:
    """Row means of Psi(q/h^2) * q for a precomputed pair matrix."""
    w = kernel.psi(q / (h * h))
    return np.mean(w * q, axis=1)


def lmd_beta(x, class_rows, model: ScatterModel, h: float,
             kernel: KernelProfile) -> float:
    """Kernel-weighted average squared standardized distance at ``x``."""
    if h <= 0:
        raise NonPositiveH(f"localization parameter must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    q = pairwise_qforms(x[None, :], class_rows, model.scatter_inv)
    return float(lmd_beta_from_qforms(q, h, kernel)[0])


def lmd_value(x, class_rows, model: ScatterModel, h: float,
              kernel: KernelProfile) -> float:
    """Local Mahalanobis distance gamma_h(x): beta with the h <= 1 rescaling."""
    d = model.dim
    return lmd_beta(x, class_rows, model, h, kernel) * lmd_branch_factor(h, d)


def lmd_features(X, per_class_rows: Sequence, models: Sequence[ScatterModel],
                 h: float, kernel: KernelProfile) -> FeatureMatrix:
    """Matrix of LMD features of each row with respect to each class."""
    if len(models) == 0:
        raise EmptyModelList("need at least one scatter model")
    if len(per_class_rows) != len(models):
        raise DimensionMismatch("one row block per model is required")
    if h <= 0:
        raise NonPositiveH(f"localization parameter must be positive, got {h}")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    cols = []
    for rows, model in zip(per_class_rows, models):
        q = pairwise_qforms(X, rows, model.scatter_inv)
        cols.append(lmd_beta_from_qforms(q, h, kernel) * lmd_branch_factor(h, model.dim))
    return FeatureMatrix(np.column_stack(cols), LMD, len(models), h=float(h))
