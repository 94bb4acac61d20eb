"""Per-class location and scatter estimation.

Four estimation modes are supported: plain moment estimates, the
diagonal of the moment scatter, the identity matrix, and a FAST-MCD
style robust estimate. Covariances are normalized by 1/n (not 1/(n-1))
so that the location-shift identity

    (x - mean)' S^{-1} (x - mean) = (1/n) sum_i (x - x_i)' S^{-1} (x - x_i) - d

holds exactly; several downstream computations rely on it.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.stats import chi2

from .errors import BadParameters, NotSymmetric, TooFewRows
from .seeds import derive_rng

MOMENT = "moment"
DIAGONAL = "diagonal"
IDENTITY = "identity"
MCD = "mcd"

SCATTER_MODES = (MOMENT, DIAGONAL, IDENTITY, MCD)

#: Variance floor for degenerate coordinates in diagonal mode.
EPS_VAR = 1e-12

#: FAST-MCD parameters (number of random starts, C-steps per start).
MCD_STARTS = 500
MCD_MAX_CSTEPS = 20


@dataclass(frozen=True)
class ScatterModel:
    """Location vector, scatter matrix and its inverse for one class.

    ``log_det`` is the natural log determinant of ``scatter`` after any
    ridge applied during inversion; ``ridge`` is the ridge actually used
    (0 when the Cholesky factorization succeeded directly).
    """

    class_id: int
    location: np.ndarray
    scatter: np.ndarray
    scatter_inv: np.ndarray
    mode: str
    log_det: float
    ridge: float = 0.0
    clamped: bool = False
    converged: bool = True

    @property
    def dim(self) -> int:
        return self.location.shape[0]


def _as_matrix(rows) -> np.ndarray:
    X = np.asarray(rows, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise BadParameters(f"observation matrix must be 2-d, got ndim={X.ndim}")
    return X


def invert_scatter(scatter) -> tuple[np.ndarray, float, float]:
    """Invert a symmetric scatter matrix via Cholesky with a ridge fallback.

    Returns ``(inverse, log_det, ridge_used)``. If the factorization
    fails, a ridge lambda*I is added, with lambda doubling from
    1e-8 * trace/d until it succeeds; the log determinant refers to the
    ridged matrix.
    """
    S = np.asarray(scatter, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise NotSymmetric(f"scatter must be square, got shape {S.shape}")
    scale = np.max(np.abs(S)) if S.size else 0.0
    if not np.allclose(S, S.T, atol=1e-10 * max(scale, 1.0)):
        raise NotSymmetric("scatter matrix is not symmetric")
    S = 0.5 * (S + S.T)
    d = S.shape[0]

    lam = 0.0
    step = max(1e-8 * np.trace(S) / d, 1e-12)
    while True:
        try:
            c, low = linalg.cho_factor(S + lam * np.eye(d), lower=True)
        except linalg.LinAlgError:
            lam = step if lam == 0.0 else 2.0 * lam
            continue
        diag = np.diag(c)
        if np.all(diag > 0) and np.all(np.isfinite(diag)):
            inv = linalg.cho_solve((c, low), np.eye(d))
            log_det = 2.0 * float(np.sum(np.log(diag)))
            return 0.5 * (inv + inv.T), log_det, lam
        lam = step if lam == 0.0 else 2.0 * lam


def fit_moment(rows, class_id: int = 0) -> ScatterModel:
    """Sample mean and 1/n-normalized sample covariance."""
    X = _as_matrix(rows)
    n, d = X.shape
    if n < 2:
        raise TooFewRows(f"moment estimate needs at least 2 rows, got {n}")
    loc = X.mean(axis=0)
    Xc = X - loc
    S = Xc.T @ Xc / n
    inv, log_det, ridge = invert_scatter(S)
    return ScatterModel(class_id, loc, S, inv, MOMENT, log_det, ridge=ridge)


def fit_diagonal(rows, class_id: int = 0) -> ScatterModel:
    """Diagonal of the moment scatter; zero variances clamped to EPS_VAR."""
    X = _as_matrix(rows)
    n, d = X.shape
    if n < 2:
        raise TooFewRows(f"diagonal estimate needs at least 2 rows, got {n}")
    loc = X.mean(axis=0)
    var = np.mean((X - loc) ** 2, axis=0)
    clamped = bool(np.any(var < EPS_VAR))
    var = np.maximum(var, EPS_VAR)
    S = np.diag(var)
    inv = np.diag(1.0 / var)
    log_det = float(np.sum(np.log(var)))
    return ScatterModel(class_id, loc, S, inv, DIAGONAL, log_det, clamped=clamped)


def fit_identity(rows, class_id: int = 0) -> ScatterModel:
    """Sample mean with identity scatter (Euclidean geometry)."""
    X = _as_matrix(rows)
    n, d = X.shape
    if n < 1:
        raise TooFewRows("identity estimate needs at least 1 row")
    eye = np.eye(d)
    return ScatterModel(class_id, X.mean(axis=0), eye, eye.copy(), IDENTITY, 0.0)


def _subset_estimates(X: np.ndarray, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sub = X[idx]
    loc = sub.mean(axis=0)
    Xc = sub - loc
    return loc, Xc.T @ Xc / len(sub)


def _slogdet(S: np.ndarray) -> float:
    sign, val = np.linalg.slogdet(S)
    return val if sign > 0 else -np.inf


def c_step(X: np.ndarray, support_size: int, location: np.ndarray, scatter: np.ndarray):
    """One concentration step: keep the ``support_size`` points closest in
    Mahalanobis distance under (location, scatter), re-estimate.

    Returns ``(support_indices, location, scatter, log_det)``.
    """
    inv, _, _ = invert_scatter(scatter)
    Xc = X - location
    dist = np.einsum("ij,jk,ik->i", Xc, inv, Xc)
    support = np.argsort(dist, kind="stable")[:support_size]
    loc, S = _subset_estimates(X, support)
    return support, loc, S, _slogdet(S)


def mcd_consistency_factor(coverage: float, d: int) -> float:
    """Consistency rescaling of the covered-subset covariance at the normal model."""
    if coverage >= 1.0:
        return 1.0
    q = chi2.ppf(coverage, d)
    return coverage / chi2.cdf(q, d + 2)


def fit_mcd(rows, coverage: float = 0.75, class_id: int = 0, seed: int = 0) -> ScatterModel:
    """FAST-MCD location/scatter from the covered subset of minimum determinant.

    ``MCD_STARTS`` random (d+1)-subsets are each refined by C-steps until
    the covered-subset determinant stops decreasing (at most
    ``MCD_MAX_CSTEPS`` steps); the best solution over all starts is kept.
    The covered-subset covariance is rescaled by the chi-square
    consistency factor, so ``coverage=1.0`` reproduces the moment estimate.
    """
    X = _as_matrix(rows)
    n, d = X.shape
    if not 0.5 < coverage <= 1.0:
        raise BadParameters(f"coverage must be in (0.5, 1], got {coverage}")
    m = int(np.ceil(coverage * n))
    if m < d + 1:
        raise TooFewRows(f"need coverage*n >= d+1 (got {m} < {d + 1})")

    if m >= n:
        # Full coverage: single "subset" is the data itself, no C-steps.
        loc, S = _subset_estimates(X, np.arange(n))
        inv, log_det, ridge = invert_scatter(S)
        return ScatterModel(class_id, loc, S, inv, MCD, log_det, ridge=ridge)

    best = None  # (log_det, loc, S, converged)
    for start in range(MCD_STARTS):
        rng = derive_rng(seed, "mcd-start", start)
        idx = rng.choice(n, size=d + 1, replace=False)
        loc, S = _subset_estimates(X, idx)
        # Grow degenerate initial subsets until the scatter has full rank.
        while _slogdet(S) == -np.inf and len(idx) < n:
            extra = rng.choice(np.setdiff1d(np.arange(n), idx), size=1)
            idx = np.concatenate([idx, extra])
            loc, S = _subset_estimates(X, idx)

        # First concentration maps the elemental subset onto an m-subset;
        # only m-subset determinants are comparable across steps.
        _, loc, S, det = c_step(X, m, loc, S)
        converged = False
        for _ in range(MCD_MAX_CSTEPS - 1):
            if det == -np.inf:
                # Exactly singular covered subset: cannot improve further.
                converged = True
                break
            _, new_loc, new_S, new_det = c_step(X, m, loc, S)
            if new_det >= det:
                converged = True
                break
            loc, S, det = new_loc, new_S, new_det
        if best is None or det < best[0]:
            best = (det, loc, S, converged)

    _, loc, S, converged = best
    S = S * mcd_consistency_factor(coverage, d)
    inv, log_det, ridge = invert_scatter(S)
    return ScatterModel(class_id, loc, S, inv, MCD, log_det, ridge=ridge, converged=converged)


_FITTERS = {
    MOMENT: fit_moment,
    DIAGONAL: fit_diagonal,
    IDENTITY: fit_identity,
    MCD: fit_mcd,
}


def fit_scatter(rows, mode: str, class_id: int = 0, coverage: float = 0.75,
                seed: int = 0) -> ScatterModel:
    """Dispatch to the estimator for ``mode``."""
    if mode not in _FITTERS:
        raise BadParameters(f"unknown scatter mode {mode!r}; expected one of {SCATTER_MODES}")
    if mode == MCD:
        return fit_mcd(rows, coverage=coverage, class_id=class_id, seed=seed)
    return _FITTERS[mode](rows, class_id=class_id)
