"""Additive multinomial-logistic model on per-class feature columns.

The model is the baseline-category form: with J feature columns and J
classes, scores eta_j(x) = alpha_j + sum_k g_jk(x_k) for j = 1..J-1 and
eta_J = 0, linked to posteriors by softmax. Each g_jk is a penalized
cubic B-spline (P-spline: second-order difference penalty on the
coefficients), centered over the training rows for identifiability.

Fitting is penalized IRLS, cycling over the J-1 score blocks with
step-halving so the penalized deviance never increases. The smoothing
parameter is shared across terms and chosen from a grid by GCV on the
final working least-squares problem. Quasi-complete separation (huge
coefficients) freezes the fit at the current iterate; predictions then
saturate harmlessly.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.interpolate import BSpline

from .errors import BadParameters, DimensionMismatch, KindMismatch, MissingClass
from .features import LMD, FeatureMatrix

DEFAULT_LAMBDA_GRID = tuple(10.0 ** k for k in range(-4, 5))

#: IRLS stopping rule: relative deviance change below this, or 100 sweeps.
IRLS_TOL = 1e-8
IRLS_MAX_ITER = 100

#: Coefficient magnitude beyond which we declare quasi-complete
#: separation and freeze the iterate.
SEPARATION_BOUND = 20.0

_WEIGHT_FLOOR = 1e-10


@dataclass(frozen=True)
class SplineBasis:
    """Cubic B-spline basis on [lo, hi] with interior knots, or a linear
    fallback (two hat functions) for degenerate columns."""

    knots: np.ndarray          # interior knots, strictly increasing
    lo: float
    hi: float
    n_basis: int
    kind: str = "bspline"      # "bspline" | "linear"
    # Basis values / first derivatives at the boundaries, used for
    # linear extrapolation outside [lo, hi].
    lo_row: np.ndarray = None
    lo_deriv: np.ndarray = None
    hi_row: np.ndarray = None
    hi_deriv: np.ndarray = None

    @property
    def degree(self) -> int:
        return 3 if self.kind == "bspline" else 1

    @property
    def linear_fallback(self) -> bool:
        return self.kind == "linear"

    def knot_vector(self) -> np.ndarray:
        k = self.degree
        return np.r_[[self.lo] * (k + 1), self.knots, [self.hi] * (k + 1)]


def _bspline_rows(basis: SplineBasis, x: np.ndarray) -> np.ndarray:
    t = basis.knot_vector()
    return BSpline.design_matrix(x, t, basis.degree, extrapolate=False).toarray()


def _boundary_rows(knots, lo, hi, n_basis):
    """Value and derivative of every basis function at both boundaries."""
    t = np.r_[[lo] * 4, knots, [hi] * 4]
    vals = {lo: np.empty(n_basis), hi: np.empty(n_basis)}
    ders = {lo: np.empty(n_basis), hi: np.empty(n_basis)}
    for i in range(n_basis):
        coef = np.zeros(n_basis)
        coef[i] = 1.0
        spl = BSpline(t, coef, 3, extrapolate=True)
        dspl = spl.derivative()
        for b in (lo, hi):
            vals[b][i] = spl(b)
            ders[b][i] = dspl(b)
    return vals[lo], ders[lo], vals[hi], ders[hi]


def build_basis(feature_column, n_interior_knots: int) -> SplineBasis:
    """Cubic B-spline basis with interior knots at equally spaced quantiles.

    Boundaries are [min, max] of the column extended by 1e-6 * range. A
    column with fewer than ``n_interior_knots + 2`` distinct values falls
    back to a linear two-function basis (flagged via ``kind``).
    """
    if n_interior_knots < 1:
        raise BadParameters("need at least one interior knot")
    col = np.asarray(feature_column, dtype=float)
    distinct = np.unique(col)
    rng_ = distinct[-1] - distinct[0] if distinct.size else 0.0
    if rng_ <= 0:
        v = distinct[0] if distinct.size else 0.0
        return SplineBasis(np.empty(0), v - 0.5, v + 0.5, 2, kind="linear")
    lo = distinct[0] - 1e-6 * rng_
    hi = distinct[-1] + 1e-6 * rng_
    if distinct.size < n_interior_knots + 2:
        return SplineBasis(np.empty(0), lo, hi, 2, kind="linear")

    probs = np.linspace(0.0, 1.0, n_interior_knots + 2)[1:-1]
    knots = np.unique(np.quantile(col, probs))
    knots = knots[(knots > lo) & (knots < hi)]
    if knots.size == 0:
        return SplineBasis(np.empty(0), lo, hi, 2, kind="linear")
    n_basis = knots.size + 4
    lo_row, lo_der, hi_row, hi_der = _boundary_rows(knots, lo, hi, n_basis)
    return SplineBasis(knots, lo, hi, n_basis, "bspline",
                       lo_row, lo_der, hi_row, hi_der)


def basis_matrix(basis: SplineBasis, x) -> np.ndarray:
    """Evaluate the basis at ``x``; outside [lo, hi] each basis function is
    continued linearly, so any fitted smooth extrapolates linearly."""
    x = np.asarray(x, dtype=float)
    if basis.kind == "linear":
        span = basis.hi - basis.lo
        u = (x - basis.lo) / span
        return np.column_stack([1.0 - u, u])
    below = x < basis.lo
    above = x > basis.hi
    B = _bspline_rows(basis, np.clip(x, basis.lo, basis.hi))
    if np.any(below):
        B[below] = basis.lo_row + np.outer(x[below] - basis.lo, basis.lo_deriv)
    if np.any(above):
        B[above] = basis.hi_row + np.outer(x[above] - basis.hi, basis.hi_deriv)
    return B


def _second_difference_penalty(m: int) -> np.ndarray:
    """D2' D2 for m coefficients (zero matrix when m < 3)."""
    if m < 3:
        return np.zeros((m, m))
    D = np.diff(np.eye(m), n=2, axis=0)
    return D.T @ D


def _centering_projection(col_means: np.ndarray) -> np.ndarray:
    """Orthonormal basis of {beta : col_means . beta = 0}."""
    Z = linalg.null_space(col_means[None, :])
    return Z


@dataclass(frozen=True)
class Convergence:
    iterations: int
    deviance: float
    converged: bool
    separated: bool
    small_sample: bool


@dataclass(frozen=True)
class GamModel:
    """Fitted additive logistic model.

    ``coef[j]`` stacks the (already centered) spline coefficients of all
    J smooth terms of score j; ``offsets`` give the column slice of term
    k. Basis k is shared by all scores since it depends only on feature
    column k.
    """

    class_count: int
    feature_kind: str
    feature_h: float | None
    bases: list
    coef: np.ndarray           # (J-1, total basis size)
    intercepts: np.ndarray     # (J-1,)
    offsets: np.ndarray        # (J+1,) column offsets into coef
    lam: float
    gcv_table: dict
    convergence: Convergence

    def term_coef(self, j: int, k: int) -> np.ndarray:
        """Spline coefficients of g_{jk} (score j in 1..J-1, feature k in 1..J)."""
        return self.coef[j - 1, self.offsets[k - 1]:self.offsets[k]]


def _check_labels(labels, J: int | None):
    y = np.asarray(labels)
    if y.ndim != 1:
        raise BadParameters("labels must be a 1-d integer vector")
    y = y.astype(int)
    if J is None:
        J = int(y.max()) if y.size else 0
    if J < 2:
        raise MissingClass("need at least two classes")
    present = np.unique(y)
    expected = np.arange(1, J + 1)
    if not np.array_equal(present, expected):
        missing = sorted(set(expected) - set(present))
        raise MissingClass(f"labels must cover 1..{J}; missing {missing}")
    return y, J


def _softmax_probs(eta: np.ndarray) -> np.ndarray:
    """Posteriors from the (n, J-1) score matrix with implicit zero baseline."""
    full = np.concatenate([eta, np.zeros((eta.shape[0], 1))], axis=1)
    full -= full.max(axis=1, keepdims=True)
    e = np.exp(full)
    return e / e.sum(axis=1, keepdims=True)


def _deviance(probs: np.ndarray, y: np.ndarray) -> float:
    p = probs[np.arange(len(y)), y - 1]
    return -2.0 * float(np.sum(np.log(np.maximum(p, 1e-300))))


def _solve_spd(A: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    ridge = 0.0
    base = max(np.mean(np.diag(A)), 1.0) * 1e-12
    while True:
        try:
            c = linalg.cho_factor(A + ridge * np.eye(A.shape[0]), lower=True)
            return linalg.cho_solve(c, rhs)
        except linalg.LinAlgError:
            ridge = base if ridge == 0.0 else 10.0 * ridge


class _Design:
    """Projected design and penalty shared across lambda values."""

    def __init__(self, F: np.ndarray, bases: list):
        n = F.shape[0]
        blocks, self.Z, pen = [], [], []
        for k, basis in enumerate(bases):
            B = basis_matrix(basis, F[:, k])
            means = B.mean(axis=0)
            Z = _centering_projection(means)
            blocks.append(B @ Z)
            self.Z.append(Z)
            pen.append(Z.T @ _second_difference_penalty(B.shape[1]) @ Z)
        self.X = np.concatenate([np.ones((n, 1))] + blocks, axis=1)
        widths = [1] + [b.shape[1] for b in blocks]
        self.col_offsets = np.cumsum([0] + widths)
        p = self.X.shape[1]
        self.S0 = np.zeros((p, p))
        for k, P in enumerate(pen):
            sl = slice(self.col_offsets[k + 1], self.col_offsets[k + 2])
            self.S0[sl, sl] = P

    def unproject(self, theta: np.ndarray):
        """Map a projected score-block solution back to per-term spline
        coefficients; returns (intercept, list of coefficient vectors)."""
        coefs = []
        for k, Z in enumerate(self.Z):
            sl = slice(self.col_offsets[k + 1], self.col_offsets[k + 2])
            coefs.append(Z @ theta[sl])
        return float(theta[0]), coefs


def _max_abs_coef(design: _Design, theta: np.ndarray) -> float:
    worst = 0.0
    for j in range(theta.shape[0]):
        alpha, coefs = design.unproject(theta[j])
        worst = max(worst, abs(alpha), *(float(np.max(np.abs(c))) if c.size else 0.0
                                         for c in coefs))
    return worst


def _irls(design: _Design, y: np.ndarray, J: int, lam: float, theta0=None):
    """Penalized IRLS for one lambda. Returns (theta, info dict)."""
    X, S0 = design.X, design.S0
    n, p = X.shape
    theta = np.zeros((J - 1, p)) if theta0 is None else theta0.copy()
    onehot = np.equal.outer(y, np.arange(1, J)).astype(float)

    def objective(th):
        probs = _softmax_probs(X @ th.T)
        dev = _deviance(probs, y)
        pen = lam * float(np.einsum("jp,pq,jq->", th, S0, th))
        return dev, dev + pen, probs

    dev, obj, probs = objective(theta)
    separated = False
    converged = False
    iterations = 0
    for it in range(1, IRLS_MAX_ITER + 1):
        iterations = it
        proposal = theta.copy()
        eta = X @ proposal.T
        for j in range(J - 1):
            pj = probs[:, j]
            w = np.maximum(pj * (1.0 - pj), _WEIGHT_FLOOR)
            z = eta[:, j] + (onehot[:, j] - pj) / w
            XtW = X.T * w
            proposal[j] = _solve_spd(XtW @ X + lam * S0, XtW @ z)
            # refresh probabilities so later blocks see this update
            eta = X @ proposal.T
            probs = _softmax_probs(eta)

        new_dev, new_obj, new_probs = objective(proposal)
        direction = proposal - theta
        step = 1.0
        while new_obj > obj and step > 2.0 ** -16:
            step *= 0.5
            proposal = theta + step * direction
            new_dev, new_obj, new_probs = objective(proposal)
        if new_obj > obj:
            # No improving step: keep the previous iterate.
            probs = _softmax_probs(X @ theta.T)
            converged = True
            break
        rel_change = abs(obj - new_obj) / (abs(new_obj) + 0.1)
        theta, dev, obj, probs = proposal, new_dev, new_obj, new_probs
        if _max_abs_coef(design, theta) > SEPARATION_BOUND:
            separated = True
            break
        if rel_change < IRLS_TOL:
            converged = True
            break

    # Working least-squares residuals and effective dof at the solution,
    # for GCV.
    eta = X @ theta.T
    rss = 0.0
    edf = 0.0
    for j in range(J - 1):
        pj = probs[:, j]
        w = np.maximum(pj * (1.0 - pj), _WEIGHT_FLOOR)
        z = eta[:, j] + (onehot[:, j] - pj) / w
        resid = z - eta[:, j]
        rss += float(np.sum(w * resid * resid))
        XtWX = (X.T * w) @ X
        edf += float(np.trace(_solve_spd(XtWX + lam * S0, XtWX)))
    N = n * (J - 1)
    denom = N - edf
    gcv = N * rss / (denom * denom) if denom > 1.0 else np.inf
    return theta, {
        "deviance": dev, "iterations": iterations, "converged": converged,
        "separated": separated, "gcv": gcv,
    }


def default_knot_count(n: int) -> int:
    return 8 if n >= 200 else max(2, n // 25)


def fit(features: FeatureMatrix, labels, priors=None,
        lambda_grid=DEFAULT_LAMBDA_GRID, n_interior_knots: int | None = None) -> GamModel:
    """Fit the additive logistic model on a feature matrix.

    ``priors``, when given, must be a length-J positive vector; intercepts
    are shifted by the log-ratio against the training class proportions.
    The smoothing parameter is selected from ``lambda_grid`` by GCV (ties
    to the smaller value).
    """
    F = np.asarray(features.values, dtype=float)
    if not np.all(np.isfinite(F)):
        raise BadParameters("feature matrix contains non-finite values")
    J = features.class_count
    if F.shape[1] != J:
        raise DimensionMismatch(
            f"feature matrix has {F.shape[1]} columns for {J} classes")
    y, J = _check_labels(labels, J)
    if len(y) != F.shape[0]:
        raise DimensionMismatch("features and labels disagree on row count")
    n = F.shape[0]
    small_sample = n < 10 * J

    if n_interior_knots is None:
        n_interior_knots = default_knot_count(n)
    bases = [build_basis(F[:, k], n_interior_knots) for k in range(J)]
    design = _Design(F, bases)

    best = None
    gcv_table = {}
    warm = None
    for lam in sorted(float(v) for v in lambda_grid):
        theta, info = _irls(design, y, J, lam, theta0=warm)
        warm = None if info["separated"] else theta
        gcv_table[lam] = info["gcv"]
        if best is None or info["gcv"] < best[2]["gcv"]:
            best = (lam, theta, info)
    lam, theta, info = best

    intercepts = np.empty(J - 1)
    coef_rows = []
    for j in range(J - 1):
        alpha, coefs = design.unproject(theta[j])
        intercepts[j] = alpha
        coef_rows.append(np.concatenate(coefs) if coefs else np.empty(0))
    coef = np.vstack(coef_rows)
    offsets = np.cumsum([0] + [b.n_basis for b in bases])

    if priors is not None:
        priors = np.asarray(priors, dtype=float)
        if priors.shape != (J,) or np.any(priors <= 0):
            raise BadParameters("priors must be a positive length-J vector")
        priors = priors / priors.sum()
        trained = np.bincount(y, minlength=J + 1)[1:] / n
        intercepts += (np.log(priors[:-1] / trained[:-1])
                       - np.log(priors[-1] / trained[-1]))

    conv = Convergence(info["iterations"], info["deviance"], info["converged"],
                       info["separated"], small_sample)
    return GamModel(J, features.kind, features.h, bases, coef, intercepts,
                    offsets, lam, gcv_table, conv)


def _scores(model: GamModel, F: np.ndarray) -> np.ndarray:
    n = F.shape[0]
    eta = np.tile(model.intercepts, (n, 1))
    for k, basis in enumerate(model.bases):
        B = basis_matrix(basis, F[:, k])
        block = model.coef[:, model.offsets[k]:model.offsets[k + 1]]
        eta += B @ block.T
    return eta


def _check_features(model: GamModel, features: FeatureMatrix) -> np.ndarray:
    if features.kind != model.feature_kind:
        raise KindMismatch(
            f"model was fit on {model.feature_kind!r} features, got {features.kind!r}")
    if features.kind == LMD and features.h != model.feature_h:
        raise KindMismatch(
            f"model was fit at h={model.feature_h}, got h={features.h}")
    if features.class_count != model.class_count:
        raise DimensionMismatch("feature matrix class count differs from model")
    return np.asarray(features.values, dtype=float)


def predict_proba(model: GamModel, features: FeatureMatrix) -> np.ndarray:
    """Posterior probability matrix (rows sum to one)."""
    F = _check_features(model, features)
    return _softmax_probs(_scores(model, F))


def predict_class(model: GamModel, features: FeatureMatrix) -> np.ndarray:
    """Class labels in 1..J; ties go to the lowest class index."""
    probs = predict_proba(model, features)
    return np.argmax(probs, axis=1) + 1
