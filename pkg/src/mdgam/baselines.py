"""Reference classifiers: LDA, QDA and k-nearest neighbours.

LDA/QDA are Gaussian discriminants built on the same scatter machinery
as the main classifiers (including the ridge fallback for singular
covariances and optional diagonal or robust MCD estimation). kNN uses
Euclidean distance with k chosen by 5-fold cross-validation over the
odd values 1, 3, ..., 21; vote ties go to the smaller label.
"""

from dataclasses import dataclass

import numpy as np

from . import estimators
from .errors import BadK, MissingClass
from .estimators import ScatterModel, fit_scatter, invert_scatter
from .features import squared_mahalanobis
from .seeds import derive_rng
from .simgen import Dataset

KNN_GRID = tuple(range(1, 22, 2))
KNN_FOLDS = 5


def _classes(train: Dataset):
    J = train.class_count
    present = np.unique(train.labels)
    if not np.array_equal(present, np.arange(1, J + 1)):
        raise MissingClass(f"training labels must cover 1..{J}")
    return J, [train.class_rows(j) for j in range(1, J + 1)]


@dataclass(frozen=True)
class LdaModel:
    means: np.ndarray          # (J, d)
    pooled_inv: np.ndarray
    log_priors: np.ndarray


def lda_fit(train: Dataset, scatter_mode: str = estimators.MOMENT,
            mcd_coverage: float = 0.75, seed: int = 0) -> LdaModel:
    """Gaussian discriminant with a shared covariance (size-weighted pool
    of the per-class scatters)."""
    J, class_rows = _classes(train)
    n = train.n
    means = np.empty((J, train.dim))
    pooled = np.zeros((train.dim, train.dim))
    for j, rows in enumerate(class_rows):
        model = fit_scatter(rows, scatter_mode, class_id=j + 1,
                            coverage=mcd_coverage, seed=seed)
        means[j] = model.location
        pooled += len(rows) / n * model.scatter
    inv, _, _ = invert_scatter(pooled)
    priors = np.array([len(r) / n for r in class_rows])
    return LdaModel(means, inv, np.log(priors))


def lda_predict(model: LdaModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    lin = X @ model.pooled_inv @ model.means.T
    const = -0.5 * np.einsum("jk,kl,jl->j", model.means, model.pooled_inv, model.means)
    scores = lin + const + model.log_priors
    return np.argmax(scores, axis=1) + 1


@dataclass(frozen=True)
class QdaModel:
    models: tuple              # per-class ScatterModel
    log_priors: np.ndarray


def qda_fit(train: Dataset, scatter_mode: str = estimators.MOMENT,
            mcd_coverage: float = 0.75, seed: int = 0) -> QdaModel:
    """Gaussian discriminant with per-class covariance."""
    J, class_rows = _classes(train)
    models = tuple(fit_scatter(rows, scatter_mode, class_id=j + 1,
                               coverage=mcd_coverage, seed=seed)
                   for j, rows in enumerate(class_rows))
    priors = np.array([len(r) / train.n for r in class_rows])
    return QdaModel(models, np.log(priors))


def qda_predict(model: QdaModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    scores = np.column_stack([
        -0.5 * squared_mahalanobis(X, m) - 0.5 * m.log_det + lp
        for m, lp in zip(model.models, model.log_priors)])
    return np.argmax(scores, axis=1) + 1


@dataclass(frozen=True)
class KnnModel:
    rows: np.ndarray
    labels: np.ndarray
    k: int
    class_count: int
    cv_errors: dict


def _sq_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    aa = np.einsum("ij,ij->i", A, A)
    bb = np.einsum("ij,ij->i", B, B)
    return np.maximum(aa[:, None] - 2.0 * (A @ B.T) + bb[None, :], 0.0)


def _vote(dist: np.ndarray, labels: np.ndarray, k: int, J: int) -> np.ndarray:
    order = np.argsort(dist, axis=1, kind="stable")[:, :k]
    votes = labels[order]
    counts = np.stack([np.sum(votes == j, axis=1) for j in range(1, J + 1)], axis=1)
    return np.argmax(counts, axis=1) + 1    # first max = smallest label on ties


def _stratified_folds(labels: np.ndarray, n_folds: int, rng) -> np.ndarray:
    fold = np.empty(len(labels), dtype=int)
    for j in np.unique(labels):
        idx = np.flatnonzero(labels == j)
        idx = idx[rng.permutation(len(idx))]
        fold[idx] = np.arange(len(idx)) % n_folds
    return fold


def knn_fit(train: Dataset, k: int | None = None, seed: int = 0) -> KnnModel:
    """Store the training set; choose k by stratified 5-fold CV when not given."""
    J, class_rows = _classes(train)
    min_class = min(len(r) for r in class_rows)
    if k is not None:
        if not 1 <= k <= min_class:
            raise BadK(f"k must lie in [1, {min_class}], got {k}")
        return KnnModel(train.rows, train.labels, int(k), J, {})

    grid = [k_ for k_ in KNN_GRID if k_ <= min_class]
    if not grid:
        grid = [1]
    cv_errors = {}
    if len(grid) > 1:
        rng = derive_rng(seed, "knn-cv")
        fold = _stratified_folds(train.labels, KNN_FOLDS, rng)
        err = np.zeros(len(grid))
        weight = 0
        for f in range(KNN_FOLDS):
            hold = fold == f
            if not np.any(hold) or np.all(hold):
                continue
            dist = _sq_distances(train.rows[hold], train.rows[~hold])
            for gi, k_ in enumerate(grid):
                pred = _vote(dist, train.labels[~hold], k_, J)
                err[gi] += np.sum(pred != train.labels[hold])
            weight += np.sum(hold)
        cv_errors = {k_: float(e / weight) for k_, e in zip(grid, err)}
        best = grid[int(np.argmin(err))]   # first minimum = smallest k
    else:
        best = grid[0]
    return KnnModel(train.rows, train.labels, best, J, cv_errors)


def knn_predict(model: KnnModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    dist = _sq_distances(X, model.rows)
    return _vote(dist, model.labels, model.k, model.class_count)
