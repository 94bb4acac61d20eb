"""The MD and LMD classifiers.

Pipeline: estimate per-class location/scatter, extract MD or LMD
features on the training rows, fit the additive logistic model, and
classify new points by the highest estimated posterior. For LMD the
localization parameter h is chosen from a data-driven geometric grid by
minimizing out-of-bag bootstrap misclassification.

When the dimension exceeds the class sample sizes, sample covariances
are singular; the high-dimensional variant uses the identity matrix or
the diagonals instead (whichever has lower out-of-bag error), works
with squared distances scaled by 1/d, and drops the dimension-dependent
kernel normalization, which would underflow.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import estimators, gam
from .errors import (AllResamplesSkipped, BadParameters, ClassTooSmall,
                     DimensionMismatch, MissingClass)
from .estimators import ScatterModel, fit_scatter
from .features import (LMD, MD, MD_SQUARED_SCALED, FeatureMatrix,
                       KernelProfile, flat_gaussian_profile, gaussian_profile,
                       kernel_profile_from_kind, lmd_branch_factor,
                       md_features, pairwise_qforms, squared_mahalanobis)
from .gam import DEFAULT_LAMBDA_GRID, GamModel
from .seeds import derive_rng, derive_seed
from .simgen import Dataset

#: Bootstrap resamples used to pick identity vs diagonal in HDLSS mode.
HDLSS_MODE_B = 20

#: Largest exponent h^-(d+2) we allow before clamping the grid start; the
#: h <= 1 branch would overflow double precision beyond exp(700).
_BRANCH_LOG_LIMIT = 700.0


@dataclass(frozen=True)
class TrainConfig:
    """Training options for both classifiers.

    ``h_percentile``/``h_shrink``/``k0``/``r_stop`` parameterize the
    localization grid: the start is shrink times the given percentile of
    the pooled within-class pairwise distances, the grid grows
    geometrically by k0 and stops once the empirical LMD correlates with
    the shifted squared MD beyond r_stop.
    """

    scatter_mode: str = "moment"      # moment | diagonal | identity | mcd | auto
    feature: str = "md"               # md | lmd
    h_percentile: float = 5.0
    h_shrink: float = 1.0 / 3.0
    k0: float = 1.5
    r_stop: float = 0.95
    max_grid: int = 25
    bootstrap_b: int = 100
    seed: int = 0
    mcd_coverage: float = 0.75
    n_interior_knots: int | None = None
    lambda_grid: tuple = DEFAULT_LAMBDA_GRID
    priors: tuple | None = None

    def __post_init__(self):
        if self.bootstrap_b < 1:
            raise BadParameters("bootstrap_b must be >= 1")
        if self.k0 <= 1:
            raise BadParameters("k0 must exceed 1")
        if not 0 < self.r_stop < 1:
            raise BadParameters("r_stop must lie in (0, 1)")
        if not 0 < self.h_percentile < 100:
            raise BadParameters("h_percentile must lie in (0, 100)")
        if self.h_shrink <= 0:
            raise BadParameters("h_shrink must be positive")
        if self.feature not in (MD, LMD):
            raise BadParameters(f"unknown feature kind {self.feature!r}")
        if self.scatter_mode not in estimators.SCATTER_MODES + ("auto",):
            raise BadParameters(f"unknown scatter mode {self.scatter_mode!r}")


@dataclass(frozen=True)
class FittedClassifier:
    models: tuple
    per_class_rows: tuple | None     # original training rows by class (LMD)
    feature_kind: str                # md | lmd | md2_scaled
    h: float | None
    gam: GamModel
    config: TrainConfig
    kernel_kind: str | None
    hdlss: bool
    diagnostics: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.models[0].dim

    @property
    def class_count(self) -> int:
        return len(self.models)

    def kernel(self) -> KernelProfile | None:
        return None if self.kernel_kind is None else kernel_profile_from_kind(self.kernel_kind)


def _split_classes(train: Dataset) -> list[np.ndarray]:
    J = train.class_count
    present = np.unique(train.labels)
    if not np.array_equal(present, np.arange(1, J + 1)):
        raise MissingClass(f"training labels must cover 1..{J}")
    return [train.class_rows(j) for j in range(1, J + 1)]


def _min_class_size(mode: str, d: int) -> int:
    if mode in (estimators.MOMENT, estimators.MCD):
        return max(d + 2, 10)
    if mode == estimators.DIAGONAL:
        return 2
    return 1


def _fit_scatters(class_rows, mode: str, config: TrainConfig) -> list[ScatterModel]:
    d = class_rows[0].shape[1]
    floor = _min_class_size(mode, d)
    models = []
    for j, rows in enumerate(class_rows, start=1):
        if len(rows) < floor:
            raise ClassTooSmall(
                f"class {j} has {len(rows)} rows; mode {mode!r} needs >= {floor}")
        models.append(fit_scatter(rows, mode, class_id=j,
                                  coverage=config.mcd_coverage,
                                  seed=derive_seed(config.seed, "mcd", j)))
    return models


def _default_kernel(d: int, hdlss: bool) -> KernelProfile:
    return flat_gaussian_profile() if hdlss else gaussian_profile(d)


def _md_training_features(X, models, hdlss: bool) -> FeatureMatrix:
    if not hdlss:
        return md_features(X, models)
    d = models[0].dim
    cols = [squared_mahalanobis(X, m) / d for m in models]
    return FeatureMatrix(np.column_stack(cols), MD_SQUARED_SCALED, len(models))


def _lmd_features_from_qforms(qforms, counts, h, kernel, d, hdlss) -> np.ndarray:
    """LMD feature columns from cached pair matrices.

    ``qforms[j]`` holds quadratic forms of every evaluation row against
    the distinct class-j rows; ``counts[j]`` are the multiplicities of
    those rows in the (re)sample.
    """
    factor = lmd_branch_factor(h, d) / (d if hdlss else 1.0)
    cols = []
    for q, c in zip(qforms, counts):
        w = kernel.psi(q / (h * h)) * q
        cols.append((w @ c) / c.sum() * factor)
    return np.column_stack(cols)


def _lmd_feature_matrix(X, class_rows, models, h, kernel, hdlss) -> FeatureMatrix:
    d = models[0].dim
    qforms = [pairwise_qforms(X, rows, m.scatter_inv)
              for rows, m in zip(class_rows, models)]
    counts = [np.ones(len(rows)) for rows in class_rows]
    values = _lmd_features_from_qforms(qforms, counts, h, kernel, d, hdlss)
    return FeatureMatrix(values, LMD, len(models), h=float(h))


def build_h_grid(train: Dataset, models, kernel: KernelProfile,
                 config: TrainConfig | None = None) -> np.ndarray:
    """Geometric grid of localization parameters.

    The start is shrink * (percentile of pooled within-class pairwise
    Mahalanobis distances); successive values multiply by k0 until the
    own-class LMD values across all training rows correlate with
    (squared MD + d) beyond r_stop, capped at ``max_grid`` points. All
    pairwise distances zero degenerates to the single-point grid {1}.
    """
    config = config or TrainConfig()
    class_rows = _split_classes(train)
    d = train.dim

    within_q = []   # per class: pairwise quadratic forms among own rows
    pooled = []
    for rows, model in zip(class_rows, models):
        if len(rows) < 2:
            within_q.append(np.zeros((len(rows), len(rows))))
            continue
        q = pairwise_qforms(rows, rows, model.scatter_inv)
        within_q.append(q)
        iu = np.triu_indices(len(rows), k=1)
        pooled.append(np.sqrt(q[iu]))
    pooled = np.concatenate(pooled) if pooled else np.empty(0)
    if pooled.size == 0 or np.all(pooled == 0):
        return np.array([1.0])

    h1 = config.h_shrink * float(np.percentile(pooled, config.h_percentile))
    if h1 <= 0:
        positive = pooled[pooled > 0]
        h1 = config.h_shrink * float(positive.min())
    # Keep the h <= 1 branch factor h^-(d+2) representable.
    h_floor = math.exp(-_BRANCH_LOG_LIMIT / (d + 2))
    h1 = max(h1, h_floor)

    # Own-class shifted squared MDs, the large-h reference signal.
    reference = np.concatenate([
        squared_mahalanobis(rows, model) + d
        for rows, model in zip(class_rows, models)])

    grid = []
    h = h1
    for _ in range(config.max_grid):
        grid.append(h)
        own = np.concatenate([
            np.mean(kernel.psi(q / (h * h)) * q, axis=1) if q.size else np.zeros(q.shape[0])
            for q in within_q])
        with np.errstate(invalid="ignore"):
            corr = np.corrcoef(own, reference)[0, 1]
        if np.isfinite(corr) and corr > config.r_stop:
            break
        h *= config.k0
    return np.asarray(grid)


def _stratified_resample(class_sizes, rng) -> tuple[np.ndarray, np.ndarray]:
    """Within-class bootstrap resample over pooled row indices.

    Returns (resampled row indices with multiplicity, out-of-bag indices).
    """
    take, oob = [], []
    start = 0
    for n_j in class_sizes:
        idx = rng.integers(0, n_j, size=n_j)
        take.append(start + idx)
        mask = np.ones(n_j, dtype=bool)
        mask[np.unique(idx)] = False
        oob.append(start + np.flatnonzero(mask))
        start += n_j
    return np.concatenate(take), np.concatenate(oob)


def _fit_gam_on(features: FeatureMatrix, labels, config: TrainConfig) -> GamModel:
    return gam.fit(features, labels, priors=config.priors,
                   lambda_grid=config.lambda_grid,
                   n_interior_knots=config.n_interior_knots)


def bootstrap_select_h(train: Dataset, grid, config: TrainConfig,
                       scatter_mode: str | None = None, hdlss: bool = False,
                       kernel: KernelProfile | None = None):
    """Pick h from ``grid`` by mean out-of-bag bootstrap misclassification.

    For every resample (stratified within class, with replacement) and
    every h, an LMD classifier is fit on the resample and scored on the
    out-of-bag rows. Returns ``(h_best, mean_errors, n_skipped)``; ties
    go to the smaller h. Deterministic given ``config.seed``.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise BadParameters("localization grid is empty")
    if grid.size == 1:
        return float(grid[0]), {float(grid[0]): math.nan}, 0

    mode = scatter_mode or config.scatter_mode
    d = train.dim
    kernel = kernel or _default_kernel(d, hdlss)
    class_rows = _split_classes(train)
    sizes = [len(r) for r in class_rows]
    labels = np.concatenate([np.full(n_j, j + 1) for j, n_j in enumerate(sizes)])
    rows = np.concatenate(class_rows, axis=0)
    bounds = np.cumsum([0] + sizes)

    err_sums = np.zeros(grid.size)
    used = 0
    skipped = 0
    for b in range(config.bootstrap_b):
        rng = derive_rng(config.seed, "boot", b)
        take, oob = _stratified_resample(sizes, rng)
        if oob.size == 0:
            skipped += 1
            continue
        # Multiplicity of each distinct training row in this resample.
        counts_all = np.bincount(take, minlength=len(rows)).astype(float)
        boot_class_rows = [rows[take[(take >= bounds[j]) & (take < bounds[j + 1])]]
                           for j in range(len(sizes))]
        models = _fit_scatters(boot_class_rows, mode,
                               replace(config, seed=derive_seed(config.seed, "boot-scatter", b)))
        qforms = [pairwise_qforms(rows, rows[bounds[j]:bounds[j + 1]], m.scatter_inv)
                  for j, m in enumerate(models)]
        counts = [counts_all[bounds[j]:bounds[j + 1]] for j in range(len(sizes))]
        for gi, h in enumerate(grid):
            values = _lmd_features_from_qforms(qforms, counts, h, kernel, d, hdlss)
            feats = FeatureMatrix(values[take], LMD, len(sizes), h=float(h))
            model = _fit_gam_on(feats, labels[take], config)
            oob_feats = FeatureMatrix(values[oob], LMD, len(sizes), h=float(h))
            pred = gam.predict_class(model, oob_feats)
            err_sums[gi] += float(np.mean(pred != labels[oob]))
        used += 1

    if used == 0:
        raise AllResamplesSkipped("every bootstrap resample had an empty out-of-bag set")
    means = err_sums / used
    best = int(np.argmin(means))    # argmin takes the first (smallest h) on ties
    table = {float(h): float(e) for h, e in zip(grid, means)}
    return float(grid[best]), table, skipped


def _resolved_mode(config: TrainConfig, train: Dataset) -> tuple[str, bool]:
    """Resolve 'auto' into a concrete plan: (mode or 'hdlss', hdlss flag)."""
    if config.scatter_mode != "auto":
        return config.scatter_mode, False
    max_class = max(len(r) for r in _split_classes(train))
    if train.dim > max_class:
        return "hdlss", True
    return estimators.MOMENT, False


def fit_md(train: Dataset, config: TrainConfig | None = None,
           scatter_mode: str | None = None, hdlss: bool = False) -> FittedClassifier:
    """Fit the Mahalanobis-distance classifier."""
    config = config or TrainConfig()
    mode = scatter_mode or config.scatter_mode
    class_rows = _split_classes(train)
    models = _fit_scatters(class_rows, mode, config)
    feats = _md_training_features(train.rows, models, hdlss)
    model = _fit_gam_on(feats, train.labels, config)
    return FittedClassifier(tuple(models), None, feats.kind, None, model,
                            config, None, hdlss,
                            diagnostics={"scatter_mode": mode})


def fit_lmd(train: Dataset, config: TrainConfig | None = None,
            scatter_mode: str | None = None, hdlss: bool = False) -> FittedClassifier:
    """Fit the local-Mahalanobis-distance classifier with bootstrapped h."""
    config = config or TrainConfig()
    mode = scatter_mode or config.scatter_mode
    class_rows = _split_classes(train)
    models = _fit_scatters(class_rows, mode, config)
    kernel = _default_kernel(train.dim, hdlss)
    grid = build_h_grid(train, models, kernel, config)
    h_best, err_table, skipped = bootstrap_select_h(
        train, grid, config, scatter_mode=mode, hdlss=hdlss, kernel=kernel)
    feats = _lmd_feature_matrix(train.rows, class_rows, models, h_best, kernel, hdlss)
    model = _fit_gam_on(feats, train.labels, config)
    diag = {"scatter_mode": mode, "h_grid": [float(h) for h in grid],
            "bootstrap_errors": err_table, "skipped_resamples": skipped}
    return FittedClassifier(tuple(models), tuple(class_rows), LMD, h_best, model,
                            config, kernel.kind, hdlss, diagnostics=diag)


def _oob_error_of_refit(train: Dataset, config: TrainConfig, feature: str,
                        mode: str, h: float | None, b_resamples: int,
                        seed_tag: str) -> float:
    """Mean out-of-bag error of refitting a fixed configuration on
    bootstrap resamples; used to choose between HDLSS scatter modes."""
    class_rows = _split_classes(train)
    sizes = [len(r) for r in class_rows]
    labels = np.concatenate([np.full(n_j, j + 1) for j, n_j in enumerate(sizes)])
    rows = np.concatenate(class_rows, axis=0)
    bounds = np.cumsum([0] + sizes)
    kernel = _default_kernel(train.dim, True)
    d = train.dim

    errs = []
    for b in range(b_resamples):
        rng = derive_rng(config.seed, seed_tag, mode, b)
        take, oob = _stratified_resample(sizes, rng)
        if oob.size == 0:
            continue
        boot_class_rows = [rows[take[(take >= bounds[j]) & (take < bounds[j + 1])]]
                           for j in range(len(sizes))]
        models = _fit_scatters(boot_class_rows, mode, config)
        if feature == MD:
            feats_all = _md_training_features(rows, models, True)
            values = feats_all.values
            kind, hh = MD_SQUARED_SCALED, None
        else:
            counts_all = np.bincount(take, minlength=len(rows)).astype(float)
            qforms = [pairwise_qforms(rows, rows[bounds[j]:bounds[j + 1]], m.scatter_inv)
                      for j, m in enumerate(models)]
            counts = [counts_all[bounds[j]:bounds[j + 1]] for j in range(len(sizes))]
            values = _lmd_features_from_qforms(qforms, counts, h, kernel, d, True)
            kind, hh = LMD, float(h)
        model = _fit_gam_on(FeatureMatrix(values[take], kind, len(sizes), h=hh),
                            labels[take], config)
        pred = gam.predict_class(model, FeatureMatrix(values[oob], kind, len(sizes), h=hh))
        errs.append(float(np.mean(pred != labels[oob])))
    if not errs:
        raise AllResamplesSkipped("every mode-selection resample had an empty out-of-bag set")
    return float(np.mean(errs))


def fit_hdlss(train: Dataset, config: TrainConfig | None = None) -> FittedClassifier:
    """High-dimensional variant: identity vs diagonal scatter, selected by
    out-of-bag bootstrap error; features are squared distances scaled by
    1/d (MD) or 1/d-scaled LMDs with the flat kernel profile."""
    config = config or TrainConfig()
    class_rows = _split_classes(train)
    max_class = max(len(r) for r in class_rows)
    if config.scatter_mode == "auto" and train.dim <= max_class:
        raise BadParameters(
            "dimension does not exceed the class sizes; pick an explicit scatter mode")

    candidates = (estimators.IDENTITY, estimators.DIAGONAL)
    fits = {}
    scores = {}
    for mode in candidates:
        fitter = fit_md if config.feature == MD else fit_lmd
        clf = fitter(train, config, scatter_mode=mode, hdlss=True)
        fits[mode] = clf
        scores[mode] = _oob_error_of_refit(train, config, config.feature, mode,
                                           clf.h, HDLSS_MODE_B, "mode-boot")
    chosen = min(candidates, key=lambda m: (scores[m], candidates.index(m)))
    clf = fits[chosen]
    diag = dict(clf.diagnostics)
    diag.update({"chosen_mode": chosen, "mode_errors": {m: scores[m] for m in candidates}})
    return replace(clf, diagnostics=diag)


def fit_classifier(train: Dataset, config: TrainConfig | None = None) -> FittedClassifier:
    """Dispatch on the configured feature kind and scatter mode."""
    config = config or TrainConfig()
    plan, hdlss = _resolved_mode(config, train)
    if hdlss:
        return fit_hdlss(train, config)
    fitter = fit_md if config.feature == MD else fit_lmd
    return fitter(train, config, scatter_mode=plan)


def predict(clf: FittedClassifier, X) -> tuple[np.ndarray, np.ndarray]:
    """Classes and posterior probabilities for new rows."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != clf.dim:
        raise DimensionMismatch(
            f"data has dimension {X.shape[1]}, classifier expects {clf.dim}")
    if clf.feature_kind == LMD:
        feats = _lmd_feature_matrix(X, clf.per_class_rows, clf.models, clf.h,
                                    clf.kernel(), clf.hdlss)
    else:
        feats = _md_training_features(X, clf.models, clf.hdlss)
    probs = gam.predict_proba(clf.gam, feats)
    return np.argmax(probs, axis=1) + 1, probs


# ---------------------------------------------------------------------------
# HDLSS limit report (Theorems on d -> infinity feature concentration)


def hdlss_theta_md(sigma2, nu2, n_per_class, j: int, k: int, test: bool) -> float:
    """Limit of the scaled squared-distance feature (identity scatter):
    training rows converge to (1 - 1/n_j) sigma_j^2 on their own class,
    test draws to (1 + 1/n_j) sigma_j^2; off-class limits add the
    location gap and the 1/n_k mean-estimation term."""
    if j == k:
        adj = (1.0 + 1.0 / n_per_class[j]) if test else (1.0 - 1.0 / n_per_class[j])
        return adj * sigma2[j]
    return nu2[j][k] + sigma2[j] + sigma2[k] / n_per_class[k]


def hdlss_theta_lmd(sigma2, nu2, j: int, k: int, c0: float,
                    kernel: KernelProfile) -> float:
    """Limit of the scaled LMD feature when h^2/d -> c0: Psi(t/c0) * t with
    t = sigma_j^2 + sigma_k^2 + nu_jk^2 (nu_jj = 0)."""
    t = sigma2[j] + sigma2[k] + (nu2[j][k] if j != k else 0.0)
    return float(kernel.psi(np.array([t / c0]))[0] * t)


def _embed_means(nu2: np.ndarray, d: int) -> np.ndarray:
    """Class means in R^d with squared gaps d * nu2 (classical MDS)."""
    J = nu2.shape[0]
    D = d * nu2
    C = np.eye(J) - np.ones((J, J)) / J
    G = -0.5 * C @ D @ C
    vals, vecs = np.linalg.eigh(G)
    coords = vecs * np.sqrt(np.maximum(vals, 0.0))
    means = np.zeros((J, d))
    means[:, :J] = coords
    return means


def median_heuristic_h(class_rows) -> float:
    """Median-heuristic localization: per class, the median pairwise
    distance; the smallest class value is used."""
    meds = []
    for rows in class_rows:
        diff2 = pairwise_qforms(rows, rows, np.eye(rows.shape[1]))
        iu = np.triu_indices(len(rows), k=1)
        meds.append(float(np.median(diff2[iu])))
    return math.sqrt(min(meds))


@dataclass(frozen=True)
class HdlssLimitReport:
    d: int
    n_per_class: tuple
    c0: float
    md_train: dict      # class -> (empirical, theoretical) arrays
    md_test: dict
    lmd_train: dict
    lmd_test: dict
    max_abs_dev: float
    max_rel_dev: float


def hdlss_limit_check(sigma2, nu2, n_per_class, d: int, n_test: int = 100,
                      seed: int = 0, h_rule: str = "median") -> HdlssLimitReport:
    """Monte Carlo check of the high-dimensional feature limit points.

    Gaussian populations with the requested per-class variance levels and
    location gaps are simulated at dimension ``d``; empirical scaled
    feature means (training rows and fresh test draws) are compared
    against the closed-form limits, for both squared-distance and LMD
    features (the latter at the median-heuristic h, so h^2/d plays C0).
    """
    sigma2 = [float(s) for s in sigma2]
    nu2 = np.asarray(nu2, dtype=float)
    J = len(sigma2)
    if nu2.shape != (J, J):
        raise BadParameters("nu2 must be a JxJ matrix")
    if h_rule != "median":
        raise BadParameters(f"unsupported h rule {h_rule!r}")
    n_per_class = [int(n) for n in (n_per_class if np.ndim(n_per_class) else
                                    [n_per_class] * J)]
    if len(n_per_class) != J:
        n_per_class = [n_per_class[0]] * J

    rng = derive_rng(seed, "hdlss-check")
    means = _embed_means(nu2, d)
    train_rows = [means[j] + math.sqrt(sigma2[j]) * rng.standard_normal((n_per_class[j], d))
                  for j in range(J)]
    test_rows = [means[j] + math.sqrt(sigma2[j]) * rng.standard_normal((n_test, d))
                 for j in range(J)]

    kernel = flat_gaussian_profile()
    h = median_heuristic_h(train_rows)
    c0 = h * h / d
    centers = [rows.mean(axis=0) for rows in train_rows]

    def md_features_scaled(X):
        return np.column_stack([np.sum((X - c) ** 2, axis=1) / d for c in centers])

    def lmd_features_scaled(X):
        cols = []
        for rows in train_rows:
            q = pairwise_qforms(X, rows, np.eye(d))
            cols.append(np.mean(kernel.psi(q / (h * h)) * q, axis=1) / d)
        return np.column_stack(cols)

    md_train, md_test, lmd_train, lmd_test = {}, {}, {}, {}
    devs_abs, devs_rel = [], []

    def record(table, j, emp, theo):
        table[j + 1] = (emp, theo)
        devs_abs.append(np.max(np.abs(emp - theo)))
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.abs(emp - theo) / np.abs(theo)
        devs_rel.append(np.max(rel[np.isfinite(rel)]) if np.any(np.isfinite(rel)) else 0.0)

    for j in range(J):
        emp = md_features_scaled(train_rows[j]).mean(axis=0)
        theo = np.array([hdlss_theta_md(sigma2, nu2, n_per_class, j, k, test=False)
                         for k in range(J)])
        record(md_train, j, emp, theo)

        emp = md_features_scaled(test_rows[j]).mean(axis=0)
        theo = np.array([hdlss_theta_md(sigma2, nu2, n_per_class, j, k, test=True)
                         for k in range(J)])
        record(md_test, j, emp, theo)

        emp = lmd_features_scaled(train_rows[j]).mean(axis=0)
        theo = np.array([
            hdlss_theta_lmd(sigma2, nu2, j, k, c0, kernel)
            * ((1.0 - 1.0 / n_per_class[j]) if k == j else 1.0)
            for k in range(J)])
        record(lmd_train, j, emp, theo)

        emp = lmd_features_scaled(test_rows[j]).mean(axis=0)
        theo = np.array([hdlss_theta_lmd(sigma2, nu2, j, k, c0, kernel)
                         for k in range(J)])
        record(lmd_test, j, emp, theo)

    return HdlssLimitReport(d, tuple(n_per_class), c0, md_train, md_test,
                            lmd_train, lmd_test,
                            float(max(devs_abs)), float(max(devs_rel)))
