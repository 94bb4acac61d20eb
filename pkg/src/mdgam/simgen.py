"""Deterministic generators for the simulated classification examples.

Examples 1..24 follow the numbering of the benchmark tables (1..16 at
dimension 2/4/6, 17..24 high-dimensional at d = 500), plus the two named
bivariate examples "A" (elliptic) and "B" (bimodal mixture). Each
example knows how to sample every class and, where the class densities
are tractable, exposes a Bayes-rule oracle.

All sampling is driven by a single seed; identical (spec, seed) pairs
produce bit-identical datasets.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg
from scipy.special import gammaln, logsumexp
from scipy.stats import beta as beta_dist
from scipy.stats import norm

from .errors import BadInterval, BadParameters, NoClosedForm, UnknownExample
from .seeds import derive_rng

# Example 6 radius calibration: E(R^2) = 100/3 for all three classes.
EX6_SIGMA2 = 100.0 / 3.0 - 30.25
EX6_C = math.sqrt(800.0 / 9.0)


@dataclass(frozen=True)
class Dataset:
    """Row-major observation matrix with integer class labels in 1..J."""

    rows: np.ndarray
    labels: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rows.shape[0] != self.labels.shape[0]:
            raise BadParameters("rows and labels disagree on length")

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    @property
    def class_count(self) -> int:
        return int(self.labels.max()) if self.n else 0

    def class_rows(self, j: int) -> np.ndarray:
        return self.rows[self.labels == j]


@dataclass(frozen=True)
class ExampleSpec:
    example_id: object          # 1..24 or "A"/"B"
    d: int
    n_train_per_class: int
    n_test_per_class: int

    def __post_init__(self):
        if self.d < 1 or self.n_train_per_class < 1 or self.n_test_per_class < 1:
            raise BadParameters("dimension and per-class sizes must be >= 1")


# ---------------------------------------------------------------------------
# sampling primitives


def _unit_directions(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    z = rng.standard_normal((n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _shell_radii(rng: np.random.Generator, n: int, d: int, a: float, b: float) -> np.ndarray:
    """Radii with density proportional to r^{d-1} on [a, b], computed in
    log space so large d does not overflow a^d."""
    u = rng.random(n)
    if a == 0.0:
        return b * u ** (1.0 / d)
    z = d * math.log(b / a)
    if z <= 500.0:
        log_r = math.log(a) + np.log1p(u * math.expm1(z)) / d
    else:
        log_r = math.log(a) + (z + np.log(u)) / d
    return np.exp(log_r)


def gen_uniform_shell(n: int, d: int, a: float, b: float, sigma=None,
                      seed: int = 0, rng: np.random.Generator | None = None) -> np.ndarray:
    """Uniform draws from {x : a <= ||S^{1/2} x|| <= b} (S = identity when
    ``sigma`` is None)."""
    if not (0 <= a <= b) or b <= 0:
        raise BadInterval(f"need 0 <= a <= b with b > 0, got [{a}, {b}]")
    rng = rng if rng is not None else np.random.default_rng(seed)
    pts = _unit_directions(rng, n, d) * _shell_radii(rng, n, d, a, b)[:, None]
    if sigma is None:
        return pts
    sigma = np.asarray(sigma, dtype=float)
    vals, vecs = np.linalg.eigh(sigma)
    if np.any(vals <= 0):
        raise BadParameters("sigma must be positive definite")
    inv_sqrt = (vecs * (1.0 / np.sqrt(vals))) @ vecs.T
    return pts @ inv_sqrt.T


def gen_spherical_radius(n: int, d: int, radius_sampler: Callable,
                         seed: int = 0, rng: np.random.Generator | None = None) -> np.ndarray:
    """Spherical distribution: uniform direction times sampled radius.

    ``radius_sampler(rng, n)`` must return n nonnegative radii.
    """
    rng = rng if rng is not None else np.random.default_rng(seed)
    r = np.asarray(radius_sampler(rng, n), dtype=float)
    return _unit_directions(rng, n, d) * r[:, None]


def _chol(cov) -> np.ndarray:
    return np.linalg.cholesky(np.asarray(cov, dtype=float))


def gen_mvnormal(n: int, mean, cov, seed: int = 0,
                 rng: np.random.Generator | None = None) -> np.ndarray:
    rng = rng if rng is not None else np.random.default_rng(seed)
    mean = np.asarray(mean, dtype=float)
    z = rng.standard_normal((n, mean.shape[0]))
    return mean + z @ _chol(cov).T


def gen_mvt(n: int, df: float, loc, scatter, seed: int = 0,
            rng: np.random.Generator | None = None) -> np.ndarray:
    """Multivariate t via normal over an independent chi scaling."""
    if df <= 0:
        raise BadParameters(f"degrees of freedom must be positive, got {df}")
    rng = rng if rng is not None else np.random.default_rng(seed)
    loc = np.asarray(loc, dtype=float)
    z = rng.standard_normal((n, loc.shape[0])) @ _chol(scatter).T
    w = rng.chisquare(df, n) / df
    return loc + z / np.sqrt(w)[:, None]


def gen_cauchy(n: int, loc, scatter, seed: int = 0,
               rng: np.random.Generator | None = None) -> np.ndarray:
    return gen_mvt(n, 1.0, loc, scatter, seed=seed, rng=rng)


def gen_laplace_iid(n: int, d: int, loc, scale: float, seed: int = 0,
                    rng: np.random.Generator | None = None) -> np.ndarray:
    if scale <= 0:
        raise BadParameters("Laplace scale must be positive")
    rng = rng if rng is not None else np.random.default_rng(seed)
    return np.asarray(loc, dtype=float) + rng.laplace(0.0, scale, size=(n, d))


def gen_exponential_iid(n: int, d: int, mean: float, seed: int = 0,
                        rng: np.random.Generator | None = None) -> np.ndarray:
    if mean <= 0:
        raise BadParameters("exponential mean must be positive")
    rng = rng if rng is not None else np.random.default_rng(seed)
    return rng.exponential(mean, size=(n, d))


def _ar1_normal(rng: np.random.Generator, n: int, d: int, rho: float) -> np.ndarray:
    """N(0, C) with C_ij = rho^{|i-j|}, built by the exact AR(1) recursion."""
    z = rng.standard_normal((n, d))
    x = np.empty_like(z)
    x[:, 0] = z[:, 0]
    c = math.sqrt(1.0 - rho * rho)
    for t in range(1, d):
        x[:, t] = rho * x[:, t - 1] + c * z[:, t]
    return x


def rotate_pairs(X: np.ndarray, degrees: float = 45.0) -> np.ndarray:
    """Rotate each successive coordinate pair (1,2), (3,4), ... by the given
    angle; an odd final coordinate is left unchanged."""
    theta = math.radians(degrees)
    c, s = math.cos(theta), math.sin(theta)
    out = X.copy()
    d = X.shape[1]
    even = np.arange(0, d - 1, 2)
    odd = even + 1
    out[:, even] = c * X[:, even] - s * X[:, odd]
    out[:, odd] = s * X[:, even] + c * X[:, odd]
    return out


def _alternating_signs(d: int) -> np.ndarray:
    """The vector with i-th component (-1)^i for i = 1..d."""
    a = np.ones(d)
    a[::2] = -1.0
    return a


def _mixture_rows(rng, n, samplers, weights) -> np.ndarray:
    """Sample a mixture: component counts are multinomial in the stated
    proportions; rows are shuffled so component identity is not positional."""
    counts = rng.multinomial(n, weights)
    parts = [samplers[m](k) for m, k in enumerate(counts) if k > 0]
    rows = np.concatenate(parts, axis=0)
    return rows[rng.permutation(n)]


def _equicorrelated(d: int, rho: float) -> np.ndarray:
    return (1.0 - rho) * np.eye(d) + rho * np.ones((d, d))


# ---------------------------------------------------------------------------
# log-density helpers for the Bayes oracles


def _log_iid_normal(X, mean, var):
    d = X.shape[1]
    return (-0.5 * np.sum((X - mean) ** 2, axis=1) / var
            - 0.5 * d * math.log(2.0 * math.pi * var))


def _log_mvnormal_factory(mean, cov):
    mean = np.asarray(mean, dtype=float)
    factor = linalg.cho_factor(np.asarray(cov, dtype=float), lower=True)
    log_det = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    d = mean.shape[0]

    def logpdf(X):
        Xc = X - mean
        sol = linalg.cho_solve(factor, Xc.T)
        q = np.einsum("ij,ji->i", Xc, sol)
        return -0.5 * (q + d * math.log(2.0 * math.pi) + log_det)

    return logpdf


def _log_mvt_factory(df, loc, scatter):
    loc = np.asarray(loc, dtype=float)
    factor = linalg.cho_factor(np.asarray(scatter, dtype=float), lower=True)
    log_det = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    d = loc.shape[0]
    const = (gammaln((df + d) / 2.0) - gammaln(df / 2.0)
             - 0.5 * d * math.log(df * math.pi) - 0.5 * log_det)

    def logpdf(X):
        Xc = X - loc
        sol = linalg.cho_solve(factor, Xc.T)
        q = np.einsum("ij,ji->i", Xc, sol)
        return const - 0.5 * (df + d) * np.log1p(q / df)

    return logpdf


def _log_laplace_iid_factory(loc, scale):
    loc = np.asarray(loc, dtype=float)

    def logpdf(X):
        d = X.shape[1]
        return -np.sum(np.abs(X - loc), axis=1) / scale - d * math.log(2.0 * scale)

    return logpdf


def _log_exponential_iid_factory(mean):
    def logpdf(X):
        d = X.shape[1]
        out = -np.sum(X, axis=1) / mean - d * math.log(mean)
        return np.where(np.all(X >= 0, axis=1), out, -np.inf)

    return logpdf


def _log_mixture_factory(logpdfs, weights):
    logw = np.log(np.asarray(weights, dtype=float))

    def logpdf(X):
        stacked = np.stack([lp(X) for lp in logpdfs], axis=1)
        return logsumexp(stacked + logw, axis=1)

    return logpdf


def _shell_membership_factory(center, bands):
    """Indicator log-density: 0 inside any of the radius bands around the
    center, -inf outside (bands are closed [a, b] intervals)."""
    center = np.asarray(center, dtype=float)

    def logpdf(X):
        r = np.linalg.norm(X - center, axis=1)
        inside = np.zeros(len(r), dtype=bool)
        for a, b in bands:
            inside |= (r >= a) & (r <= b)
        return np.where(inside, 0.0, -np.inf)

    return logpdf


class BayesOracle:
    """Bayes rule built from per-class log scores (log prior + log density)."""

    def __init__(self, log_scores, class_count):
        self._log_scores = log_scores
        self.class_count = class_count

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        scores = np.stack([f(X) for f in self._log_scores], axis=1)
        return np.argmax(scores, axis=1) + 1


# ---------------------------------------------------------------------------
# example definitions


@dataclass(frozen=True)
class _ExampleDef:
    class_count: int
    default_d: int | None          # None = d is caller-chosen (2/4/6 family)
    sample_class: Callable         # (class_id, n, d, rng) -> rows
    oracle: Callable | None        # (d) -> BayesOracle
    default_test_per_class: int


def _shell_mix_sampler(bands_by_class):
    def sample(j, n, d, rng):
        bands = bands_by_class[j - 1]
        samplers = [lambda k, ab=ab: gen_uniform_shell(k, d, ab[0], ab[1], rng=rng)
                    for ab in bands]
        return _mixture_rows(rng, n, samplers, [1.0 / len(bands)] * len(bands))
    return sample


def _ex1_oracle(d):
    c1 = _shell_membership_factory(np.zeros(d), [(0, 1), (2, 3)])
    c2 = _shell_membership_factory(np.zeros(d), [(1, 2), (3, 4)])
    return BayesOracle([c1, c2], 2)


def _ex2_sampler(j, n, d, rng):
    sign = -1.0 if j == 1 else 1.0
    return gen_mvnormal(n, sign * 0.3 * np.ones(d), np.eye(d), rng=rng)


def _ex2_oracle(d):
    return BayesOracle([lambda X: _log_iid_normal(X, -0.3, 1.0),
                        lambda X: _log_iid_normal(X, 0.3, 1.0)], 2)


def _ex3_sampler(j, n, d, rng):
    var = 1.0 if j == 1 else 5.0
    return gen_mvnormal(n, np.zeros(d), var * np.eye(d), rng=rng)


def _ex3_oracle(d):
    return BayesOracle([lambda X: _log_iid_normal(X, 0.0, 1.0),
                        lambda X: _log_iid_normal(X, 0.0, 5.0)], 2)


def _ex4_sampler(j, n, d, rng):
    sigma = _equicorrelated(d, 0.5)
    if j == 1:
        return gen_uniform_shell(n, d, 1, 2, sigma=sigma, rng=rng)
    samplers = [lambda k: gen_uniform_shell(k, d, 0, 1, sigma=sigma, rng=rng),
                lambda k: gen_uniform_shell(k, d, 2, 3, sigma=sigma, rng=rng)]
    return _mixture_rows(rng, n, samplers, [0.5, 0.5])


def _ex4_oracle(d):
    sigma = _equicorrelated(d, 0.5)
    vals, vecs = np.linalg.eigh(sigma)
    sqrt_sigma = (vecs * np.sqrt(vals)) @ vecs.T

    def radius(X):
        return np.linalg.norm(X @ sqrt_sigma.T, axis=1)

    def c1(X):
        r = radius(X)
        return np.where((r >= 1) & (r <= 2), 0.0, -np.inf)

    def c2(X):
        r = radius(X)
        return np.where((r <= 1) | ((r >= 2) & (r <= 3)), 0.0, -np.inf)

    return BayesOracle([c1, c2], 2)


def _ex5_sampler(j, n, d, rng):
    if j == 1:
        return gen_mvnormal(n, np.zeros(d), 3.0 * np.eye(d), rng=rng)
    return gen_mvt(n, 3.0, np.zeros(d), np.eye(d), rng=rng)


def _ex5_oracle(d):
    return BayesOracle([lambda X: _log_iid_normal(X, 0.0, 3.0),
                        _log_mvt_factory(3.0, np.zeros(d), np.eye(d))], 2)


def _ex6_radius_samplers():
    sig = math.sqrt(EX6_SIGMA2)
    return [lambda rng, k: rng.uniform(0.0, 10.0, k),
            lambda rng, k: np.abs(rng.normal(5.5, sig, k)),
            lambda rng, k: EX6_C * rng.beta(0.5, 0.5, k)]


def _ex6_sampler(j, n, d, rng):
    sampler = _ex6_radius_samplers()[j - 1]
    return gen_spherical_radius(n, d, sampler, rng=rng)


def _ex6_oracle(d):
    sig = math.sqrt(EX6_SIGMA2)

    # The surface-area factor of a spherical density cancels across
    # classes, so the Bayes rule compares radius densities directly.
    def c1(X):
        r = np.linalg.norm(X, axis=1)
        return np.where((r >= 0) & (r <= 10), math.log(0.1), -np.inf)

    def c2(X):
        r = np.linalg.norm(X, axis=1)
        dens = norm.pdf(r, 5.5, sig) + norm.pdf(-r, 5.5, sig)   # folded normal
        return np.log(np.maximum(dens, 1e-300))

    def c3(X):
        r = np.linalg.norm(X, axis=1)
        inside = (r >= 0) & (r <= EX6_C)
        dens = np.where(inside, beta_dist.pdf(np.clip(r / EX6_C, 0, 1), 0.5, 0.5) / EX6_C,
                        0.0)
        return np.log(np.maximum(dens, 1e-300))

    return BayesOracle([c1, c2, c3], 3)


_EX7_RHOS = (0.1, 0.5, 0.9)


def _ex7_sampler(j, n, d, rng):
    return gen_mvnormal(n, np.zeros(d), _equicorrelated(d, _EX7_RHOS[j - 1]), rng=rng)


def _ex7_oracle(d):
    logpdfs = [_log_mvnormal_factory(np.zeros(d), _equicorrelated(d, r))
               for r in _EX7_RHOS]
    return BayesOracle(logpdfs, 3)


def _ex8_sampler(j, n, d, rng):
    sigma = _equicorrelated(d, 0.1)
    if j == 1:
        return gen_mvnormal(n, np.zeros(d), sigma, rng=rng)
    return gen_cauchy(n, np.zeros(d), sigma, rng=rng)


def _ex8_oracle(d):
    sigma = _equicorrelated(d, 0.1)
    return BayesOracle([_log_mvnormal_factory(np.zeros(d), sigma),
                        _log_mvt_factory(1.0, np.zeros(d), sigma)], 2)


_EX9_SCALE = math.sqrt(0.375)   # iid Laplace components with variance 0.75


def _ex9_locations(d):
    a = _alternating_signs(d)
    return [np.ones(d), -np.ones(d), a, -a]


def _ex9_sampler(j, n, d, rng):
    return gen_laplace_iid(n, d, _ex9_locations(d)[j - 1], _EX9_SCALE, rng=rng)


def _ex9_oracle(d):
    logpdfs = [_log_laplace_iid_factory(loc, _EX9_SCALE) for loc in _ex9_locations(d)]
    return BayesOracle(logpdfs, 4)


def _ex10_sampler(j, n, d, rng):
    return gen_exponential_iid(n, d, 1.0 if j == 1 else 2.0, rng=rng)


def _ex10_oracle(d):
    return BayesOracle([_log_exponential_iid_factory(1.0),
                        _log_exponential_iid_factory(2.0)], 2)


def _ex11_sampler(j, n, d, rng):
    if j == 1:
        locs, cov = [np.ones(d), -np.ones(d)], np.eye(d)
    else:
        a = _alternating_signs(d)
        locs, cov = [a, -a], 4.0 * np.eye(d)
    samplers = [lambda k, m=m: gen_mvnormal(k, m, cov, rng=rng) for m in locs]
    return _mixture_rows(rng, n, samplers, [0.5, 0.5])


def _ex11_oracle(d):
    a = _alternating_signs(d)
    c1 = _log_mixture_factory([lambda X: _log_iid_normal(X - np.ones(X.shape[1]), 0.0, 1.0),
                               lambda X: _log_iid_normal(X + np.ones(X.shape[1]), 0.0, 1.0)],
                              [0.5, 0.5])
    c2 = _log_mixture_factory([lambda X: _log_iid_normal(X - a, 0.0, 4.0),
                               lambda X: _log_iid_normal(X + a, 0.0, 4.0)],
                              [0.5, 0.5])
    return BayesOracle([c1, c2], 2)


def _ex12_class1(n, d, rng):
    signs = rng.choice([-1.0, 1.0], size=(n, d))
    return signs + 0.1 * rng.standard_normal((n, d))


def _ex12_sampler(j, n, d, rng):
    rows = _ex12_class1(n, d, rng)
    return rows if j == 1 else rotate_pairs(rows)


def _ex12_oracle(d):
    def log_f1(X):
        # product over coordinates of 0.5 N(1, .01) + 0.5 N(-1, .01)
        lp = np.logaddexp(norm.logpdf(X, 1.0, 0.1), norm.logpdf(X, -1.0, 0.1))
        return np.sum(lp, axis=1) - d * math.log(2.0)

    def log_f2(X):
        return log_f1(rotate_pairs(X, -45.0))

    return BayesOracle([log_f1, log_f2], 2)


_EX13_BANDS = {
    1: [((0, 1), -1), ((1, 2), +1), ((2, 3), -1)],
    2: [((0, 1), +1), ((1, 2), -1), ((2, 3), +1)],
}
_EX13_WEIGHTS = [0.25, 0.5, 0.25]


def _ex13_center(d):
    c = np.zeros(d)
    c[0] = 5.0
    return c


def _ex13_sampler(j, n, d, rng):
    c = _ex13_center(d)
    samplers = [lambda k, ab=ab, s=s: s * c + gen_uniform_shell(k, d, ab[0], ab[1], rng=rng)
                for ab, s in _EX13_BANDS[j]]
    return _mixture_rows(rng, n, samplers, _EX13_WEIGHTS)


def _ex13_oracle(d):
    c = _ex13_center(d)
    scores = []
    for j in (1, 2):
        parts = [_shell_membership_factory(s * c, [ab]) for ab, s in _EX13_BANDS[j]]
        scores.append(_log_mixture_factory(parts, _EX13_WEIGHTS))
    return BayesOracle(scores, 2)


def _ex14_rule(X):
    prod = np.prod(np.abs(X), axis=1)
    return np.where((prod > 0.5) & (prod < 2.0), 1, 2)


def _ex14_sampler(j, n, d, rng):
    out = []
    got = 0
    while got < n:
        batch = rng.uniform(-2.0, 2.0, size=(max(4 * n, 256), d))
        keep = batch[_ex14_rule(batch) == j]
        out.append(keep)
        got += len(keep)
    return np.concatenate(out, axis=0)[:n]


def _ex14_oracle(d):
    def c1(X):
        return np.where(_ex14_rule(X) == 1, 0.0, -np.inf)

    def c2(X):
        return np.where(_ex14_rule(X) == 2, 0.0, -np.inf)

    return BayesOracle([c1, c2], 2)


def _ex15_sampler(j, n, d, rng):
    if j == 1:
        return gen_exponential_iid(n, d, 5.0, rng=rng)
    samplers = [lambda k: gen_exponential_iid(k, d, 1.0, rng=rng),
                lambda k: gen_exponential_iid(k, d, 10.0, rng=rng)]
    return _mixture_rows(rng, n, samplers, [0.5, 0.5])


def _ex15_oracle(d):
    c2 = _log_mixture_factory([_log_exponential_iid_factory(1.0),
                               _log_exponential_iid_factory(10.0)], [0.5, 0.5])
    return BayesOracle([_log_exponential_iid_factory(5.0), c2], 2)


def _ex16_sampler(j, n, d, rng):
    if j == 1:
        return gen_laplace_iid(n, d, np.zeros(d), 5.0, rng=rng)
    samplers = [lambda k: gen_laplace_iid(k, d, np.zeros(d), 1.0, rng=rng),
                lambda k: gen_laplace_iid(k, d, np.zeros(d), 10.0, rng=rng)]
    return _mixture_rows(rng, n, samplers, [0.5, 0.5])


def _ex16_oracle(d):
    zero = np.zeros(d)
    c2 = _log_mixture_factory([_log_laplace_iid_factory(zero, 1.0),
                               _log_laplace_iid_factory(zero, 10.0)], [0.5, 0.5])
    return BayesOracle([_log_laplace_iid_factory(zero, 5.0), c2], 2)


def _ex17_sampler(j, n, d, rng):
    sign = -1.0 if j == 1 else 1.0
    return sign * 0.2 * np.ones(d) + _ar1_normal(rng, n, d, 0.75)


def _ex17_oracle(d):
    cov = 0.75 ** np.abs(np.subtract.outer(np.arange(d), np.arange(d)))
    return BayesOracle([_log_mvnormal_factory(-0.2 * np.ones(d), cov),
                        _log_mvnormal_factory(0.2 * np.ones(d), cov)], 2)


def _ex18_sampler(j, n, d, rng):
    scale = 1.0 if j == 1 else math.sqrt(1.5)
    return scale * _ar1_normal(rng, n, d, 0.25)


def _ex18_oracle(d):
    cov = 0.25 ** np.abs(np.subtract.outer(np.arange(d), np.arange(d)))
    return BayesOracle([_log_mvnormal_factory(np.zeros(d), cov),
                        _log_mvnormal_factory(np.zeros(d), 1.5 * cov)], 2)


def _pm_locations(d):
    a = _alternating_signs(d)
    return [[0.05 * np.ones(d), -0.05 * np.ones(d)], [0.05 * a, -0.05 * a]]


def _ex19_sampler(j, n, d, rng):
    locs = _pm_locations(d)[j - 1]
    var = 0.20 if j == 1 else 0.25
    samplers = [lambda k, m=m: gen_mvnormal(k, m, var * np.eye(d), rng=rng)
                for m in locs]
    return _mixture_rows(rng, n, samplers, [0.5, 0.5])


def _ex19_oracle(d):
    scores = []
    for (m1, m2), var in zip(_pm_locations(d), (0.20, 0.25)):
        scores.append(_log_mixture_factory(
            [lambda X, m=m1, v=var: _log_iid_normal(X - m, 0.0, v),
             lambda X, m=m2, v=var: _log_iid_normal(X - m, 0.0, v)],
            [0.5, 0.5]))
    return BayesOracle(scores, 2)


def _ex20_sampler(j, n, d, rng):
    a = _alternating_signs(d)
    base = np.ones(d) if j == 1 else a
    samplers = [lambda k: gen_mvnormal(k, 0.5 * base, np.eye(d), rng=rng),
                lambda k: gen_mvnormal(k, -0.5 * base, 4.0 * np.eye(d), rng=rng)]
    return _mixture_rows(rng, n, samplers, [0.5, 0.5])


def _ex20_oracle(d):
    a = _alternating_signs(d)
    scores = []
    for base in (np.ones(d), a):
        scores.append(_log_mixture_factory(
            [lambda X, m=0.5 * base: _log_iid_normal(X - m, 0.0, 1.0),
             lambda X, m=-0.5 * base: _log_iid_normal(X - m, 0.0, 4.0)],
            [0.5, 0.5]))
    return BayesOracle(scores, 2)


def _ex21_class1(n, d, rng):
    a = _alternating_signs(d)
    locs = [a, -a, np.ones(d), -np.ones(d)]
    samplers = [lambda k, m=m: gen_mvnormal(k, m, 0.01 * np.eye(d), rng=rng)
                for m in locs]
    return _mixture_rows(rng, n, samplers, [0.25] * 4)


def _ex21_sampler(j, n, d, rng):
    rows = _ex21_class1(n, d, rng)
    return rows if j == 1 else rotate_pairs(rows)


def _ex21_oracle(d):
    a = _alternating_signs(d)
    locs = [a, -a, np.ones(d), -np.ones(d)]
    c1 = _log_mixture_factory(
        [lambda X, m=m: _log_iid_normal(X - m, 0.0, 0.01) for m in locs],
        [0.25] * 4)

    def c2(X):
        return c1(rotate_pairs(X, -45.0))

    return BayesOracle([c1, c2], 2)


def _ex22_sampler(j, n, d, rng):
    bands = [(0, 1), (2, 3)] if j == 1 else [(1, 2), (3, 4)]
    samplers = [lambda k, ab=ab: gen_uniform_shell(k, d, ab[0], ab[1], rng=rng)
                for ab in bands]
    return _mixture_rows(rng, n, samplers, [0.5, 0.5])


def _ex23_sampler(j, n, d, rng):
    if j == 1:
        return gen_mvnormal(n, np.zeros(d), 3.0 * np.eye(d), rng=rng)
    return gen_mvt(n, 3.0, np.zeros(d), np.eye(d), rng=rng)


def _ex24_sampler(j, n, d, rng):
    c = _ex13_center(d)
    bands = _EX13_BANDS[j]
    samplers = [lambda k, ab=ab, s=s: s * c + gen_uniform_shell(k, d, ab[0], ab[1], rng=rng)
                for ab, s in bands]
    return _mixture_rows(rng, n, samplers, _EX13_WEIGHTS)


def _exA_sampler(j, n, d, rng):
    return _ex2_sampler(j, n, 2, rng)


_EXB_SIGMA = np.array([[5.0, 4.0], [4.0, 5.0]])


def _exB_sampler(j, n, d, rng):
    if j == 1:
        locs = [np.array([1.0, -1.0]), np.array([-3.0, 3.0])]
    else:
        locs = [np.array([-1.0, 1.0]), np.array([3.0, -3.0])]
    samplers = [lambda k, m=m: gen_mvnormal(k, m, _EXB_SIGMA, rng=rng) for m in locs]
    return _mixture_rows(rng, n, samplers, [0.5, 0.5])


def _exB_oracle(d):
    scores = []
    for locs in ([np.array([1.0, -1.0]), np.array([-3.0, 3.0])],
                 [np.array([-1.0, 1.0]), np.array([3.0, -3.0])]):
        comps = [_log_mvnormal_factory(m, _EXB_SIGMA) for m in locs]
        scores.append(_log_mixture_factory(comps, [0.5, 0.5]))
    return BayesOracle(scores, 2)


EXAMPLES: dict = {
    1: _ExampleDef(2, None, _shell_mix_sampler([[(0, 1), (2, 3)], [(1, 2), (3, 4)]]),
                   _ex1_oracle, 5000),
    2: _ExampleDef(2, None, _ex2_sampler, _ex2_oracle, 5000),
    3: _ExampleDef(2, None, _ex3_sampler, _ex3_oracle, 5000),
    4: _ExampleDef(2, None, _ex4_sampler, _ex4_oracle, 5000),
    5: _ExampleDef(2, None, _ex5_sampler, _ex5_oracle, 5000),
    6: _ExampleDef(3, None, _ex6_sampler, _ex6_oracle, 1000),
    7: _ExampleDef(3, None, _ex7_sampler, _ex7_oracle, 1000),
    8: _ExampleDef(2, None, _ex8_sampler, _ex8_oracle, 5000),
    9: _ExampleDef(4, None, _ex9_sampler, _ex9_oracle, 1000),
    10: _ExampleDef(2, None, _ex10_sampler, _ex10_oracle, 5000),
    11: _ExampleDef(2, None, _ex11_sampler, _ex11_oracle, 5000),
    12: _ExampleDef(2, None, _ex12_sampler, _ex12_oracle, 5000),
    13: _ExampleDef(2, None, _ex13_sampler, _ex13_oracle, 5000),
    14: _ExampleDef(2, None, _ex14_sampler, _ex14_oracle, 5000),
    15: _ExampleDef(2, None, _ex15_sampler, _ex15_oracle, 5000),
    16: _ExampleDef(2, None, _ex16_sampler, _ex16_oracle, 5000),
    17: _ExampleDef(2, 500, _ex17_sampler, _ex17_oracle, 1000),
    18: _ExampleDef(2, 500, _ex18_sampler, _ex18_oracle, 1000),
    19: _ExampleDef(2, 500, _ex19_sampler, _ex19_oracle, 1000),
    20: _ExampleDef(2, 500, _ex20_sampler, _ex20_oracle, 1000),
    21: _ExampleDef(2, 500, _ex21_sampler, _ex21_oracle, 1000),
    22: _ExampleDef(2, 500, _ex22_sampler, _ex1_oracle, 1000),
    23: _ExampleDef(2, 500, _ex23_sampler, _ex5_oracle, 1000),
    24: _ExampleDef(2, 500, _ex24_sampler, _ex13_oracle, 1000),
    "A": _ExampleDef(2, 2, _exA_sampler, _ex2_oracle, 1000),
    "B": _ExampleDef(2, 2, _exB_sampler, _exB_oracle, 1000),
}


def normalize_example_id(example_id):
    if isinstance(example_id, str):
        key = example_id.strip().upper()
        if key in ("A", "B"):
            return key
        try:
            example_id = int(key)
        except ValueError as exc:
            raise UnknownExample(f"unknown example {example_id!r}") from exc
    if example_id in EXAMPLES:
        return example_id
    raise UnknownExample(f"unknown example {example_id!r}")


def example_class_count(example_id) -> int:
    return EXAMPLES[normalize_example_id(example_id)].class_count


def default_spec(example_id, d: int | None = None, n_train_per_class: int = 100,
                 n_test_per_class: int | None = None) -> ExampleSpec:
    """Spec with the benchmark's default sizes for the given example."""
    key = normalize_example_id(example_id)
    definition = EXAMPLES[key]
    if key in ("A", "B"):
        d = 2                   # the named examples are bivariate by definition
    elif d is None:
        d = definition.default_d if definition.default_d is not None else 4
    if n_test_per_class is None:
        n_test_per_class = definition.default_test_per_class
    return ExampleSpec(key, d, n_train_per_class, n_test_per_class)


def _sample_dataset(definition: _ExampleDef, spec: ExampleSpec, n_per_class: int,
                    rng: np.random.Generator, role: str) -> Dataset:
    parts, labels = [], []
    for j in range(1, definition.class_count + 1):
        rows = definition.sample_class(j, n_per_class, spec.d, rng)
        parts.append(rows)
        labels.append(np.full(n_per_class, j, dtype=int))
    return Dataset(np.concatenate(parts, axis=0), np.concatenate(labels),
                   meta={"example_id": spec.example_id, "d": spec.d, "role": role})


def gen_example(spec: ExampleSpec, seed: int) -> tuple[Dataset, Dataset]:
    """Generate one (train, test) pair for the example in ``spec``."""
    key = normalize_example_id(spec.example_id)
    definition = EXAMPLES[key]
    train = _sample_dataset(definition, spec, spec.n_train_per_class,
                            derive_rng(seed, "train", key, spec.d), "train")
    test = _sample_dataset(definition, spec, spec.n_test_per_class,
                           derive_rng(seed, "test", key, spec.d), "test")
    train.meta["seed"] = seed
    test.meta["seed"] = seed
    return train, test


def bayes_oracle(example_id, d: int) -> BayesOracle:
    """Bayes classifier for examples with tractable class densities."""
    key = normalize_example_id(example_id)
    definition = EXAMPLES[key]
    if definition.oracle is None:
        raise NoClosedForm(f"no closed-form Bayes rule for example {key}")
    return definition.oracle(d)
