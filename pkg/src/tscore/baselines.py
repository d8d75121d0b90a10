"""Comparison metrics: kernel MMD, proxy A-distance, mean prediction
entropy, and Pearson correlation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist
from scipy.special import expit, xlogy

from .tensorio import as_matrix
from .metrics import _check_prob_rows


@dataclass(frozen=True)
class MmdConfig:
    """Gaussian-kernel MMD config; bandwidth is either an explicit sigma or
    the median pairwise distance of the pooled sample."""

    kernel_bandwidth: float | str = "median-heuristic"
    estimator: str = "biased"

    def __post_init__(self):
        if isinstance(self.kernel_bandwidth, str):
            if self.kernel_bandwidth != "median-heuristic":
                raise ValueError(f"unknown bandwidth {self.kernel_bandwidth!r}")
        elif not self.kernel_bandwidth > 0:
            raise ValueError("explicit bandwidth must be > 0")
        if self.estimator not in ("biased", "unbiased"):
            raise ValueError(f"estimator must be 'biased' or 'unbiased', got {self.estimator!r}")


def median_bandwidth(pooled: np.ndarray) -> float:
    """Median pairwise Euclidean distance; 1.0 if every point coincides."""
    med = float(np.median(pdist(pooled)))
    return med if med > 0 else 1.0


def _gaussian(x: np.ndarray, y: np.ndarray, sigma: float) -> np.ndarray:
    return np.exp(-cdist(x, y, "sqeuclidean") / (2.0 * sigma**2))


def mmd(source, target, config: MmdConfig | None = None) -> float:
    """Squared maximum mean discrepancy between two samples.

    The biased V-statistic is always >= 0 and exactly 0 for identical
    inputs; the unbiased U-statistic excludes self-pairs and may dip
    slightly negative. Deterministic; symmetric in its arguments.
    """
    config = config or MmdConfig()
    s = as_matrix(source, "source")
    t = as_matrix(target, "target")
    if s.shape[1] != t.shape[1]:
        raise ValueError(f"dimension mismatch: {s.shape[1]} vs {t.shape[1]}")
    ns, nt = s.shape[0], t.shape[0]
    if ns < 2 or nt < 2:
        raise ValueError("need at least 2 samples per domain")
    if isinstance(config.kernel_bandwidth, str):
        sigma = median_bandwidth(np.vstack([s, t]))
    else:
        sigma = float(config.kernel_bandwidth)
    kss = _gaussian(s, s, sigma)
    ktt = _gaussian(t, t, sigma)
    kst = _gaussian(s, t, sigma)
    if config.estimator == "biased":
        return float(kss.mean() + ktt.mean() - 2.0 * kst.mean())
    ss = (kss.sum() - np.trace(kss)) / (ns * (ns - 1))
    tt = (ktt.sum() - np.trace(ktt)) / (nt * (nt - 1))
    return float(ss + tt - 2.0 * kst.mean())


@dataclass(frozen=True)
class ProbeConfig:
    """Domain-probe training parameters for the proxy A-distance."""

    train_fraction: float = 0.8
    learning_rate: float = 0.1
    iterations: int = 500
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


def a_distance_from_error(error: float) -> float:
    """2(1 - 2*eps) with eps clamped into [0, 0.5]; worse-than-chance probes
    are optimization noise, not evidence of domain similarity."""
    eps = min(max(error, 0.0), 0.5)
    return 2.0 * (1.0 - 2.0 * eps)


def _train_logistic(x, y, lr: float, iterations: int) -> tuple[np.ndarray, float]:
    # full-batch gradient descent from zero init; bias included
    w = np.zeros(x.shape[1])
    b = 0.0
    n = x.shape[0]
    for _ in range(iterations):
        p = expit(x @ w + b)
        err = p - y
        w -= lr * (x.T @ err) / n
        b -= lr * err.mean()
    return w, b


def proxy_a_distance(source, target, config: ProbeConfig | None = None) -> float:
    """Proxy A-distance: 2(1 - 2*eps) where eps is the held-out error of a
    linear logistic probe separating the two domains.

    Domains are balanced by subsampling the larger to the smaller's size,
    then split train/test by train_fraction; everything is seeded, so the
    value is deterministic. Always in [0, 2].
    """
    config = config or ProbeConfig()
    s = as_matrix(source, "source")
    t = as_matrix(target, "target")
    if s.shape[1] != t.shape[1]:
        raise ValueError(f"dimension mismatch: {s.shape[1]} vs {t.shape[1]}")
    if s.shape[0] < 10 or t.shape[0] < 10:
        raise ValueError("need at least 10 samples per domain")
    rng = np.random.default_rng(config.seed)
    n = min(s.shape[0], t.shape[0])
    if s.shape[0] > n:
        s = s[rng.choice(s.shape[0], size=n, replace=False)]
    if t.shape[0] > n:
        t = t[rng.choice(t.shape[0], size=n, replace=False)]
    x = np.vstack([s, t])
    y = np.concatenate([np.zeros(n), np.ones(n)])
    perm = rng.permutation(2 * n)
    n_train = min(max(int(round(config.train_fraction * 2 * n)), 1), 2 * n - 1)
    train, test = perm[:n_train], perm[n_train:]
    w, b = _train_logistic(x[train], y[train], config.learning_rate, config.iterations)
    pred = (x[test] @ w + b >= 0.0).astype(float)
    error = float(np.mean(pred != y[test]))
    return a_distance_from_error(error)


def c_entropy(probabilities) -> float:
    """Mean prediction entropy in nats; lower means more confident."""
    p = as_matrix(probabilities, "probabilities")
    _check_prob_rows(p)
    return max(float(-xlogy(p, p).sum(axis=1).mean()), 0.0)


def pearson(x, y) -> float:
    """Product-moment correlation; errors on constant input rather than
    returning NaN."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.ndim != 1 or ya.ndim != 1:
        raise ValueError("inputs must be 1-D sequences")
    if xa.shape != ya.shape:
        raise ValueError(f"length mismatch: {xa.shape[0]} vs {ya.shape[0]}")
    if xa.shape[0] < 2:
        raise ValueError("need at least 2 points")
    sx, sy = xa.std(), ya.std()
    if sx == 0.0 or sy == 0.0:
        raise ValueError("correlation undefined for constant input")
    cov = float(np.mean((xa - xa.mean()) * (ya - ya.mean())))
    return float(np.clip(cov / (sx * sy), -1.0, 1.0))
