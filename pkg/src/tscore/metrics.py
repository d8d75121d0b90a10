"""The transfer score and its three constituents.

All metrics are pure functions of exported tensors: uniformity reads the
classifier weights, the Hopkins statistic reads target features, mutual
information reads target prediction probabilities. Natural log everywhere;
the score normalizes mutual information by ln K.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import logsumexp, xlogy

from .tensorio import EpochRecord, as_matrix

MIN_WEIGHT_COL_NORM = 1e-12


class UniformityWarning(UserWarning):
    """Raised when K > d+1, where no common pairwise angle can reach the ideal."""


def ideal_angle(k: int) -> float:
    """The common pairwise angle of k unit vectors that evenly partition space.

    Equals arccos(-1/(k-1)), in (pi/2, pi]; attainable only when k <= d+1.
    """
    if k < 2:
        raise ValueError(f"need at least 2 classes, got {k}")
    return float(np.arccos(-1.0 / (k - 1)))


def angle_matrix(weights) -> np.ndarray:
    """Pairwise angles (radians) between classifier weight columns.

    Returns a symmetric K x K matrix with an exactly zero diagonal. Cosines
    are clamped to [-1, 1] before arccos; float rounding can push them out.
    """
    w = as_matrix(weights, "weights")
    norms = np.linalg.norm(w, axis=0)
    if np.any(norms < MIN_WEIGHT_COL_NORM):
        raise ValueError("zero-norm weight column")
    unit = w / norms
    cos = np.clip(unit.T @ unit, -1.0, 1.0)
    angles = np.arccos(cos)
    np.fill_diagonal(angles, 0.0)
    return angles


def uniformity(weights) -> float:
    """Mean squared deviation of pairwise weight angles from the ideal angle.

    Averages (theta_ij - theta_K)^2 over the K(K-1) off-diagonal entries;
    0 iff the columns form an equiangular frame at the ideal angle. When
    K > d+1 the ideal angle is unattainable; the value is still computed
    but a UniformityWarning is emitted.
    """
    w = as_matrix(weights, "weights")
    d, k = w.shape
    if k < 2:
        raise ValueError(f"need at least 2 weight columns, got {k}")
    if k > d + 1:
        warnings.warn(
            f"K={k} exceeds d+1={d + 1}; no classifier this size can reach the "
            "ideal angle, uniformity is a lower-bounded proxy",
            UniformityWarning,
            stacklevel=2,
        )
    theta = angle_matrix(w)
    diff = theta - ideal_angle(k)
    np.fill_diagonal(diff, 0.0)
    return float((diff**2).sum() / (k * (k - 1)))


@dataclass(frozen=True)
class HopkinsConfig:
    """Sampling parameters for the Hopkins statistic.

    m=None resolves at call time to clamp(ceil(N/10), 10, 500), further
    capped at N-1. The statistic is deterministic given the seed.
    """

    m: int | None = None
    repetitions: int = 5
    seed: int = 0

    def resolve_m(self, n: int) -> int:
        if self.m is not None:
            return self.m
        return max(2, min(max(math.ceil(n / 10), 10), 500, n - 1))


def _sampled_sets(features: np.ndarray, m: int, rng: np.random.Generator):
    """One repetition's sample sets: R (m feature rows, drawn without
    replacement) and m box-uniform points.

    The uniform points are unit uniforms affinely mapped into the
    axis-aligned bounding box of the full feature set, so degenerate axes
    (max == min) sample the constant value and matched seeds survive
    positive rescaling of the features.
    """
    n, d = features.shape
    idx = rng.choice(n, size=m, replace=False)
    lo = features.min(axis=0)
    hi = features.max(axis=0)
    unit = rng.random((m, d))
    return features[idx], lo + (hi - lo) * unit


def _hopkins_once(r_set: np.ndarray, u_set: np.ndarray) -> float:
    """H = sum(u_i^d) / (sum(u_i^d) + sum(w_i^d)) for one sampled pair of sets.

    u_i: distance from each box point to its nearest neighbor in R.
    w_i: distance from each R point to its nearest other point in R.
    The d-th powers overflow for large d, so both sums live in log domain;
    exact-zero distances contribute -inf terms, i.e. zero mass.
    """
    d = r_set.shape[1]
    u_dist = cdist(u_set, r_set).min(axis=1)
    rr = cdist(r_set, r_set)
    np.fill_diagonal(rr, np.inf)
    w_dist = rr.min(axis=1)
    with np.errstate(divide="ignore"):
        log_sum_u = logsumexp(d * np.log(u_dist))
        log_sum_w = logsumexp(d * np.log(w_dist))
    if np.isneginf(log_sum_u) and np.isneginf(log_sum_w):
        return 0.5  # every point and the whole box collapse to one spot
    return float(np.exp(log_sum_u - np.logaddexp(log_sum_u, log_sum_w)))


def hopkins_statistic(features, config: HopkinsConfig | None = None) -> float:
    """Clustering tendency of the feature rows, in [0, 1].

    Mean over config.repetitions of the sparse-sampling ratio computed by
    _hopkins_once on the sets drawn by _sampled_sets. Roughly 0.5 for
    box-uniform data, approaching 1 for strongly clustered data.
    """
    x = as_matrix(features, "features")
    n = x.shape[0]
    if n < 3:
        raise ValueError(f"need at least 3 feature rows, got {n}")
    config = config or HopkinsConfig()
    m = config.resolve_m(n)
    if not 2 <= m <= n - 1:
        raise ValueError(f"m={m} outside [2, {n - 1}]")
    if config.repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    rng = np.random.default_rng(config.seed)
    values = [
        _hopkins_once(*_sampled_sets(x, m, rng)) for _ in range(config.repetitions)
    ]
    return float(np.mean(values))


def entropy(p) -> float:
    """Shannon entropy in nats, with 0 * ln 0 = 0."""
    v = np.asarray(p, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError("probability vector must be 1-D")
    if np.any(v < 0.0) or not np.all(np.isfinite(v)):
        raise ValueError("probability vector has negative or non-finite entries")
    if abs(v.sum() - 1.0) > 1e-9:
        raise ValueError(f"probability vector sums to {v.sum()}, not 1")
    return max(float(-xlogy(v, v).sum()), 0.0)


def _check_prob_rows(p: np.ndarray) -> None:
    if np.any(p < 0.0):
        raise ValueError("probability rows have negative entries")
    if np.any(np.abs(p.sum(axis=1) - 1.0) > 1e-9):
        raise ValueError("probability rows do not sum to 1")


def mutual_information(probabilities) -> float:
    """Entropy of the mean prediction minus the mean prediction entropy, in nats.

    High when predictions are individually confident but collectively
    class-balanced; bounded by [0, ln K].
    """
    p = as_matrix(probabilities, "probabilities")
    _check_prob_rows(p)
    k = p.shape[1]
    marginal = p.mean(axis=0)
    mean_row_entropy = float(-xlogy(p, p).sum(axis=1).mean())
    m = float(-xlogy(marginal, marginal).sum()) - mean_row_entropy
    return min(max(m, 0.0), math.log(k))


@dataclass(frozen=True)
class MetricReport:
    """Per-epoch metric values; transfer_score = -U + H + |M|/ln K."""

    epoch: int
    uniformity: float
    hopkins: float
    mutual_info: float
    transfer_score: float
    accuracy: float | None = None
    dim_deficient: bool = False


def accuracy_of(probabilities: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of rows whose argmax matches the label; argmax ties go to
    the lowest class index."""
    preds = np.argmax(probabilities, axis=1)
    return float(np.mean(preds == labels))


def transfer_score(record: EpochRecord, hopkins_config: HopkinsConfig | None = None) -> MetricReport:
    """Score one epoch record: uniformity on weights, Hopkins on features,
    mutual information on probabilities, composed into the transfer score."""
    d, k = record.weights.shape
    if k < 2:
        raise ValueError(f"need at least 2 classes, got {k}")
    u = uniformity(record.weights)
    h = hopkins_statistic(record.features, hopkins_config)
    m = mutual_information(record.probabilities)
    t = -u + h + abs(m) / math.log(k)
    acc = None
    if record.labels is not None:
        acc = accuracy_of(record.probabilities, record.labels)
    return MetricReport(
        epoch=record.epoch,
        uniformity=u,
        hopkins=h,
        mutual_info=m,
        transfer_score=t,
        accuracy=acc,
        dim_deficient=k > d + 1,
    )
