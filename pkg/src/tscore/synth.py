"""Desk-scale synthetic domain pairs and a tiny trainable model.

The generator builds K Gaussian clusters at scaled simplex vertices and a
shifted/rotated copy as the target domain. The model is a linear feature
map followed by a linear softmax classifier, trained by full-batch
gradient descent on source cross-entropy plus an optional target
entropy-minimization term; cranking that term's weight reproduces the
entropy-collapse flavor of negative transfer. Every epoch is emitted as a
loadable record, so end-to-end behavior can be tested on trajectories
with known accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from .tensorio import EpochRecord

CENTER_SCALE = 3.0


class LabeledDomain(NamedTuple):
    features: np.ndarray
    labels: np.ndarray


@dataclass(frozen=True)
class DomainSpec:
    """Geometry of one source/target pair; defaults give a moderate,
    learnable domain gap."""

    k: int = 3
    d_in: int = 5
    n: int = 300
    cluster_spread: float = 1.0
    shift: tuple[float, ...] = (1.55, 1.55, 1.55, 0.0, 0.0)
    rotation_angle: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"need at least 2 classes, got {self.k}")
        if self.n < 10 * self.k:
            raise ValueError(f"need n >= 10k = {10 * self.k}, got {self.n}")
        if self.d_in < max(self.k, 2):
            raise ValueError(f"d_in must be >= max(k, 2), got {self.d_in}")
        if not self.cluster_spread > 0:
            raise ValueError("cluster_spread must be > 0")
        if len(self.shift) != self.d_in:
            raise ValueError(
                f"shift has length {len(self.shift)}, expected d_in={self.d_in}"
            )


def _class_counts(n: int, k: int) -> list[int]:
    base, extra = divmod(n, k)
    return [base + (1 if i < extra else 0) for i in range(k)]


def generate_domain_pair(spec: DomainSpec) -> tuple[LabeledDomain, LabeledDomain]:
    """Draw the source and target domains; deterministic per seed.

    Cluster centers sit at CENTER_SCALE times the first k basis vectors
    (a regular simplex). Target samples are fresh draws from the same
    clusters, rotated in the first two coordinates and then translated.
    """
    rng = np.random.default_rng(spec.seed)
    counts = _class_counts(spec.n, spec.k)
    centers = CENTER_SCALE * np.eye(spec.k, spec.d_in)
    rot = np.eye(spec.d_in)
    c, s = math.cos(spec.rotation_angle), math.sin(spec.rotation_angle)
    rot[:2, :2] = [[c, -s], [s, c]]
    shift = np.asarray(spec.shift, dtype=np.float64)

    def draw() -> LabeledDomain:
        blocks, labels = [], []
        for cls, count in enumerate(counts):
            noise = rng.standard_normal((count, spec.d_in))
            blocks.append(centers[cls] + spec.cluster_spread * noise)
            labels.append(np.full(count, cls, dtype=np.int64))
        return LabeledDomain(np.vstack(blocks), np.concatenate(labels))

    source = draw()
    raw_target = draw()
    target = LabeledDomain(raw_target.features @ rot.T + shift, raw_target.labels)
    return source, target


@dataclass(frozen=True)
class ToyTrainConfig:
    """Trainer knobs; adapt_weight is the target entropy-minimization
    coefficient (0 disables adaptation, large values collapse it)."""

    d_feat: int = 4
    epochs: int = 30
    learning_rate: float = 0.5
    adapt_weight: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.adapt_weight < 0:
            raise ValueError("adapt_weight must be >= 0")


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - logsumexp(shifted, axis=1, keepdims=True)


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(_log_softmax(logits))


def loss_and_gradients(
    feature_map: np.ndarray,
    weights: np.ndarray,
    source_x: np.ndarray,
    source_onehot: np.ndarray,
    target_x: np.ndarray,
    adapt_weight: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Total loss (source cross-entropy + adapt_weight * mean target
    prediction entropy) and its analytic gradients w.r.t. the feature map
    (d_feat x d_in) and classifier weights (d_feat x k)."""
    ns, nt = source_x.shape[0], target_x.shape[0]
    fs = source_x @ feature_map.T
    logp_s = _log_softmax(fs @ weights)
    p_s = np.exp(logp_s)
    ce = -float((source_onehot * logp_s).sum() / ns)
    g_s = (p_s - source_onehot) / ns

    ft = target_x @ feature_map.T
    logp_t = _log_softmax(ft @ weights)
    p_t = np.exp(logp_t)
    ent = -(p_t * logp_t).sum(axis=1)
    mean_ent = float(ent.mean())
    # dH/dlogit_j = p_j * (-log p_j - H)
    g_t = (adapt_weight / nt) * p_t * (-logp_t - ent[:, None])

    loss = ce + adapt_weight * mean_ent
    grad_w = fs.T @ g_s + ft.T @ g_t
    grad_a = (weights @ g_s.T) @ source_x + (weights @ g_t.T) @ target_x
    return loss, grad_a, grad_w


def train_toy_model(
    source: LabeledDomain,
    target: LabeledDomain,
    config: ToyTrainConfig | None = None,
) -> list[EpochRecord]:
    """Run full-batch gradient descent and emit one record per epoch.

    Each record carries the classifier weights, the target features under
    the current feature map, softmax probabilities on the target, and the
    target labels. Deterministic per seed.
    """
    config = config or ToyTrainConfig()
    xs, ys = source.features, source.labels
    xt = target.features
    if xs.shape[1] != xt.shape[1]:
        raise ValueError("source and target feature dimensions differ")
    k = int(ys.max()) + 1
    if config.d_feat < k - 1:
        raise ValueError(f"d_feat must be >= k-1 = {k - 1}, got {config.d_feat}")
    onehot = np.eye(k)[ys]
    rng = np.random.default_rng(config.seed)
    d_in = xs.shape[1]
    feature_map = rng.standard_normal((config.d_feat, d_in)) / math.sqrt(d_in)
    weights = rng.standard_normal((config.d_feat, k)) / math.sqrt(config.d_feat)

    records = []
    for epoch in range(config.epochs):
        loss, grad_a, grad_w = loss_and_gradients(
            feature_map, weights, xs, onehot, xt, config.adapt_weight
        )
        if not math.isfinite(loss):
            raise ValueError(f"training diverged at epoch {epoch}: loss={loss}")
        feature_map = feature_map - config.learning_rate * grad_a
        weights = weights - config.learning_rate * grad_w
        target_feats = xt @ feature_map.T
        probs = softmax(target_feats @ weights)
        records.append(
            EpochRecord(
                epoch=epoch,
                weights=weights.copy(),
                features=target_feats,
                probabilities=probs,
                labels=target.labels.copy(),
            )
        )
    return records
