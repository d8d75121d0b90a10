"""Saturation level of a transfer-score series and the checkpoint rule.

The saturation level at position m is the coefficient of variation of the
trailing window of tau scores; once it drops below zeta the series has
plateaued and the best-scoring epoch inside that window is the pick.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ScoreSeries:
    """Per-epoch transfer scores, ordered by strictly increasing epoch index."""

    epochs: tuple[int, ...]
    scores: tuple[float, ...]

    def __post_init__(self):
        if len(self.epochs) != len(self.scores):
            raise ValueError("epochs and scores must have equal length")
        if len(self.epochs) < 1:
            raise ValueError("series must not be empty")
        if any(b <= a for a, b in zip(self.epochs, self.epochs[1:])):
            raise ValueError("epoch indices must be strictly increasing")

    def __len__(self) -> int:
        return len(self.epochs)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[int, float]]) -> "ScoreSeries":
        return cls(tuple(e for e, _ in pairs), tuple(float(s) for _, s in pairs))


@dataclass(frozen=True)
class SelectionConfig:
    tau: int = 3
    zeta: float = 0.01

    def __post_init__(self):
        if self.tau < 2:
            raise ValueError(f"window size tau must be >= 2, got {self.tau}")
        if not self.zeta > 0:
            raise ValueError(f"threshold zeta must be > 0, got {self.zeta}")


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of the window rule; saturation_trace is None wherever S_m is
    undefined (the first tau-1 positions, and windows whose mean is not
    positive)."""

    selected_epoch: int
    saturation_trace: tuple[float | None, ...]
    saturated: bool
    window_start: int


def saturation_level(series: ScoreSeries, m: int, tau: int) -> float:
    """Coefficient of variation sigma/mu over the tau scores ending at
    position m (0-based), with population standard deviation.

    The window mean must be positive: a zero mean leaves the ratio
    undefined and a negative one would flip its sign, so both are errors
    rather than silently signed or infinite values.
    """
    if tau < 2:
        raise ValueError(f"window size tau must be >= 2, got {tau}")
    if m < tau - 1 or m >= len(series):
        raise ValueError(
            f"no full window of {tau} scores ends at position {m} "
            f"in a series of length {len(series)}"
        )
    window = np.asarray(series.scores[m - tau + 1 : m + 1], dtype=np.float64)
    mu = window.mean()
    if mu <= 0.0:
        raise ValueError(f"window mean {mu} is not positive; saturation level undefined")
    return float(window.std() / mu)


def select_checkpoint(series: ScoreSeries, config: SelectionConfig | None = None) -> SelectionResult:
    """Pick a checkpoint: the highest-scoring epoch inside the first window
    whose saturation level falls below zeta (strict), ties to the earliest
    epoch.

    Windows with a non-positive mean (scores early in training can be
    negative) have no defined saturation level; they appear as None in the
    trace and can never trigger. If no window saturates, falls back to the
    final window with saturated=False, a cost-effective stop rather than a
    detected plateau.
    """
    config = config or SelectionConfig()
    tau = config.tau
    n = len(series)
    if n < tau:
        raise ValueError(f"series has {n} epochs, need at least tau={tau}")
    trace: list[float | None] = [None] * (tau - 1)
    for m in range(tau - 1, n):
        window_mean = float(np.mean(series.scores[m - tau + 1 : m + 1]))
        trace.append(saturation_level(series, m, tau) if window_mean > 0.0 else None)
    trigger = None
    for m in range(tau - 1, n):
        if trace[m] is not None and trace[m] < config.zeta:
            trigger = m
            break
    saturated = trigger is not None
    m_end = trigger if saturated else n - 1
    start = m_end - tau + 1
    window_scores = series.scores[start : m_end + 1]
    best = start + int(np.argmax(window_scores))
    return SelectionResult(
        selected_epoch=series.epochs[best],
        saturation_trace=tuple(trace),
        saturated=saturated,
        window_start=series.epochs[start],
    )
