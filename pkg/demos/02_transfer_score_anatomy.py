"""Take the transfer score apart on real epoch records.

T = -U + H + |M| / ln K, where
  U  penalizes a classifier whose weight vectors are unevenly spread,
  H  rewards target features that form clusters rather than a uniform blob,
  M  rewards predictions that are individually confident yet class-balanced.

Run demos/01_synthetic_runs.py first to create demos/out/.
"""

import math
from pathlib import Path

import numpy as np

from tscore import (
    HopkinsConfig,
    hopkins_statistic,
    ideal_angle,
    load_run,
    mutual_information,
    transfer_score,
    uniformity,
)

OUT = Path(__file__).resolve().parent / "out"


def show_uniformity_geometry():
    print("== uniformity and the ideal angle")
    for k in (2, 3, 5, 31):
        print(f"  K={k:2d}: ideal pairwise angle = {math.degrees(ideal_angle(k)):7.3f} deg")
    # a perfectly even 3-way split of the plane scores 0
    spread = np.deg2rad([0.0, 120.0, 240.0])
    even = np.vstack([np.cos(spread), np.sin(spread)])
    lopsided = even.copy()
    lopsided[:, 2] = [0.3, 0.1]  # drag one hyperplane toward another
    print(f"  even 3-way split:     U = {uniformity(even):.2e}")
    print(f"  lopsided classifier:  U = {uniformity(lopsided):.4f}")


def show_hopkins_behavior():
    print("\n== Hopkins statistic: clustering tendency without labels")
    rng = np.random.default_rng(0)
    config = HopkinsConfig(m=100, repetitions=10, seed=1)
    uniform = rng.random((1500, 2))
    blobs = np.vstack([
        rng.normal(0, 0.03, (500, 2)),
        rng.normal(0, 0.03, (500, 2)) + [1.0, 0.0],
        rng.normal(0, 0.03, (500, 2)) + [0.0, 1.0],
    ])
    print(f"  uniform square:  H = {hopkins_statistic(uniform, config):.3f}  (null ~ 0.5)")
    print(f"  three blobs:     H = {hopkins_statistic(blobs, config):.3f}  (-> 1 when clustered)")


def show_mutual_information():
    print("\n== mutual information: confidence plus diversity, in nats")
    confident_balanced = np.eye(3)[np.arange(12) % 3]
    confident_collapsed = np.tile([1.0, 0.0, 0.0], (12, 1))
    hedging = np.full((12, 3), 1.0 / 3.0)
    for name, p in (
        ("confident + balanced", confident_balanced),
        ("confident + collapsed", confident_collapsed),
        ("hedging everywhere", hedging),
    ):
        print(f"  {name:22s}: M = {mutual_information(p):.4f}  (max = ln 3 = {math.log(3):.4f})")


def score_exported_runs():
    print("\n== per-epoch transfer score on the exported runs")
    for name in ("healthy", "excessive"):
        run = load_run(OUT / name)
        print(f"  {name} run:")
        for record in run.records():
            if record.epoch % 10 != 9 and record.epoch != 0:
                continue
            r = transfer_score(record)
            print(
                f"    epoch {r.epoch:2d}: U={r.uniformity:.3f} H={r.hopkins:.3f} "
                f"M={r.mutual_info:.3f}  T={r.transfer_score:+.3f}  "
                f"(accuracy {r.accuracy:.3f}, hidden from the metric)"
            )


def main():
    show_uniformity_geometry()
    show_hopkins_behavior()
    show_mutual_information()
    if (OUT / "healthy" / "manifest.json").exists():
        score_exported_runs()
    else:
        print(f"\n(run demos/01_synthetic_runs.py to populate {OUT} for the last section)")


if __name__ == "__main__":
    main()
