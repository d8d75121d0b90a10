"""Use the score series to pick checkpoints and compare runs, label-free.

The saturation level S_m is the coefficient of variation of the transfer
score over a trailing window of tau epochs. Once S_m < zeta the score has
plateaued: stop, and keep the best-scoring epoch in that window. When a run
never saturates (the negative-transfer case), the final window still gives
a cost-effective pick. Ranking runs by last-epoch T selects a method or
hyperparameter without touching target labels.

Run demos/01_synthetic_runs.py first to create demos/out/.
"""

from pathlib import Path

import numpy as np

from tscore import (
    ScoreSeries,
    SelectionConfig,
    c_entropy,
    load_run,
    pearson,
    select_checkpoint,
    transfer_score,
)

OUT = Path(__file__).resolve().parent / "out"


def score_series(run):
    reports = [transfer_score(record) for record in run.records()]
    series = ScoreSeries(
        tuple(r.epoch for r in reports), tuple(r.transfer_score for r in reports)
    )
    return reports, series


def main():
    runs = {name: load_run(OUT / name) for name in ("healthy", "excessive")}
    config = SelectionConfig()  # tau=3, zeta=0.01

    last = {}
    for name, run in runs.items():
        reports, series = score_series(run)
        result = select_checkpoint(series, config)
        accs = [r.accuracy for r in reports]
        trace = [f"{v:.3f}" if v is not None else "  -  " for v in result.saturation_trace]
        print(f"== {name} run")
        print(f"  saturation trace (tau={config.tau}): {' '.join(trace[:12])} ...")
        print(
            f"  {'saturated' if result.saturated else 'no saturation, fallback window'}; "
            f"selected epoch {result.selected_epoch} "
            f"(accuracy {accs[result.selected_epoch]:.3f} vs last {accs[-1]:.3f})"
        )
        print(f"  Pearson(T, accuracy) over the run: {pearson([r.transfer_score for r in reports], accs):+.3f}")
        last[name] = reports[-1]

    print("\n== label-free run comparison at the last epoch")
    order = sorted(last, key=lambda n: -last[n].transfer_score)
    for name in order:
        r = last[name]
        print(
            f"  {name:9s}: T = {r.transfer_score:+.4f} "
            f"(true accuracy {r.accuracy:.3f}, not used for the ranking)"
        )
    print(f"  -> pick: {order[0]}")

    print("\n== why not just mean prediction entropy (the C-entropy baseline)?")
    for name, run in runs.items():
        probs = run.load(run.epochs[-1]).probabilities
        print(f"  {name:9s}: C-entropy = {c_entropy(probs):.4f} (lower = more confident)")
    print("  The collapsed run is extremely confident, so confidence alone")
    print("  would pick it; the composed score does not fall for that.")


if __name__ == "__main__":
    main()
