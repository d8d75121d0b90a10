"""Training-side exporter for label-free checkpoint evaluation.

Hook an ExportSession into a training loop and call export_epoch once per
epoch with the classifier weights (d x K), target-domain features (N x d),
and predictions (N x K, probabilities or logits). Tensors land as float32
``.tsr`` files next to a ``manifest.json`` that evaluation tooling consumes
directly; the manifest is rewritten atomically after every epoch, so the
run directory is valid even if training dies mid-way.

The exporter never touches model internals: which layer counts as the
feature extractor output is entirely the caller's choice. One session per
run; sessions are not safe for concurrent export.
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

__version__ = "0.1.0"
__all__ = ["ExportSession", "write_tsr", "softmax"]

_MAGIC = b"TSRD"
_VERSION = 1
_DTYPE_FLOAT32 = 0


def write_tsr(matrix: np.ndarray, path) -> None:
    """Write a 2-D array as a float32 .tsr file (magic TSRD, version 1)."""
    a = np.asarray(matrix, dtype=np.float32)
    if a.ndim != 2:
        raise ValueError(f"tensor must be 2-D, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError("tensor contains non-finite values")
    rows, cols = a.shape
    header = _MAGIC + struct.pack("<IBBQQ", _VERSION, _DTYPE_FLOAT32, 2, rows, cols)
    Path(path).write_bytes(header + np.ascontiguousarray(a, dtype="<f4").tobytes())


def softmax(logits: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class ExportSession:
    """Accumulates one run's per-epoch tensor dumps.

    Epochs must be exported in strictly increasing order. finalize() checks
    that at least one epoch was written and returns the manifest path; it is
    idempotent.
    """

    def __init__(self, out_dir, run_id: str, method: str,
                 hyperparameters: dict[str, str] | None = None):
        self.out_dir = Path(out_dir)
        self.run_id = run_id
        self.method = method
        self.hyperparameters = dict(hyperparameters or {})
        self.current_epoch: int | None = None
        self._entries: list[dict] = []
        self.out_dir.mkdir(parents=True, exist_ok=True)

    @property
    def manifest_path(self) -> Path:
        return self.out_dir / "manifest.json"

    def export_epoch(self, epoch: int, weights, features, outputs,
                     labels=None, *, logits: bool = False) -> None:
        """Dump one epoch's weights (d x K), features (N x d), and
        predictions (N x K). Pass logits=True to have softmax applied."""
        if self.current_epoch is not None and epoch <= self.current_epoch:
            raise ValueError(
                f"epoch {epoch} exported after epoch {self.current_epoch}; "
                "epochs must be strictly increasing"
            )
        w = np.asarray(weights, dtype=np.float64)
        f = np.asarray(features, dtype=np.float64)
        p = np.asarray(outputs, dtype=np.float64)
        if w.ndim != 2 or f.ndim != 2 or p.ndim != 2:
            raise ValueError("weights, features, and outputs must all be 2-D")
        d, k = w.shape
        n = f.shape[0]
        if k < 2:
            raise ValueError(f"need at least 2 classes, got {k}")
        if f.shape[1] != d:
            raise ValueError(f"features have {f.shape[1]} columns, weights have {d} rows")
        if p.shape != (n, k):
            raise ValueError(f"outputs are {p.shape}, expected ({n}, {k})")
        if logits:
            p = softmax(p)
        stem = f"epoch_{epoch:04d}"
        entry = {
            "epoch": epoch,
            "weights": f"{stem}_weights.tsr",
            "features": f"{stem}_features.tsr",
            "probabilities": f"{stem}_probabilities.tsr",
            "labels": None,
        }
        write_tsr(w, self.out_dir / entry["weights"])
        write_tsr(f, self.out_dir / entry["features"])
        write_tsr(p, self.out_dir / entry["probabilities"])
        if labels is not None:
            lab = np.asarray(labels)
            if lab.shape != (n,):
                raise ValueError(f"labels have shape {lab.shape}, expected ({n},)")
            entry["labels"] = f"{stem}_labels.tsr"
            write_tsr(lab.astype(np.float64)[:, None], self.out_dir / entry["labels"])
        self._entries.append(entry)
        self.current_epoch = epoch
        self._rewrite_manifest()

    def _rewrite_manifest(self) -> None:
        doc = {
            "run_id": self.run_id,
            "method": self.method,
            "hyperparameters": self.hyperparameters,
            "epochs": self._entries,
        }
        tmp = self.manifest_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(doc, indent=2) + "\n")
        os.replace(tmp, self.manifest_path)

    def finalize(self) -> Path:
        """Return the manifest path after checking the session is non-empty."""
        if not self._entries:
            raise ValueError("cannot finalize a session with no exported epochs")
        return self.manifest_path
