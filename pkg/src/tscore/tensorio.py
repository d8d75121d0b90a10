"""Tensor dump and run-manifest I/O.

On-disk tensor format (extension ``.tsr``)::

    magic   4 bytes         b"TSRD"
    version u32 LE          1
    dtype   u8              0 = float32, 1 = float64
    ndim    u8              2 (this engine only handles matrices)
    dims    ndim x u64 LE   rows, cols
    payload row-major little-endian floats

float32 payloads are widened to float64 on load. A run is a directory with a
``manifest.json`` naming per-epoch tensor files (paths relative to the
manifest's directory)::

    {"run_id": str, "method": str, "hyperparameters": {str: str},
     "epochs": [{"epoch": int, "weights": path, "features": path,
                 "probabilities": path, "labels": path|null}]}
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

MAGIC = b"TSRD"
VERSION = 1
DTYPE_CODES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
DTYPE_NAMES = {"float32": 0, "float64": 1}

PROB_ROW_SUM_TOL = 1e-4
MIN_WEIGHT_COL_NORM = 1e-12


class IngestionError(Exception):
    """Base for everything that makes input data unusable."""


class TensorFormatError(IngestionError):
    """Structurally broken .tsr file (magic, version, dtype, ndim, payload size)."""


class TensorValueError(IngestionError):
    """A .tsr payload containing NaN or infinity."""


class ManifestError(IngestionError):
    """Unparseable or inconsistent run manifest, or a missing tensor file."""


class ValidationError(IngestionError):
    """An epoch record violating a shape or value invariant."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def as_matrix(data, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array with finite entries."""
    a = np.asarray(data, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite values")
    return a


def read_tensor(path) -> np.ndarray:
    """Read a .tsr file into a read-only 2-D float64 array.

    Raises TensorFormatError for structural problems and TensorValueError
    for non-finite payload values, each with a distinct message.
    """
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise TensorFormatError(f"{path}: bad magic")
    if len(blob) < 10:
        raise TensorFormatError(f"{path}: truncated header")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != VERSION:
        raise TensorFormatError(f"{path}: unsupported version {version}")
    dtype_code = blob[8]
    if dtype_code not in DTYPE_CODES:
        raise TensorFormatError(f"{path}: unsupported dtype code {dtype_code}")
    ndim = blob[9]
    if ndim != 2:
        raise TensorFormatError(f"{path}: unsupported ndim {ndim}")
    header_end = 10 + 8 * ndim
    if len(blob) < header_end:
        raise TensorFormatError(f"{path}: truncated dims")
    rows, cols = struct.unpack_from("<QQ", blob, 10)
    dtype = DTYPE_CODES[dtype_code]
    expected = header_end + rows * cols * dtype.itemsize
    if len(blob) < expected:
        raise TensorFormatError(f"{path}: truncated payload")
    if len(blob) > expected:
        raise TensorFormatError(f"{path}: trailing bytes after payload")
    flat = np.frombuffer(blob, dtype=dtype, count=rows * cols, offset=header_end)
    a = flat.astype(np.float64).reshape(rows, cols)
    if not np.all(np.isfinite(a)):
        raise TensorValueError(f"{path}: non-finite values in payload")
    return _frozen(a)


def write_tensor(matrix, path, *, dtype: str = "float64") -> None:
    """Write a matrix as a .tsr file. Bytes are deterministic for equal inputs."""
    a = as_matrix(matrix)
    if dtype not in DTYPE_NAMES:
        raise ValueError(f"unsupported dtype {dtype!r}")
    rows, cols = a.shape
    header = MAGIC + struct.pack("<IBBQQ", VERSION, DTYPE_NAMES[dtype], 2, rows, cols)
    payload = np.ascontiguousarray(a, dtype=DTYPE_CODES[DTYPE_NAMES[dtype]]).tobytes()
    Path(path).write_bytes(header + payload)


@dataclass(frozen=True)
class EpochPaths:
    epoch: int
    weights: str
    features: str
    probabilities: str
    labels: str | None = None


@dataclass(frozen=True)
class RunManifest:
    run_id: str
    method: str
    hyperparameters: dict[str, str]
    epochs: tuple[EpochPaths, ...]


@dataclass(frozen=True)
class EpochRecord:
    """One checkpoint's tensors: weights d x K, features N x d, probabilities N x K."""

    epoch: int
    weights: np.ndarray
    features: np.ndarray
    probabilities: np.ndarray
    labels: np.ndarray | None = None

    @property
    def n_classes(self) -> int:
        return self.weights.shape[1]


def validate_record(record: EpochRecord) -> EpochRecord:
    """Check every epoch-record invariant.

    Returns the record with probability rows renormalized to sum exactly
    to 1; raises ValidationError (naming the epoch) otherwise. No partially
    valid record is ever returned.
    """
    e = record.epoch
    w, f, p = record.weights, record.features, record.probabilities
    d, k = w.shape
    if k < 2:
        raise ValidationError(f"epoch {e}: weights need at least 2 columns, got {k}")
    if d < 1:
        raise ValidationError(f"epoch {e}: weights need at least 1 row")
    if f.shape[1] != d:
        raise ValidationError(
            f"epoch {e}: shape mismatch: features have {f.shape[1]} columns, weights have {d} rows"
        )
    n = f.shape[0]
    if p.shape != (n, k):
        raise ValidationError(
            f"epoch {e}: shape mismatch: probabilities are {p.shape}, expected ({n}, {k})"
        )
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValidationError(f"epoch {e}: probabilities outside [0, 1]")
    sums = p.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > PROB_ROW_SUM_TOL):
        raise ValidationError(f"epoch {e}: probabilities not normalized")
    col_norms = np.linalg.norm(w, axis=0)
    if np.any(col_norms < MIN_WEIGHT_COL_NORM):
        raise ValidationError(f"epoch {e}: zero-norm weight column")
    labels = record.labels
    if labels is not None:
        labels = np.asarray(labels)
        if labels.shape != (n,):
            raise ValidationError(
                f"epoch {e}: labels have shape {labels.shape}, expected ({n},)"
            )
        if np.any(labels < 0) or np.any(labels >= k):
            raise ValidationError(f"epoch {e}: label outside [0, {k})")
        labels = _frozen(labels.astype(np.int64))
    return EpochRecord(
        epoch=e,
        weights=_frozen(np.asarray(w, dtype=np.float64)),
        features=_frozen(np.asarray(f, dtype=np.float64)),
        probabilities=_frozen(p / sums[:, None]),
        labels=labels,
    )


def _load_labels(path: Path, epoch: int) -> np.ndarray:
    a = read_tensor(path)
    if a.shape[1] != 1:
        raise ValidationError(f"epoch {epoch}: label tensor must be N x 1, got {a.shape}")
    flat = a[:, 0]
    if np.any(flat != np.floor(flat)):
        raise ValidationError(f"epoch {epoch}: labels are not exact integers")
    return flat.astype(np.int64)


class Run:
    """A manifest plus lazily loadable epoch records.

    Records are loaded and validated on demand; loading epoch k never
    touches any other epoch's files, so records may be loaded concurrently.
    """

    def __init__(self, manifest: RunManifest, base_dir: Path):
        self.manifest = manifest
        self.base_dir = Path(base_dir)
        self._by_epoch = {ep.epoch: ep for ep in manifest.epochs}

    def __len__(self) -> int:
        return len(self.manifest.epochs)

    @property
    def epochs(self) -> list[int]:
        return [ep.epoch for ep in self.manifest.epochs]

    def _resolve(self, rel: str) -> Path:
        return self.base_dir / rel

    def load(self, epoch: int) -> EpochRecord:
        """Load and validate the record for one epoch index."""
        if epoch not in self._by_epoch:
            raise ManifestError(f"run {self.manifest.run_id!r} has no epoch {epoch}")
        ep = self._by_epoch[epoch]
        record = EpochRecord(
            epoch=epoch,
            weights=read_tensor(self._resolve(ep.weights)),
            features=read_tensor(self._resolve(ep.features)),
            probabilities=read_tensor(self._resolve(ep.probabilities)),
            labels=_load_labels(self._resolve(ep.labels), epoch) if ep.labels else None,
        )
        return validate_record(record)

    def records(self) -> Iterator[EpochRecord]:
        for ep in self.manifest.epochs:
            yield self.load(ep.epoch)


def _manifest_from_json(doc, path: Path) -> RunManifest:
    try:
        epochs = []
        for entry in doc["epochs"]:
            epochs.append(
                EpochPaths(
                    epoch=int(entry["epoch"]),
                    weights=entry["weights"],
                    features=entry["features"],
                    probabilities=entry["probabilities"],
                    labels=entry.get("labels"),
                )
            )
        return RunManifest(
            run_id=doc["run_id"],
            method=doc["method"],
            hyperparameters=dict(doc["hyperparameters"]),
            epochs=tuple(epochs),
        )
    except (KeyError, TypeError) as exc:
        raise ManifestError(f"{path}: malformed manifest ({exc})") from exc


def load_run(manifest_path) -> Run:
    """Load a run manifest; epoch records stay lazy.

    Accepts either the manifest file or its directory (expects
    ``manifest.json`` inside). Checks that epoch indices are strictly
    increasing and that every referenced tensor file exists.
    """
    path = Path(manifest_path)
    if path.is_dir():
        path = path / "manifest.json"
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ManifestError(f"{path}: manifest not found")
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON ({exc})") from exc
    manifest = _manifest_from_json(doc, path)
    indices = [ep.epoch for ep in manifest.epochs]
    if any(b <= a for a, b in zip(indices, indices[1:])):
        raise ManifestError(f"{path}: epoch indices not strictly increasing: {indices}")
    base = path.parent
    for ep in manifest.epochs:
        for rel in (ep.weights, ep.features, ep.probabilities, ep.labels):
            if rel is not None and not (base / rel).exists():
                raise ManifestError(f"{path}: epoch {ep.epoch}: missing file {rel}")
    return Run(manifest, base)


def write_manifest(manifest: RunManifest, path) -> None:
    doc = {
        "run_id": manifest.run_id,
        "method": manifest.method,
        "hyperparameters": manifest.hyperparameters,
        "epochs": [
            {
                "epoch": ep.epoch,
                "weights": ep.weights,
                "features": ep.features,
                "probabilities": ep.probabilities,
                "labels": ep.labels,
            }
            for ep in manifest.epochs
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def write_run(
    records: Sequence[EpochRecord],
    out_dir,
    run_id: str,
    method: str,
    hyperparameters: Mapping[str, str] | None = None,
    *,
    dtype: str = "float32",
) -> Path:
    """Export epoch records as .tsr files plus manifest; returns the manifest path.

    float32 by default, matching what training-side exporters dump; the
    loader widens back to float64.
    """
    if not records:
        raise ValueError("write_run needs at least one record")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for rec in records:
        stem = f"epoch_{rec.epoch:04d}"
        names = {
            "weights": f"{stem}_weights.tsr",
            "features": f"{stem}_features.tsr",
            "probabilities": f"{stem}_probabilities.tsr",
        }
        write_tensor(rec.weights, out / names["weights"], dtype=dtype)
        write_tensor(rec.features, out / names["features"], dtype=dtype)
        write_tensor(rec.probabilities, out / names["probabilities"], dtype=dtype)
        labels_name = None
        if rec.labels is not None:
            labels_name = f"{stem}_labels.tsr"
            write_tensor(
                np.asarray(rec.labels, dtype=np.float64)[:, None],
                out / labels_name,
                dtype=dtype,
            )
        entries.append(EpochPaths(rec.epoch, names["weights"], names["features"],
                                  names["probabilities"], labels_name))
    manifest = RunManifest(
        run_id=run_id,
        method=method,
        hyperparameters=dict(hyperparameters or {}),
        epochs=tuple(entries),
    )
    manifest_path = out / "manifest.json"
    write_manifest(manifest, manifest_path)
    return manifest_path
