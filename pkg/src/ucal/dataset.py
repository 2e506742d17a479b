"""Embedding dataset loading, validation, and cosine similarity.

On-disk format: a headerless CSV of floats (one row per sample, ``.`` decimal
separator) plus a JSONL metadata file with one object per sample in
``sample_id`` order: ``{"sample_id": int, "identity": str|null,
"camera": str|null, "image": str|null}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DatasetError(ValueError):
    """An embeddings or metadata file violates the on-disk contract."""


@dataclass(frozen=True)
class Sample:
    """One sample's metadata. ``identity`` is ground truth, consumed only by
    the simulated oracle and the evaluation metrics."""

    sample_id: int
    identity: str | None = None
    camera: str | None = None
    image_ref: str | None = None


@dataclass(frozen=True)
class FeatureMatrix:
    """An (N, D) float64 embedding matrix, immutable after construction."""

    rows: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        rows = np.array(self.rows, dtype=np.float64, order="C")
        if rows.ndim != 2:
            raise DatasetError(f"feature matrix must be 2-D, got shape {rows.shape}")
        if not np.isfinite(rows).all():
            raise DatasetError("feature matrix contains non-finite values")
        if self.normalized:
            norms = np.linalg.norm(rows, axis=1)
            bad = np.nonzero(np.abs(norms - 1.0) > 1e-9)[0]
            if bad.size:
                raise DatasetError(f"row {bad[0]} marked normalized but has norm {norms[bad[0]]!r}")
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class DatasetBundle:
    samples: tuple[Sample, ...]
    features: FeatureMatrix
    name: str

    def __post_init__(self) -> None:
        if len(self.samples) != self.features.n:
            raise DatasetError(
                f"{len(self.samples)} metadata rows vs {self.features.n} feature rows"
            )

    @property
    def n(self) -> int:
        return len(self.samples)

    def identities(self) -> list[str | None]:
        return [s.identity for s in self.samples]


def load_dataset(embeddings_path: str | Path, meta_path: str | Path,
                 name: str | None = None) -> DatasetBundle:
    """Load and validate a dataset; features come back unnormalized.

    Errors carry 1-based line numbers of the offending row.
    """
    embeddings_path = Path(embeddings_path)
    meta_path = Path(meta_path)

    rows: list[list[float]] = []
    dim: int | None = None
    with embeddings_path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                values = [float(tok) for tok in line.split(",")]
            except ValueError as exc:
                raise DatasetError(f"{embeddings_path}: bad float at line {lineno}: {exc}") from exc
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise DatasetError(
                    f"{embeddings_path}: dimension mismatch at line {lineno}: "
                    f"expected {dim} columns, got {len(values)}"
                )
            if not all(np.isfinite(values)):
                raise DatasetError(f"{embeddings_path}: non-finite value at line {lineno}")
            rows.append(values)
    if not rows:
        raise DatasetError(f"{embeddings_path}: no feature rows")

    samples: list[Sample] = []
    with meta_path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{meta_path}: bad JSON at line {lineno}: {exc}") from exc
            sid = obj.get("sample_id")
            if not isinstance(sid, int) or isinstance(sid, bool):
                raise DatasetError(f"{meta_path}: missing integer sample_id at line {lineno}")
            expected = len(samples)
            if sid != expected:
                kind = "duplicate" if sid < expected else "non-contiguous"
                raise DatasetError(
                    f"{meta_path}: {kind} sample_id {sid} at line {lineno} (expected {expected})"
                )
            samples.append(
                Sample(
                    sample_id=sid,
                    identity=obj.get("identity"),
                    camera=obj.get("camera"),
                    image_ref=obj.get("image"),
                )
            )

    if len(samples) != len(rows):
        raise DatasetError(
            f"row count mismatch: {len(rows)} feature rows vs {len(samples)} metadata rows"
        )
    features = FeatureMatrix(np.asarray(rows, dtype=np.float64), normalized=False)
    if name is None:
        name = embeddings_path.resolve().parent.name
    return DatasetBundle(samples=tuple(samples), features=features, name=name)


def save_dataset(bundle: DatasetBundle, embeddings_path: str | Path,
                 meta_path: str | Path) -> None:
    """Write the canonical on-disk form (round-trips through load_dataset)."""
    write_embeddings(bundle.features.rows, embeddings_path)
    write_meta(bundle.samples, meta_path)


def write_embeddings(rows: np.ndarray, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for row in np.asarray(rows, dtype=np.float64):
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def write_meta(samples: tuple[Sample, ...] | list[Sample], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for s in samples:
            obj = {
                "sample_id": s.sample_id,
                "identity": s.identity,
                "camera": s.camera,
                "image": s.image_ref,
            }
            fh.write(json.dumps(obj, separators=(",", ":")))
            fh.write("\n")


def l2_normalize(features: FeatureMatrix) -> FeatureMatrix:
    """Scale every row to unit Euclidean norm. Idempotent; zero rows are an error."""
    norms = np.linalg.norm(features.rows, axis=1)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise DatasetError(f"cannot normalize zero-norm row {zero[0]}")
    return FeatureMatrix(features.rows / norms[:, None], normalized=True)


def similarity_matrix(features: FeatureMatrix) -> np.ndarray:
    """Full cosine-similarity matrix of a normalized FeatureMatrix.

    Exactly symmetric (the upper triangle is computed once and mirrored),
    unit diagonal, entries clipped to [-1, 1]. Returned read-only.
    """
    if not features.normalized:
        raise DatasetError("similarity_matrix requires L2-normalized features")
    s = features.rows @ features.rows.T
    upper = np.triu(s, 1)
    s = upper + upper.T
    np.clip(s, -1.0, 1.0, out=s)
    np.fill_diagonal(s, 1.0)
    s.flags.writeable = False
    return s


def unit_interval_similarity(s: np.ndarray | float) -> np.ndarray | float:
    """Map cosine similarity from [-1, 1] to [0, 1], preserving order."""
    return (s + 1.0) / 2.0
