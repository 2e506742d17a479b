"""Synthetic embedding datasets: per-identity Gaussian means on the unit
sphere with configurable noise, written in the standard on-disk format."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .dataset import DatasetBundle, FeatureMatrix, Sample, write_embeddings, write_meta


def make_synthetic(identities: int, per_id: int, dim: int, noise: float,
                   seed: int = 0, name: str = "synthetic") -> DatasetBundle:
    if identities < 1 or per_id < 1 or dim < 1:
        raise ValueError("identities, per_id, and dim must all be >= 1")
    if noise < 0:
        raise ValueError(f"noise must be non-negative, got {noise}")
    rng = np.random.default_rng(seed)
    means = rng.standard_normal((identities, dim))
    means /= np.linalg.norm(means, axis=1, keepdims=True)

    n = identities * per_id
    ident_idx = np.repeat(np.arange(identities), per_id)
    features = means[ident_idx] + noise * rng.standard_normal((n, dim))
    samples = tuple(
        Sample(sample_id=i, identity=f"id{ident_idx[i]:04d}") for i in range(n)
    )
    return DatasetBundle(
        samples=samples,
        features=FeatureMatrix(features, normalized=False),
        name=name,
    )


def write_synthetic(out_dir: str | Path, identities: int, per_id: int, dim: int,
                    noise: float, seed: int = 0) -> DatasetBundle:
    """Generate and write embeddings.csv + meta.jsonl under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bundle = make_synthetic(identities, per_id, dim, noise, seed=seed, name=out.name)
    write_embeddings(bundle.features.rows, out / "embeddings.csv")
    write_meta(bundle.samples, out / "meta.jsonl")
    return bundle
