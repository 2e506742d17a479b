"""Trainable embedding head and the centroid-contrastive objective.

The head is a linear map followed by L2 normalization, standing in for a
full feature encoder: output embeddings live on the unit sphere, and one
refinement step is a plain gradient-descent update of the weights against the
current cluster centroids (held constant during the step).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .clustering import OUTLIER, ClusterState
from .dataset import FeatureMatrix


@dataclass(frozen=True)
class LinearHead:
    """Linear transform (d_in, d_out) with unit-norm outputs."""

    weights: np.ndarray
    learning_rate: float = 1e-2
    tau: float = 0.05

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 2:
            raise ValueError("weights must be a 2-D matrix")
        if not np.isfinite(w).all():
            raise ValueError("weights must be finite")
        if self.tau <= 0:
            raise ValueError(f"temperature must be positive, got {self.tau}")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @classmethod
    def create(cls, d_in: int, d_out: int | None = None, *, learning_rate: float = 1e-2,
               tau: float = 0.05, seed: int = 0) -> "LinearHead":
        """Identity weights when d_out == d_in, otherwise a random orthonormal
        map from a fixed seed."""
        if d_out is None or d_out == d_in:
            w = np.eye(d_in)
        else:
            rng = np.random.default_rng(seed)
            q, _ = np.linalg.qr(rng.standard_normal((max(d_in, d_out), max(d_in, d_out))))
            w = q[:d_in, :d_out]
        return cls(weights=w, learning_rate=learning_rate, tau=tau)

    def transform(self, rows: np.ndarray) -> np.ndarray:
        """Raw linear outputs, before normalization."""
        return np.asarray(rows, dtype=np.float64) @ self.weights

    def embed(self, rows: np.ndarray) -> np.ndarray:
        """Unit-norm output embeddings."""
        z = self.transform(rows)
        norms = np.linalg.norm(z, axis=-1, keepdims=True)
        if np.any(norms == 0.0):
            raise ValueError("linear head produced a zero vector; cannot normalize")
        return z / norms


@dataclass(frozen=True)
class CentroidBank:
    """Unit centroids in head-output space, one per cluster, in cluster order."""

    centroids: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.centroids, dtype=np.float64)
        if c.ndim != 2:
            raise ValueError("centroid bank must be 2-D")
        norms = np.linalg.norm(c, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("centroid bank rows must be unit norm")
        c.flags.writeable = False
        object.__setattr__(self, "centroids", c)

    @property
    def n(self) -> int:
        return self.centroids.shape[0]


def centroid_bank(head: LinearHead, state: ClusterState, features: FeatureMatrix) -> CentroidBank:
    """Current clusters' centroids in head-output space (re-normalized means)."""
    emb = head.embed(features.rows)
    rows = []
    for c in state.clusters:
        mean = emb[list(c.members)].mean(axis=0)
        norm = np.linalg.norm(mean)
        if norm == 0.0:
            raise ValueError(f"cluster {c.cluster_id} has a zero-mean embedding")
        rows.append(mean / norm)
    return CentroidBank(np.asarray(rows))


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def contrastive_loss(x: np.ndarray, bank: CentroidBank, k: int, tau: float) -> float:
    """Cross-entropy of the sample against its assigned centroid:
    -log softmax(x . c_i / tau)[k], computed with max-subtraction."""
    if tau <= 0:
        raise ValueError(f"temperature must be positive, got {tau}")
    if not 0 <= k < bank.n:
        raise ValueError(f"centroid index {k} out of range")
    logits = (bank.centroids @ np.asarray(x, dtype=np.float64)) / tau
    return float(-_log_softmax(logits)[k])


def contrastive_gradient(x: np.ndarray, bank: CentroidBank, k: int, tau: float) -> np.ndarray:
    """Gradient of the loss with respect to the embedding:
    (sum_i p_i c_i - c_k) / tau with p = softmax(x . c / tau)."""
    if tau <= 0:
        raise ValueError(f"temperature must be positive, got {tau}")
    if not 0 <= k < bank.n:
        raise ValueError(f"centroid index {k} out of range")
    logits = (bank.centroids @ np.asarray(x, dtype=np.float64)) / tau
    p = np.exp(_log_softmax(logits))
    return (p @ bank.centroids - bank.centroids[k]) / tau


def refine_step(head: LinearHead, batch: np.ndarray | list[int], state: ClusterState,
                features: FeatureMatrix) -> tuple[LinearHead, float]:
    """One gradient-descent step of the head on the mean batch loss.

    Centroids are recomputed in head-output space before the step and treated
    as constants during it. Returns the updated head and the mean loss at the
    pre-step weights. Outlier samples are rejected.
    """
    batch = np.asarray(batch, dtype=np.int64)
    assigned = state.assignment[batch]
    if np.any(assigned == OUTLIER):
        bad = batch[np.nonzero(assigned == OUTLIER)[0][0]]
        raise ValueError(f"batch sample {bad} is an outlier in the current state")

    bank = centroid_bank(head, state, features)
    # Cluster id -> row index in the bank (clusters tuple order).
    bank_index = {c.cluster_id: i for i, c in enumerate(state.clusters)}
    targets = np.asarray([bank_index[cid] for cid in assigned], dtype=np.int64)

    inputs = features.rows[batch]
    z = head.transform(inputs)
    z_norms = np.linalg.norm(z, axis=1, keepdims=True)
    if np.any(z_norms == 0.0):
        raise ValueError("linear head produced a zero vector; cannot normalize")
    y = z / z_norms

    logits = (y @ bank.centroids.T) / head.tau
    log_p = _log_softmax(logits)
    b = batch.shape[0]
    loss = float(-log_p[np.arange(b), targets].mean())

    p = np.exp(log_p)
    d_y = (p @ bank.centroids - bank.centroids[targets]) / head.tau
    # Chain through normalization: d_z = (d_y - (d_y . y) y) / ||z||.
    d_z = (d_y - (d_y * y).sum(axis=1, keepdims=True) * y) / z_norms
    d_w = inputs.T @ d_z / b

    new_weights = head.weights - head.learning_rate * d_w
    return replace(head, weights=new_weights), loss
