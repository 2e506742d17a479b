"""Clustering quality against ground truth, retrieval metrics, and the
per-epoch report record.

Outliers count as singleton clusters in every ground-truth comparison, so an
over-aggressive density threshold is penalized instead of silently ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .clustering import OUTLIER, ClusterState


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    n_clusters: int
    n_outliers: int
    queries_issued: int
    cumulative_m: int
    cost_percent: float
    pairwise_precision: float | None
    pairwise_recall: float | None
    pairwise_f1: float | None
    nmi: float | None

    def to_json_line(self) -> str:
        return json.dumps({
            "epoch": self.epoch,
            "n_clusters": self.n_clusters,
            "n_outliers": self.n_outliers,
            "queries_issued": self.queries_issued,
            "cumulative_m": self.cumulative_m,
            "cost_percent": self.cost_percent,
            "pairwise_precision": self.pairwise_precision,
            "pairwise_recall": self.pairwise_recall,
            "pairwise_f1": self.pairwise_f1,
            "nmi": self.nmi,
        }, separators=(",", ":"))

    @classmethod
    def from_json_line(cls, line: str) -> "EpochMetrics":
        return cls(**json.loads(line))


def _partition_labels(state: ClusterState) -> np.ndarray:
    """Cluster labels with each outlier relabelled as its own singleton."""
    labels = np.array(state.assignment, dtype=np.int64)
    next_id = int(labels.max(initial=-1)) + 1
    for i in np.nonzero(labels == OUTLIER)[0]:
        labels[i] = next_id
        next_id += 1
    return labels


def _identity_labels(identities: Sequence[str | None]) -> np.ndarray:
    if any(i is None for i in identities):
        missing = next(i for i, v in enumerate(identities) if v is None)
        raise ValueError(f"sample {missing} has no ground-truth identity")
    table: dict[str, int] = {}
    return np.asarray([table.setdefault(i, len(table)) for i in identities], dtype=np.int64)


def _pair_counts(labels: np.ndarray) -> int:
    _, counts = np.unique(labels, return_counts=True)
    return int((counts * (counts - 1) // 2).sum())


def pairwise_prf(state: ClusterState, identities: Sequence[str | None]
                 ) -> tuple[float, float, float]:
    """Pair-counting precision / recall / F1 of the clustering vs identities.

    Conventions: precision 1 when there are no same-cluster pairs, recall 0
    when there are no same-identity pairs, F1 0 when both rates are 0.
    """
    pred = _partition_labels(state)
    truth = _identity_labels(identities)
    if pred.shape != truth.shape:
        raise ValueError("state and identities cover different sample counts")

    same_cluster = _pair_counts(pred)
    same_identity = _pair_counts(truth)
    joint = pred.astype(np.int64) * (int(truth.max()) + 1) + truth
    both = _pair_counts(joint)

    precision = both / same_cluster if same_cluster else 1.0
    recall = both / same_identity if same_identity else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def nmi(state: ClusterState, identities: Sequence[str | None]) -> float:
    """Normalized mutual information, I(U;V)/sqrt(H(U)H(V)) with natural logs.

    When either partition has zero entropy: 1 if the partitions are
    identical, else 0.
    """
    pred = _partition_labels(state)
    truth = _identity_labels(identities)
    if pred.shape != truth.shape:
        raise ValueError("state and identities cover different sample counts")
    n = pred.shape[0]

    _, pred_idx, pred_counts = np.unique(pred, return_inverse=True, return_counts=True)
    _, truth_idx, truth_counts = np.unique(truth, return_inverse=True, return_counts=True)
    h_pred = _entropy(pred_counts, n)
    h_truth = _entropy(truth_counts, n)
    if h_pred == 0.0 or h_truth == 0.0:
        # Zero entropy means a single part; identical partitions then require
        # the other side to be a single part too.
        return 1.0 if len(pred_counts) == 1 and len(truth_counts) == 1 else 0.0

    contingency = np.zeros((len(pred_counts), len(truth_counts)), dtype=np.int64)
    np.add.at(contingency, (pred_idx, truth_idx), 1)
    pij = contingency / n
    outer = np.outer(pred_counts / n, truth_counts / n)
    nonzero = pij > 0
    mutual = float((pij[nonzero] * np.log(pij[nonzero] / outer[nonzero])).sum())
    return mutual / float(np.sqrt(h_pred * h_truth))


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts / n
    return float(-(p * np.log(p)).sum())


def retrieval_map_cmc(query_embeds: np.ndarray, query_ids: Sequence[str],
                      gallery_embeds: np.ndarray, gallery_ids: Sequence[str],
                      ranks: Sequence[int]) -> tuple[float, dict[int, float]]:
    """Mean average precision and CMC at the requested ranks.

    Per query the gallery is sorted by descending cosine similarity (ties by
    ascending gallery index); AP averages precision at each relevant item's
    rank; CMC@r is the fraction of queries with a relevant item in the top r.
    Every query identity must occur in the gallery.
    """
    query_embeds = np.asarray(query_embeds, dtype=np.float64)
    gallery_embeds = np.asarray(gallery_embeds, dtype=np.float64)
    gallery_ids = np.asarray(gallery_ids)
    query_ids = np.asarray(query_ids)
    ranks = sorted(set(int(r) for r in ranks))
    if not ranks or ranks[0] < 1:
        raise ValueError("ranks must be positive integers")

    aps = []
    hits = {r: 0 for r in ranks}
    for qi in range(query_embeds.shape[0]):
        relevant_mask = gallery_ids == query_ids[qi]
        if not relevant_mask.any():
            raise ValueError(f"query identity {query_ids[qi]!r} absent from gallery")
        sims = gallery_embeds @ query_embeds[qi]
        order = np.argsort(-sims, kind="stable")
        rel = relevant_mask[order]
        positions = np.nonzero(rel)[0]  # 0-based ranks of relevant items
        precision_at = (np.arange(len(positions)) + 1) / (positions + 1)
        aps.append(float(precision_at.mean()))
        first = int(positions[0])
        for r in ranks:
            if first < r:
                hits[r] += 1
    n_q = len(aps)
    cmc = {r: hits[r] / n_q for r in ranks}
    return float(np.mean(aps)), cmc
