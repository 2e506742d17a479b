"""Base unsupervised cluster structure: DBSCAN plus centroids and medoids.

Distance is 1 - cosine similarity on unit embeddings, range [0, 2]. Cluster
states are immutable; split/merge edits produce new states.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .dataset import FeatureMatrix

OUTLIER = -1


@dataclass(frozen=True)
class Cluster:
    """A cluster: ascending member sample ids, plus centroid/medoid once
    compute_centroids has run. The centroid is the re-normalized mean of the
    member embeddings; the medoid is the member with maximal mean similarity
    to the others (ties to the smallest sample id)."""

    cluster_id: int
    members: tuple[int, ...]
    centroid: np.ndarray | None = None
    medoid: int | None = None

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("empty cluster is a forbidden state")
        if list(self.members) != sorted(set(self.members)):
            raise ValueError("cluster members must be unique and ascending")
        if self.medoid is not None and self.medoid not in self.members:
            raise ValueError(f"medoid {self.medoid} not a member of cluster {self.cluster_id}")

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class ClusterState:
    """Partition of samples into clusters; unassigned samples are OUTLIER."""

    assignment: np.ndarray
    clusters: tuple[Cluster, ...]
    epoch: int = 0

    def __post_init__(self) -> None:
        assignment = np.array(self.assignment, dtype=np.int64)
        assignment.flags.writeable = False
        object.__setattr__(self, "assignment", assignment)

        ids = [c.cluster_id for c in self.clusters]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate cluster ids")
        seen = np.zeros(assignment.shape[0], dtype=bool)
        for c in self.clusters:
            for m in c.members:
                if seen[m]:
                    raise ValueError(f"sample {m} appears in more than one cluster")
                seen[m] = True
                if assignment[m] != c.cluster_id:
                    raise ValueError(f"assignment[{m}] disagrees with cluster {c.cluster_id}")
        outliers = assignment == OUTLIER
        if not np.array_equal(~seen, outliers):
            raise ValueError("assignment marks clustered samples as outliers (or vice versa)")

    @property
    def n_samples(self) -> int:
        return self.assignment.shape[0]

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    @property
    def n_outliers(self) -> int:
        return int(np.count_nonzero(self.assignment == OUTLIER))

    def cluster_by_id(self, cluster_id: int) -> Cluster:
        for c in self.clusters:
            if c.cluster_id == cluster_id:
                return c
        raise KeyError(f"unknown cluster id {cluster_id}")

    def partition(self) -> set[frozenset[int]]:
        """The induced partition as a set of member sets (id-labelling free)."""
        return {frozenset(c.members) for c in self.clusters}


def dbscan(similarity: np.ndarray, eps: float, min_pts: int, *, epoch: int = 0) -> ClusterState:
    """DBSCAN over distance = 1 - cosine similarity.

    A point is core when its eps-neighbourhood (itself included) has at least
    ``min_pts`` points; clusters are the density-connected components, with
    ids ordered by their smallest core member; border points reachable from
    several clusters join the one of their smallest-id core neighbour.
    Non-reachable points become OUTLIER.
    """
    if not 0.0 < eps <= 2.0:
        raise ValueError(f"eps must be in (0, 2], got {eps}")
    if min_pts < 2:
        raise ValueError(f"min_pts must be >= 2, got {min_pts}")
    dist = 1.0 - similarity
    labels = _kernels.dbscan_labels(dist, eps, min_pts)
    clusters = []
    for cid in range(int(labels.max()) + 1 if labels.size else 0):
        members = tuple(int(i) for i in np.nonzero(labels == cid)[0])
        clusters.append(Cluster(cluster_id=cid, members=members))
    return ClusterState(assignment=labels, clusters=tuple(clusters), epoch=epoch)


def _centroid_of(rows: np.ndarray) -> np.ndarray:
    mean = rows.mean(axis=0)
    norm = float(np.linalg.norm(mean))
    if norm == 0.0:
        raise ValueError("cluster mean has zero norm; cannot form a unit centroid")
    return mean / norm


def _medoid_of(members: tuple[int, ...], rows: np.ndarray) -> int:
    if len(members) == 1:
        return members[0]
    sims = rows @ rows.T
    # Mean similarity to the *other* members; self-similarity removed.
    mean_to_others = (sims.sum(axis=1) - sims.diagonal()) / (len(members) - 1)
    return members[int(np.argmax(mean_to_others))]


def make_cluster(cluster_id: int, members: tuple[int, ...], features: FeatureMatrix) -> Cluster:
    rows = features.rows[list(members)]
    return Cluster(
        cluster_id=cluster_id,
        members=members,
        centroid=_centroid_of(rows),
        medoid=_medoid_of(members, rows),
    )


def compute_centroids(state: ClusterState, features: FeatureMatrix) -> ClusterState:
    """Fill every cluster's centroid and medoid from the current features."""
    clusters = tuple(
        make_cluster(c.cluster_id, c.members, features) for c in state.clusters
    )
    return replace(state, clusters=clusters)


def state_from_clusters(clusters: list[Cluster] | tuple[Cluster, ...], n_samples: int,
                        epoch: int) -> ClusterState:
    """Rebuild a state from edited clusters, renumbering ids 0..K-1 in order
    of each cluster's smallest member (deterministic across edits)."""
    ordered = sorted(clusters, key=lambda c: c.members[0])
    assignment = np.full(n_samples, OUTLIER, dtype=np.int64)
    renumbered = []
    for cid, c in enumerate(ordered):
        renumbered.append(replace(c, cluster_id=cid))
        assignment[list(c.members)] = cid
    return ClusterState(assignment=assignment, clusters=tuple(renumbered), epoch=epoch)
