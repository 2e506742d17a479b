"""Split proposals: k-medoids subgrouping, compactness/independence scoring,
hard-negative pair queries between group medoids, and the split edit.

All scoring uses the [0, 1]-mapped cosine similarity; the k-medoids distance
is 1 - cosine. A cluster with fewer than 4 members is never a split
candidate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator, Mapping

import numpy as np

from . import _kernels
from .annotation import (LabelMemory, Pair, QueryContext, QueryKind,
                         QueryRequest, Verdict, canonical_pair)
from .clustering import Cluster, make_cluster
from .dataset import FeatureMatrix, unit_interval_similarity

MIN_SPLIT_SIZE = 4


@dataclass(frozen=True)
class Group:
    members: tuple[int, ...]
    medoid: int
    comp: float | None = None
    indep: float | None = None


@dataclass(frozen=True)
class GroupPartition:
    cluster_id: int
    groups: tuple[Group, ...]
    k: int
    score: float | None = None

    def medoid_pairs(self) -> list[tuple[int, int, Pair]]:
        """All unordered group-index pairs (a < b) with their canonical
        medoid-sample pair, in (a, b) order."""
        out = []
        for a in range(self.k):
            for b in range(a + 1, self.k):
                out.append((a, b, canonical_pair(self.groups[a].medoid, self.groups[b].medoid)))
        return out


def kmedoids_partition(cluster: Cluster, k: int, similarity: np.ndarray,
                       seed: int = 0) -> GroupPartition:
    """Partition a cluster into k groups by PAM k-medoids.

    Deterministic: greedy farthest-point init from the smallest-id member and
    smallest-sample-id tie-breaks throughout, so ``seed`` is accepted for
    interface stability but does not influence the result.
    """
    members = cluster.members
    if not 2 <= k <= len(members):
        raise ValueError(f"k={k} out of range for cluster of {len(members)} members")
    idx = list(members)
    dist = 1.0 - similarity[np.ix_(idx, idx)]
    labels, medoid_locals = _kernels.kmedoids(dist, k)
    groups = []
    for slot, medoid_local in enumerate(medoid_locals):
        local = np.nonzero(labels == slot)[0]
        groups.append(Group(
            members=tuple(members[i] for i in local),
            medoid=members[int(medoid_local)],
        ))
    groups.sort(key=lambda g: g.medoid)
    return GroupPartition(cluster_id=cluster.cluster_id, groups=tuple(groups), k=k)


def group_scores(partition: GroupPartition, similarity: np.ndarray) -> GroupPartition:
    """Fill compactness, independence, and the partition score.

    comp_j: minimum mapped similarity over intra-group pairs (1 for a
    singleton); indep_j: 1 - maximum mapped similarity between the group and
    its sibling groups; score: sum of comp_j * indep_j.
    """
    scored = []
    total = 0.0
    for j, group in enumerate(partition.groups):
        own = list(group.members)
        sub = unit_interval_similarity(similarity[np.ix_(own, own)])
        if len(own) == 1:
            comp = 1.0
        else:
            off_diag = ~np.eye(len(own), dtype=bool)
            comp = float(sub[off_diag].min())
        others = [m for g in partition.groups if g is not group for m in g.members]
        inter = unit_interval_similarity(similarity[np.ix_(own, others)])
        indep = 1.0 - float(inter.max())
        scored.append(replace(group, comp=comp, indep=indep))
        total += comp * indep
    return replace(partition, groups=tuple(scored), score=total)


def k_max_for(size: int) -> int:
    """Upper bound on the group count: floor(sqrt(size/2)/2), clamped to >= 2."""
    return max(2, math.floor(math.sqrt(size / 2.0) / 2.0))


def select_k_star(cluster: Cluster, similarity: np.ndarray,
                  seed: int = 0) -> GroupPartition | None:
    """Best-scoring partition over k in [2, k_max]; ties go to the smallest k.

    Returns None for clusters below MIN_SPLIT_SIZE (too small to subgroup).
    """
    if cluster.size < MIN_SPLIT_SIZE:
        return None
    best: GroupPartition | None = None
    for k in range(2, k_max_for(cluster.size) + 1):
        candidate = group_scores(kmedoids_partition(cluster, k, similarity, seed), similarity)
        if best is None or candidate.score > best.score:
            best = candidate
    return best


def propose_split_queries(partition: GroupPartition, memory: LabelMemory, *,
                          epoch: int, ids: Iterator[int],
                          context: Mapping[int, str | None] | None = None
                          ) -> list[QueryRequest]:
    """One SPLIT query per unresolved group-medoid pair, in (a, b) group order.

    ``context`` optionally maps sample ids to image paths for UI display.
    """
    queries = []
    for _a, _b, pair in partition.medoid_pairs():
        if memory.resolve(pair) is not None:
            continue
        ctx = QueryContext(
            cluster_a=partition.cluster_id,
            cluster_b=partition.cluster_id,
            image_a=context.get(pair[0]) if context else None,
            image_b=context.get(pair[1]) if context else None,
        )
        queries.append(QueryRequest(next(ids), pair, QueryKind.SPLIT, epoch, ctx))
    return queries


def apply_split(cluster: Cluster, partition: GroupPartition,
                labels: Mapping[Pair, Verdict], features: FeatureMatrix) -> list[Cluster]:
    """Split a cluster along negative-labelled group-medoid pairs.

    Groups joined by positive pairs stay together (connected components);
    each component becomes one cluster with recomputed centroid/medoid.
    Output cluster ids are placeholders 0..n-1 (callers renumber via
    state_from_clusters). Every medoid pair must carry a resolved label.
    """
    parent = list(range(partition.k))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, pair in partition.medoid_pairs():
        verdict = labels.get(pair)
        if verdict is None:
            raise ValueError(f"medoid pair {pair} of cluster {cluster.cluster_id} is unresolved")
        if verdict is Verdict.POSITIVE:
            parent[find(a)] = find(b)

    components: dict[int, list[int]] = {}
    for g in range(partition.k):
        components.setdefault(find(g), []).append(g)

    pieces = []
    for groups in components.values():
        members = tuple(sorted(m for g in groups for m in partition.groups[g].members))
        pieces.append(members)
    pieces.sort(key=lambda ms: ms[0])
    return [make_cluster(cid, members, features) for cid, members in enumerate(pieces)]
