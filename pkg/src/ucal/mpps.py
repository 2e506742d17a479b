"""Merge proposals: centroid rank lists, similarity-gap analysis, hard-positive
pair queries, and the capped merge edit.

For each anchor cluster the centroid similarities to all other clusters are
ranked descending; the adjacent differences are min-max normalized, and the
first gap exceeding the threshold delta marks how many nearest neighbours are
ambiguous enough to ask about. Positive answers merge clusters, greedily by
similarity, limited per epoch to a fraction of the cluster count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .annotation import (LabelMemory, Pair, QueryContext, QueryKind,
                         QueryRequest, canonical_pair)
from .clustering import Cluster, ClusterState, make_cluster, state_from_clusters
from .dataset import FeatureMatrix


@dataclass(frozen=True)
class RankList:
    """An anchor cluster's neighbours by descending centroid cosine
    similarity (ties by ascending cluster id), truncated to l_max."""

    anchor: int
    neighbors: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class GapVector:
    raw: tuple[float, ...]
    normalized: tuple[float, ...]


@dataclass(frozen=True)
class MergeProposal:
    anchor: int
    candidates: tuple[int, ...]  # neighbour cluster ids, nearest first
    chosen_l: int


def rank_neighbors(state: ClusterState, anchor: int, l_max: int) -> RankList:
    if state.n_clusters < 2:
        raise ValueError("ranking needs at least 2 clusters")
    anchor_cluster = state.cluster_by_id(anchor)
    if anchor_cluster.centroid is None:
        raise ValueError("rank_neighbors needs computed centroids")
    entries = []
    for c in state.clusters:
        if c.cluster_id == anchor:
            continue
        entries.append((c.cluster_id, float(anchor_cluster.centroid @ c.centroid)))
    entries.sort(key=lambda e: (-e[1], e[0]))
    return RankList(anchor=anchor, neighbors=tuple(entries[:l_max]))


def normalized_gaps(rank: RankList) -> GapVector:
    """Adjacent similarity differences, min-max normalized to [0, 1].

    Fewer than 2 neighbours yield an empty vector; when all gaps are equal
    (max == min) every normalized value is 0 and no gap is informative.
    """
    sims = [s for _, s in rank.neighbors]
    if len(sims) < 2:
        return GapVector(raw=(), normalized=())
    raw = tuple(sims[i] - sims[i + 1] for i in range(len(sims) - 1))
    lo, hi = min(raw), max(raw)
    if hi == lo:
        return GapVector(raw=raw, normalized=tuple(0.0 for _ in raw))
    return GapVector(raw=raw, normalized=tuple((d - lo) / (hi - lo) for d in raw))


def anchor_proposal(state: ClusterState, anchor: int, delta: float,
                    l_max: int) -> MergeProposal | None:
    """The anchor's ambiguous-neighbour prefix: the smallest l whose
    normalized gap exceeds delta selects neighbours 1..l. None when no gap
    qualifies."""
    rank = rank_neighbors(state, anchor, l_max)
    gaps = normalized_gaps(rank)
    for i, g in enumerate(gaps.normalized):
        if g > delta:
            chosen_l = i + 1
            return MergeProposal(
                anchor=anchor,
                candidates=tuple(cid for cid, _ in rank.neighbors[:chosen_l]),
                chosen_l=chosen_l,
            )
    return None


@dataclass(frozen=True)
class MergeCandidate:
    """A cluster pair nominated for annotation, realized as the pair of the
    two clusters' medoid samples."""

    clusters: tuple[int, int]  # ascending cluster ids
    medoids: Pair              # canonical sample pair
    similarity: float          # centroid cosine


def merge_candidates(state: ClusterState, delta: float, l_max: int) -> tuple[MergeCandidate, ...]:
    """All cluster pairs selected by the gap rule across anchors, deduplicated,
    ordered by canonical medoid pair."""
    if state.n_clusters < 2:
        return ()
    by_medoids: dict[Pair, MergeCandidate] = {}
    for cluster in state.clusters:
        proposal = anchor_proposal(state, cluster.cluster_id, delta, l_max)
        if proposal is None:
            continue
        for neighbor_id in proposal.candidates:
            other = state.cluster_by_id(neighbor_id)
            medoids = canonical_pair(cluster.medoid, other.medoid)
            if medoids in by_medoids:
                continue
            a, b = sorted((cluster.cluster_id, neighbor_id))
            by_medoids[medoids] = MergeCandidate(
                clusters=(a, b),
                medoids=medoids,
                similarity=float(cluster.centroid @ other.centroid),
            )
    return tuple(by_medoids[p] for p in sorted(by_medoids))


def propose_merge_queries(state: ClusterState, delta: float, l_max: int,
                          memory: LabelMemory, *, epoch: int, ids: Iterator[int],
                          context: Mapping[int, str | None] | None = None
                          ) -> list[QueryRequest]:
    """One MERGE query per candidate pair not already resolvable from memory,
    in canonical medoid-pair order."""
    queries = []
    for cand in merge_candidates(state, delta, l_max):
        if memory.resolve(cand.medoids) is not None:
            continue
        ctx = QueryContext(
            cluster_a=cand.clusters[0],
            cluster_b=cand.clusters[1],
            image_a=context.get(cand.medoids[0]) if context else None,
            image_b=context.get(cand.medoids[1]) if context else None,
        )
        queries.append(QueryRequest(next(ids), cand.medoids, QueryKind.MERGE, epoch, ctx))
    return queries


def apply_merges(state: ClusterState, positives: Iterable[tuple[tuple[int, int], float]],
                 cap_fraction: float, features: FeatureMatrix, *,
                 n_epoch_start: int | None = None) -> ClusterState:
    """Merge positive-labelled cluster pairs, at most floor(cap_fraction * n_t)
    union operations, greedily by descending similarity.

    ``n_epoch_start`` is the cluster count n_t the cap is taken against
    (defaults to the current state's count). Pairs already joined through
    earlier unions are skipped without consuming the cap.
    """
    if not 0.0 < cap_fraction <= 1.0:
        raise ValueError(f"cap_fraction must be in (0, 1], got {cap_fraction}")
    n_t = state.n_clusters if n_epoch_start is None else n_epoch_start
    cap = int(cap_fraction * n_t)

    ordered = sorted(positives, key=lambda p: (-p[1], min(p[0]), max(p[0])))
    ids = [c.cluster_id for c in state.clusters]
    parent = {cid: cid for cid in ids}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    ops = 0
    for (a, b), _sim in ordered:
        if ops >= cap:
            break
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        parent[ra] = rb
        ops += 1

    components: dict[int, list[Cluster]] = {}
    for c in state.clusters:
        components.setdefault(find(c.cluster_id), []).append(c)

    merged: list[Cluster] = []
    for group in components.values():
        if len(group) == 1:
            merged.append(group[0])
        else:
            members = tuple(sorted(m for c in group for m in c.members))
            merged.append(make_cluster(-1, members, features))
    return state_from_clusters(merged, state.n_samples, state.epoch)
