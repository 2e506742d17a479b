"""Independent reference implementations used as test oracles.

Deliberately naive (enumeration, transitive closure, direct formula
evaluation) and kept free of the package's production code paths they check.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def naive_dbscan(dist: np.ndarray, eps: float, min_pts: int
                 ) -> tuple[set[frozenset[int]], frozenset[int]]:
    """O(N^3)-ish DBSCAN by repeated set merging.

    Returns (partition as a set of member sets, outlier set). Border points
    join the cluster of their smallest-index core neighbour.
    """
    n = dist.shape[0]
    within = dist <= eps
    core = [int(within[i].sum()) >= min_pts for i in range(n)]

    # Merge core points into components by fixpoint iteration.
    comp = {i: {i} for i in range(n) if core[i]}
    changed = True
    while changed:
        changed = False
        for i, j in itertools.combinations(sorted(comp.keys()), 2):
            if comp[i] is comp[j]:
                continue
            if any(within[a][b] for a in comp[i] for b in comp[j]):
                merged = comp[i] | comp[j]
                for m in merged:
                    comp[m] = merged
                changed = True
    components = {frozenset(s) for s in comp.values()}

    clusters = {c: set(c) for c in components}
    outliers = set()
    for i in range(n):
        if core[i]:
            continue
        core_neighbors = [j for j in range(n) if core[j] and within[i][j]]
        if not core_neighbors:
            outliers.add(i)
            continue
        target = core_neighbors[0]
        for c in components:
            if target in c:
                clusters[c].add(i)
                break
    return {frozenset(s) for s in clusters.values()}, frozenset(outliers)


def brute_force_kmedoids_cost(dist: np.ndarray, medoids: tuple[int, ...]) -> float:
    """Optimal-assignment cost of a fixed medoid set (each point to its
    nearest medoid; medoids to themselves)."""
    total = 0.0
    for i in range(dist.shape[0]):
        if i in medoids:
            continue
        total += min(dist[i, m] for m in medoids)
    return total


def best_kmedoids_partitions(dist: np.ndarray, k: int) -> list[set[frozenset[int]]]:
    """All globally optimal k-medoids partitions by exhaustive medoid
    enumeration (small n only)."""
    n = dist.shape[0]
    best_cost = math.inf
    best: list[tuple[int, ...]] = []
    for medoids in itertools.combinations(range(n), k):
        cost = brute_force_kmedoids_cost(dist, medoids)
        if cost < best_cost - 1e-12:
            best_cost = cost
            best = [medoids]
        elif cost <= best_cost + 1e-12:
            best.append(medoids)
    partitions = []
    for medoids in best:
        groups: dict[int, set[int]] = {m: {m} for m in medoids}
        for i in range(n):
            if i in medoids:
                continue
            nearest = min(medoids, key=lambda m: (dist[i, m], m))
            groups[nearest].add(i)
        partitions.append({frozenset(g) for g in groups.values()})
    return partitions


def direct_group_score(groups: list[set[int]], mapped_sim: np.ndarray) -> float:
    """Direct evaluation of sum_j comp_j * indep_j on 0-1 mapped similarity."""
    total = 0.0
    for j, g in enumerate(groups):
        pairs = [mapped_sim[a, b] for a, b in itertools.combinations(sorted(g), 2)]
        comp = min(pairs) if pairs else 1.0
        others = [m for jj, other in enumerate(groups) if jj != j for m in other]
        indep = 1.0 - max(mapped_sim[a, b] for a in g for b in others)
        total += comp * indep
    return total


def brute_force_merge_pairs(centroids: dict[int, np.ndarray], medoids: dict[int, int],
                            delta: float, l_max: int) -> set[tuple[int, int]]:
    """Re-derivation of the gap-rule query pairs, as canonical medoid pairs."""
    pairs: set[tuple[int, int]] = set()
    for anchor in sorted(centroids):
        sims = sorted(
            ((float(centroids[anchor] @ centroids[other]), other)
             for other in centroids if other != anchor),
            key=lambda e: (-e[0], e[1]),
        )[:l_max]
        values = [s for s, _ in sims]
        if len(values) < 2:
            continue
        gaps = [values[i] - values[i + 1] for i in range(len(values) - 1)]
        lo, hi = min(gaps), max(gaps)
        if hi == lo:
            continue
        norm = [(g - lo) / (hi - lo) for g in gaps]
        chosen_l = next((i + 1 for i, g in enumerate(norm) if g > delta), None)
        if chosen_l is None:
            continue
        for _, other in sims[:chosen_l]:
            a, b = medoids[anchor], medoids[other]
            pairs.add((min(a, b), max(a, b)))
    return pairs


def brute_force_positive_closure(positives: list[tuple[int, int]],
                                 universe: list[int]) -> set[frozenset[int]]:
    """Transitive closure of positive links by fixpoint set merging."""
    comp = {x: {x} for x in universe}
    changed = True
    while changed:
        changed = False
        for a, b in positives:
            if comp[a] is not comp[b]:
                merged = comp[a] | comp[b]
                for m in merged:
                    comp[m] = merged
                changed = True
    return {frozenset(s) for s in comp.values()}


def brute_force_nmi(pred: list[int], truth: list[int]) -> float:
    """Direct NMI with sqrt normalization and natural logs, via dict counting."""
    n = len(pred)
    pu: dict[int, int] = {}
    pv: dict[int, int] = {}
    puv: dict[tuple[int, int], int] = {}
    for u, v in zip(pred, truth):
        pu[u] = pu.get(u, 0) + 1
        pv[v] = pv.get(v, 0) + 1
        puv[(u, v)] = puv.get((u, v), 0) + 1
    hu = -sum((c / n) * math.log(c / n) for c in pu.values())
    hv = -sum((c / n) * math.log(c / n) for c in pv.values())
    if hu == 0.0 or hv == 0.0:
        return 1.0 if len(pu) == 1 and len(pv) == 1 else 0.0
    mi = sum(
        (c / n) * math.log((c / n) / ((pu[u] / n) * (pv[v] / n)))
        for (u, v), c in puv.items()
    )
    return mi / math.sqrt(hu * hv)


def brute_force_pair_prf(pred: list[int], truth: list[int]) -> tuple[float, float, float]:
    """Pair-counting precision/recall/F1 by explicit double loop."""
    n = len(pred)
    same_cluster = same_identity = both = 0
    for i in range(n):
        for j in range(i + 1, n):
            sc = pred[i] == pred[j]
            si = truth[i] == truth[j]
            same_cluster += sc
            same_identity += si
            both += sc and si
    precision = both / same_cluster if same_cluster else 1.0
    recall = both / same_identity if same_identity else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def unit_circle(angles_deg: list[float]) -> np.ndarray:
    rad = np.deg2rad(angles_deg)
    return np.stack([np.cos(rad), np.sin(rad)], axis=1)


def random_unit_rows(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_normal((n, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)
