"""Pure NumPy/Python implementations of the clustering kernels.

These are the fallback for the compiled extension in ``_core.pyx``. The two
implementations must stay observably identical: same neighbourhood rule, same
scan orders, same tie-breaks, and (for the k-medoids cost) the same sequential
float64 accumulation order, so that the parity tests can require exact
equality of the outputs.
"""

from __future__ import annotations

from collections import deque

import numpy as np


def dbscan_labels(dist: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    """Density-based cluster labels over a precomputed distance matrix.

    A point is core when its eps-neighbourhood (``dist <= eps``, which
    includes the point itself) holds at least ``min_pts`` points. Core points
    are grouped into connected components of the core-core neighbourhood
    graph, discovered by FIFO expansion in ascending index order, so cluster
    ids are ordered by their smallest core member. A non-core point joins the
    cluster of its smallest-index core neighbour, or stays -1 (outlier).
    """
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    n = dist.shape[0]
    within = dist <= eps
    core = np.count_nonzero(within, axis=1) >= min_pts
    labels = np.full(n, -1, dtype=np.int64)

    cluster = 0
    for start in range(n):
        if not core[start] or labels[start] != -1:
            continue
        labels[start] = cluster
        queue = deque([start])
        while queue:
            p = queue.popleft()
            for q in np.nonzero(within[p])[0]:
                if core[q] and labels[q] == -1:
                    labels[q] = cluster
                    queue.append(q)
        cluster += 1

    for i in range(n):
        if core[i]:
            continue
        for q in np.nonzero(within[i])[0]:
            if core[q]:
                labels[i] = labels[q]
                break
    return labels


def _farthest_point_init(dist: np.ndarray, k: int) -> list[int]:
    # First medoid is index 0 (the caller orders rows by ascending sample id);
    # each next medoid maximises the distance to its nearest chosen medoid,
    # ties going to the smallest index.
    n = dist.shape[0]
    medoids = [0]
    chosen = np.zeros(n, dtype=bool)
    chosen[0] = True
    nearest = dist[:, 0].copy()
    for _ in range(1, k):
        best = -1
        best_d = -np.inf
        for j in range(n):
            if not chosen[j] and nearest[j] > best_d:
                best_d = nearest[j]
                best = j
        medoids.append(best)
        chosen[best] = True
        np.minimum(nearest, dist[:, best], out=nearest)
    medoids.sort()
    return medoids


def _assign(dist: np.ndarray, medoids: list[int]) -> np.ndarray:
    # Nearest medoid per point; on exact ties the earliest slot wins, and the
    # slots are kept in ascending medoid order so that means the smallest
    # medoid index. Medoid points always belong to their own slot, which keeps
    # every group non-empty even with duplicate rows.
    labels = np.argmin(dist[:, medoids], axis=1).astype(np.int64)
    for slot, m in enumerate(medoids):
        labels[m] = slot
    return labels


def _update(dist: np.ndarray, labels: np.ndarray, k: int) -> list[int]:
    # New medoid of each group minimises the within-group distance sum,
    # accumulated sequentially in ascending index order (matches _core).
    new_medoids = []
    for slot in range(k):
        group = np.nonzero(labels == slot)[0]
        best = -1
        best_cost = np.inf
        for j in group:
            cost = 0.0
            for l in group:
                cost += dist[j, l]
            if cost < best_cost:
                best_cost = cost
                best = int(j)
        new_medoids.append(best)
    new_medoids.sort()
    return new_medoids


def kmedoids(dist: np.ndarray, k: int, max_iter: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """PAM-style k-medoids over a precomputed distance matrix.

    Deterministic: greedy farthest-point init seeded at index 0, then
    alternating assign/update until the medoid set is stable or ``max_iter``
    passes. Returns ``(labels, medoids)`` where ``labels[i]`` is the slot of
    the medoid that owns point ``i`` and ``medoids`` is ascending.
    """
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    n = dist.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for {n} points")

    medoids = _farthest_point_init(dist, k)
    labels = _assign(dist, medoids)
    for _ in range(max_iter):
        new_medoids = _update(dist, labels, k)
        if new_medoids == medoids:
            break
        medoids = new_medoids
        labels = _assign(dist, medoids)
    return labels, np.asarray(medoids, dtype=np.int64)
