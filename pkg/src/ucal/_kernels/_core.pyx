# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled clustering kernels: DBSCAN labelling and PAM k-medoids.

Semantics must stay identical to ``ucal._kernels._pure`` (same neighbourhood
rule, scan orders, tie-breaks, and sequential float64 cost accumulation); the
parity tests compare the two implementations bit-for-bit.
"""

from libc.math cimport INFINITY

import numpy as np


def dbscan_labels(dist, double eps, Py_ssize_t min_pts):
    """Density-based cluster labels; see _pure.dbscan_labels for the contract."""
    cdef double[:, ::1] d = np.ascontiguousarray(dist, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0]

    labels_arr = np.full(n, -1, dtype=np.int64)
    cdef long long[::1] labels = labels_arr
    core_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] core = core_arr
    queue_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] queue = queue_arr

    cdef Py_ssize_t i, j, p, q, head, tail, count
    cdef long long cluster = 0

    for i in range(n):
        count = 0
        for j in range(n):
            if d[i, j] <= eps:
                count += 1
        if count >= min_pts:
            core[i] = 1

    for i in range(n):
        if core[i] == 0 or labels[i] != -1:
            continue
        labels[i] = cluster
        queue[0] = i
        head = 0
        tail = 1
        while head < tail:
            p = queue[head]
            head += 1
            for q in range(n):
                if d[p, q] <= eps and core[q] == 1 and labels[q] == -1:
                    labels[q] = cluster
                    queue[tail] = q
                    tail += 1
        cluster += 1

    for i in range(n):
        if core[i] == 1:
            continue
        for q in range(n):
            if d[i, q] <= eps and core[q] == 1:
                labels[i] = labels[q]
                break

    return labels_arr


def kmedoids(dist, Py_ssize_t k, Py_ssize_t max_iter=100):
    """PAM-style k-medoids; see _pure.kmedoids for the contract."""
    cdef double[:, ::1] d = np.ascontiguousarray(dist, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0]
    if k < 1 or k > n:
        raise ValueError(f"k={k} out of range for {n} points")

    medoids_arr = np.empty(k, dtype=np.int64)
    cdef long long[::1] medoids = medoids_arr
    new_medoids_arr = np.empty(k, dtype=np.int64)
    cdef long long[::1] new_medoids = new_medoids_arr
    labels_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] labels = labels_arr
    nearest_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] nearest = nearest_arr
    chosen_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] chosen = chosen_arr

    cdef Py_ssize_t j, l, t, slot, best, it
    cdef double best_d, cost, best_cost
    cdef bint stable

    # Greedy farthest-point init from index 0; ties to the smallest index.
    medoids[0] = 0
    chosen[0] = 1
    for j in range(n):
        nearest[j] = d[j, 0]
    for t in range(1, k):
        best = -1
        best_d = -INFINITY
        for j in range(n):
            if chosen[j] == 0 and nearest[j] > best_d:
                best_d = nearest[j]
                best = j
        medoids[t] = best
        chosen[best] = 1
        for j in range(n):
            if d[j, best] < nearest[j]:
                nearest[j] = d[j, best]
    _sort_ll(medoids, k)

    _assign(d, medoids, k, labels, n)
    for it in range(max_iter):
        # Update: per group, the member minimising the sequential within-group
        # distance sum; ties to the smallest index.
        for slot in range(k):
            best = -1
            best_cost = INFINITY
            for j in range(n):
                if labels[j] != slot:
                    continue
                cost = 0.0
                for l in range(n):
                    if labels[l] == slot:
                        cost += d[j, l]
                if cost < best_cost:
                    best_cost = cost
                    best = j
            new_medoids[slot] = best
        _sort_ll(new_medoids, k)
        stable = True
        for slot in range(k):
            if new_medoids[slot] != medoids[slot]:
                stable = False
                break
        if stable:
            break
        for slot in range(k):
            medoids[slot] = new_medoids[slot]
        _assign(d, medoids, k, labels, n)

    return labels_arr, medoids_arr


cdef void _assign(double[:, ::1] d, long long[::1] medoids, Py_ssize_t k,
                  long long[::1] labels, Py_ssize_t n):
    # Nearest medoid per point, first slot wins ties (slots are in ascending
    # medoid order); medoid points always take their own slot.
    cdef Py_ssize_t i, slot, best_slot
    cdef double best_d, dd
    for i in range(n):
        best_slot = 0
        best_d = d[i, medoids[0]]
        for slot in range(1, k):
            dd = d[i, medoids[slot]]
            if dd < best_d:
                best_d = dd
                best_slot = slot
        labels[i] = best_slot
    for slot in range(k):
        labels[medoids[slot]] = slot


cdef void _sort_ll(long long[::1] a, Py_ssize_t k):
    # Insertion sort; k is tiny.
    cdef Py_ssize_t i, j
    cdef long long v
    for i in range(1, k):
        v = a[i]
        j = i - 1
        while j >= 0 and a[j] > v:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = v
