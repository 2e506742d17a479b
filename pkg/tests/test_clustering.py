import numpy as np
import pytest

from oracles import naive_dbscan, random_unit_rows, unit_circle
from ucal.clustering import (OUTLIER, Cluster, ClusterState, compute_centroids,
                             dbscan, state_from_clusters)
from ucal.dataset import FeatureMatrix, similarity_matrix


def sim_of(rows):
    return similarity_matrix(FeatureMatrix(rows, normalized=True))


class TestDbscan:
    def test_unit_circle_fixture(self):
        # Angles 0/1/2 form one dense arc, 90/91 another, 180 is isolated.
        rows = unit_circle([0, 1, 2, 90, 91, 180])
        eps = 1 - np.cos(np.deg2rad(5))
        state = dbscan(sim_of(rows), eps, 2)
        assert state.partition() == {frozenset({0, 1, 2}), frozenset({3, 4})}
        assert state.assignment[5] == OUTLIER
        # Cross-check against the naive reference.
        ref_partition, ref_outliers = naive_dbscan(1 - sim_of(rows), eps, 2)
        assert state.partition() == ref_partition
        assert ref_outliers == {5}

    def test_all_identical_points(self):
        rows = np.tile([1.0, 0.0], (7, 1))
        state = dbscan(sim_of(rows), 0.5, 2)
        assert state.partition() == {frozenset(range(7))}

    def test_min_pts_above_n_all_outliers(self):
        rows = unit_circle([0, 10, 20])
        state = dbscan(sim_of(rows), 0.5, 4)
        assert state.n_clusters == 0
        assert state.n_outliers == 3

    def test_parameter_validation(self):
        s = sim_of(unit_circle([0, 1]))
        with pytest.raises(ValueError):
            dbscan(s, 0.0, 2)
        with pytest.raises(ValueError):
            dbscan(s, 2.5, 2)
        with pytest.raises(ValueError):
            dbscan(s, 0.5, 1)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_naive_reference_random(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 64))
        rows = random_unit_rows(n, int(rng.integers(2, 6)), rng)
        sim = sim_of(rows)
        eps = float(rng.uniform(0.05, 1.2))
        min_pts = int(rng.integers(2, 6))
        state = dbscan(sim, eps, min_pts)
        ref_partition, ref_outliers = naive_dbscan(1 - sim, eps, min_pts)
        assert state.partition() == ref_partition
        assert frozenset(np.nonzero(state.assignment == OUTLIER)[0]) == ref_outliers

    def test_partition_conservation(self):
        rng = np.random.default_rng(5)
        rows = random_unit_rows(50, 3, rng)
        state = dbscan(sim_of(rows), 0.3, 3)
        in_clusters = sum(c.size for c in state.clusters)
        assert in_clusters + state.n_outliers == 50


class TestComputeCentroids:
    def test_symmetric_pair_centroid(self):
        fm = FeatureMatrix(np.array([[1.0, 0.0], [0.0, 1.0]]), normalized=True)
        state = ClusterState(np.array([0, 0]), (Cluster(0, (0, 1)),))
        out = compute_centroids(state, fm)
        assert np.allclose(out.clusters[0].centroid, [np.sqrt(2) / 2, np.sqrt(2) / 2])

    def test_singleton_cluster(self):
        fm = FeatureMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]), normalized=True)
        state = ClusterState(np.array([OUTLIER, 0]), (Cluster(0, (1,)),))
        out = compute_centroids(state, fm)
        assert np.array_equal(out.clusters[0].centroid, [1.0, 0.0])
        assert out.clusters[0].medoid == 1

    def test_medoid_tie_goes_to_smallest_id(self):
        # Two identical rows tie on mean similarity; the first wins.
        fm = FeatureMatrix(np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), normalized=True)
        state = ClusterState(np.array([0, 0, 0]), (Cluster(0, (0, 1, 2)),))
        out = compute_centroids(state, fm)
        assert out.clusters[0].medoid == 0

    def test_empty_cluster_forbidden(self):
        with pytest.raises(ValueError, match="empty"):
            Cluster(0, ())


class TestClusterState:
    def test_duplicate_membership_rejected(self):
        with pytest.raises(ValueError):
            ClusterState(np.array([0, 0]), (Cluster(0, (0, 1)), Cluster(1, (1,))))

    def test_assignment_consistency_required(self):
        with pytest.raises(ValueError):
            ClusterState(np.array([0, OUTLIER]), (Cluster(0, (0, 1)),))

    def test_relabeling_preserves_partition(self):
        rng = np.random.default_rng(9)
        rows = random_unit_rows(30, 3, rng)
        state = dbscan(sim_of(rows), 0.4, 2)
        rebuilt = state_from_clusters(list(state.clusters), 30, epoch=3)
        assert rebuilt.partition() == state.partition()
        assert rebuilt.epoch == 3
