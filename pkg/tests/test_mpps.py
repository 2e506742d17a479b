import itertools

import numpy as np
import pytest

from oracles import brute_force_merge_pairs, random_unit_rows, unit_circle
from ucal.annotation import LabelMemory, QueryKind, Source, Verdict
from ucal.clustering import Cluster, ClusterState, compute_centroids
from ucal.dataset import FeatureMatrix
from ucal.mpps import (GapVector, RankList, anchor_proposal, apply_merges,
                       merge_candidates, normalized_gaps, propose_merge_queries,
                       rank_neighbors)


def singleton_state(centroids):
    """One singleton cluster per centroid row; cluster i owns sample i."""
    clusters = tuple(
        Cluster(i, (i,), centroid=np.asarray(c, dtype=float), medoid=i)
        for i, c in enumerate(centroids)
    )
    return ClusterState(np.arange(len(clusters)), clusters)


def on_circle(dots_to_anchor):
    """Unit 2-D vectors whose dot with (1, 0) equals the given values."""
    return [(1.0, 0.0)] + [(s, np.sqrt(1 - s * s)) for s in dots_to_anchor]


class TestRankNeighbors:
    def test_sorted_descending(self):
        state = singleton_state(on_circle([0.9, 0.2]))
        rank = rank_neighbors(state, 0, l_max=10)
        assert rank.neighbors == ((1, pytest.approx(0.9)), (2, pytest.approx(0.2)))

    def test_tie_breaks_by_cluster_id(self):
        state = singleton_state(on_circle([0.5, 0.5]))
        rank = rank_neighbors(state, 0, l_max=10)
        assert [cid for cid, _ in rank.neighbors] == [1, 2]

    def test_l_max_truncation(self):
        state = singleton_state(on_circle([0.9, 0.5, 0.2]))
        rank = rank_neighbors(state, 0, l_max=1)
        assert len(rank.neighbors) == 1
        assert rank.neighbors[0][0] == 1

    def test_unknown_anchor(self):
        state = singleton_state(on_circle([0.9]))
        with pytest.raises(KeyError):
            rank_neighbors(state, 99, l_max=10)


class TestNormalizedGaps:
    def test_two_gap_case(self):
        gaps = normalized_gaps(RankList(0, ((1, 0.9), (2, 0.4), (3, 0.3))))
        assert gaps.raw == (pytest.approx(0.5), pytest.approx(0.1))
        assert gaps.normalized == (pytest.approx(1.0), pytest.approx(0.0))

    def test_three_gap_case(self):
        gaps = normalized_gaps(RankList(0, ((1, 0.9), (2, 0.6), (3, 0.5), (4, 0.1))))
        assert gaps.normalized == (pytest.approx(2 / 3), pytest.approx(0.0),
                                   pytest.approx(1.0))

    def test_degenerate_equal_gaps(self):
        # Binary-exact sims so both gaps are exactly 0.25.
        gaps = normalized_gaps(RankList(0, ((1, 0.75), (2, 0.5), (3, 0.25))))
        assert gaps.raw == (0.25, 0.25)
        assert gaps.normalized == (0.0, 0.0)

    def test_single_neighbor_empty(self):
        assert normalized_gaps(RankList(0, ((1, 0.9),))) == GapVector((), ())

    def test_bounds_and_extremes(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            sims = np.sort(rng.uniform(-1, 1, size=rng.integers(3, 12)))[::-1]
            gaps = normalized_gaps(RankList(0, tuple((i + 1, float(s))
                                                     for i, s in enumerate(sims))))
            assert all(0.0 <= g <= 1.0 for g in gaps.normalized)
            if max(gaps.raw) > min(gaps.raw):
                assert 1.0 in gaps.normalized
                assert 0.0 in gaps.normalized


class TestProposals:
    def test_first_gap_over_delta_selects_l(self):
        # Sims [0.9, 0.5, 0.5, 0.2] give normalized gaps [1.0, 0.0, 0.75]:
        # the first exceeds delta so only the top neighbour is queried.
        state = singleton_state(on_circle([0.9, 0.5, 0.5, 0.2]))
        proposal = anchor_proposal(state, 0, delta=0.3, l_max=10)
        assert proposal is not None
        assert proposal.chosen_l == 1
        assert proposal.candidates == (1,)

    def test_no_gap_above_delta(self):
        # Exactly equal gaps are the only way no normalized gap can exceed a
        # delta < 1 (min-max always produces a 1.0 otherwise).
        state = singleton_state(on_circle([0.75, 0.5, 0.25]))
        assert anchor_proposal(state, 0, delta=0.3, l_max=10) is None

    def test_duplicate_pairs_deduplicated(self):
        # Two tight clusters far from a third: both members of the tight pair
        # nominate each other; only one query must come out.
        state = singleton_state(on_circle([0.95, -0.9]))
        queries = propose_merge_queries(state, 0.3, 10, LabelMemory(),
                                        epoch=0, ids=itertools.count())
        pairs = [q.pair for q in queries]
        assert len(pairs) == len(set(pairs))
        assert all(q.kind is QueryKind.MERGE for q in queries)

    def test_resolved_pairs_not_requeried(self):
        state = singleton_state(on_circle([0.9, 0.5, 0.5, 0.2]))
        memory = LabelMemory()
        cands = merge_candidates(state, 0.3, 10)
        assert cands
        memory.record_consultation(cands[0].medoids, Verdict.NEGATIVE, Source.ORACLE, 0)
        queries = propose_merge_queries(state, 0.3, 10, memory,
                                        epoch=0, ids=itertools.count())
        assert cands[0].medoids not in [q.pair for q in queries]

    @pytest.mark.parametrize("seed", range(15))
    def test_matches_brute_force_rule(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 31))
        centroids = random_unit_rows(n, 4, rng)
        state = singleton_state(centroids)
        delta = float(rng.uniform(0.0, 0.9))
        l_max = int(rng.integers(2, 11))
        queries = propose_merge_queries(state, delta, l_max, LabelMemory(),
                                        epoch=0, ids=itertools.count())
        expected = brute_force_merge_pairs(
            {c.cluster_id: c.centroid for c in state.clusters},
            {c.cluster_id: c.medoid for c in state.clusters},
            delta, l_max)
        assert {q.pair for q in queries} == expected


class TestApplyMerges:
    def setup_method(self):
        rows = unit_circle([0, 1, 90, 91, 180, 181, 270, 271])
        self.fm = FeatureMatrix(rows, normalized=True)
        clusters = tuple(Cluster(i, (2 * i, 2 * i + 1)) for i in range(4))
        assignment = np.repeat(np.arange(4), 2)
        self.state = compute_centroids(ClusterState(assignment, clusters), self.fm)

    def test_transitive_union(self):
        merged = apply_merges(self.state, [((0, 1), 0.9), ((1, 2), 0.8)],
                              cap_fraction=0.5, features=self.fm)
        assert merged.n_clusters == 2
        assert frozenset({0, 1, 2, 3, 4, 5}) in merged.partition()

    def test_cap_limits_greedily_by_similarity(self):
        merged = apply_merges(self.state, [((0, 1), 0.9), ((2, 3), 0.8)],
                              cap_fraction=0.25, features=self.fm)
        assert merged.n_clusters == 3
        assert frozenset({0, 1, 2, 3}) in merged.partition()
        assert frozenset({4, 5}) in merged.partition()

    def test_no_positives_is_identity(self):
        merged = apply_merges(self.state, [], cap_fraction=0.5, features=self.fm)
        assert merged.partition() == self.state.partition()

    def test_membership_conserved_and_cap_respected(self):
        rng = np.random.default_rng(7)
        rows = random_unit_rows(30, 3, rng)
        fm = FeatureMatrix(rows, normalized=True)
        clusters = tuple(Cluster(i, (3 * i, 3 * i + 1, 3 * i + 2)) for i in range(10))
        state = compute_centroids(ClusterState(np.repeat(np.arange(10), 3), clusters), fm)
        positives = [((a, b), float(rng.random()))
                     for a, b in itertools.combinations(range(10), 2)
                     if rng.random() < 0.4]
        cap_fraction = 0.3
        merged = apply_merges(state, positives, cap_fraction, fm)
        assert sorted(m for c in merged.clusters for m in c.members) == list(range(30))
        # cap = floor(0.3 * 10) = 3 unions at most: at least 7 clusters remain.
        assert merged.n_clusters >= 7

    def test_merged_cluster_has_recomputed_centroid(self):
        merged = apply_merges(self.state, [((0, 1), 0.9)], cap_fraction=0.5,
                              features=self.fm)
        big = next(c for c in merged.clusters if c.size == 4)
        expected = self.fm.rows[list(big.members)].mean(axis=0)
        expected /= np.linalg.norm(expected)
        assert np.allclose(big.centroid, expected)

    def test_cap_fraction_validated(self):
        with pytest.raises(ValueError):
            apply_merges(self.state, [], cap_fraction=0.0, features=self.fm)
