import itertools
import random

import numpy as np
import pytest

from sagrade.clusterer import (
    EXCELLENT,
    MIXED,
    WEAK,
    ClusterSet,
    KMeansConfig,
    elbow_from_curve,
    label_clusters,
    run_kmeans,
    select_k_elbow,
    select_prototype,
)
from sagrade.vectorizer import FeatureVector


def fv(sid, *values):
    return FeatureVector(sid, np.array(values, dtype=float))


def blob_vectors(centers, per_blob=10, spread=0.3, seed=1):
    rng = np.random.default_rng(seed)
    out = []
    for b, center in enumerate(centers):
        for i in range(per_blob):
            out.append(
                FeatureVector(f"b{b}a{i:02d}", np.asarray(center) + rng.normal(0, spread, len(center)))
            )
    return out


def partition(cs: ClusterSet):
    return sorted(frozenset(cs.members(j)) for j in range(cs.k) if cs.members(j))


def brute_force_best_2partition(vectors):
    """Exhaustive oracle: minimum distortion over all 2-partitions."""
    best = None
    ids = [v.source_id for v in vectors]
    pts = {v.source_id: v.values for v in vectors}
    for size in range(1, len(ids)):
        for group in itertools.combinations(ids, size):
            g1, g2 = set(group), set(ids) - set(group)
            energy = 0.0
            for g in (g1, g2):
                mat = np.array([pts[i] for i in sorted(g)])
                centroid = mat.mean(axis=0)
                energy += float(((mat - centroid) ** 2).sum())
            key = (energy, sorted([tuple(sorted(g1)), tuple(sorted(g2))]))
            if best is None or energy < best[0]:
                best = (energy, sorted([frozenset(g1), frozenset(g2)], key=sorted))
    return best


class TestRunKmeans:
    def test_k1_centroid_is_mean(self):
        vecs = blob_vectors([(0, 0), (5, 5)], per_blob=5)
        cs = run_kmeans(vecs, KMeansConfig(k=1))
        mean = np.mean([v.values for v in vecs], axis=0)
        assert np.allclose(cs.centroids[0], mean, atol=1e-12)

    def test_two_tight_pairs_matches_exhaustive_oracle(self):
        vecs = [fv("a", 0, 0), fv("b", 0, 0.1), fv("c", 5, 5), fv("d", 5, 5.1)]
        cs = run_kmeans(vecs, KMeansConfig(k=2))
        oracle_energy, oracle_partition = brute_force_best_2partition(vecs)
        assert partition(cs) == sorted(oracle_partition, key=sorted)
        assert cs.final_distortion == pytest.approx(oracle_energy, abs=1e-12)

    def test_k_exceeds_points(self):
        with pytest.raises(ValueError):
            run_kmeans([fv("a", 1.0)], KMeansConfig(k=2))

    def test_empty_input(self):
        with pytest.raises(ValueError):
            run_kmeans([], KMeansConfig(k=1))

    def test_distortion_trace_non_increasing(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            vecs = [FeatureVector(f"p{i:03d}", rng.normal(size=4)) for i in range(30)]
            cs = run_kmeans(vecs, KMeansConfig(k=4, seed=seed))
            trace = cs.distortion_trace
            assert all(a >= b - 1e-9 for a, b in zip(trace, trace[1:])), trace

    def test_centroids_are_member_means(self):
        vecs = blob_vectors([(0, 0), (4, 4), (8, 0)], per_blob=8)
        cs = run_kmeans(vecs, KMeansConfig(k=3))
        by_id = {v.source_id: v.values for v in vecs}
        for j in range(cs.k):
            members = cs.members(j)
            mean = np.mean([by_id[m] for m in members], axis=0)
            assert np.allclose(cs.centroids[j], mean, atol=1e-9)

    def test_fixed_seed_reproducible(self):
        vecs = blob_vectors([(0, 0), (3, 3)], per_blob=6)
        results = [run_kmeans(vecs, KMeansConfig(k=2, seed=7)) for _ in range(5)]
        parts = [partition(r) for r in results]
        assert all(p == parts[0] for p in parts)

    def test_input_permutation_invariant(self):
        vecs = blob_vectors([(0, 0), (3, 3), (6, 0)], per_blob=7)
        cs1 = run_kmeans(vecs, KMeansConfig(k=3, seed=11))
        shuffled = vecs[:]
        random.Random(5).shuffle(shuffled)
        cs2 = run_kmeans(shuffled, KMeansConfig(k=3, seed=11))
        assert partition(cs1) == partition(cs2)
        assert cs1.final_distortion == cs2.final_distortion


class TestElbow:
    def test_fixed_curve(self):
        assert elbow_from_curve([100, 20, 18, 17]) == 2

    def test_too_short_curve(self):
        with pytest.raises(ValueError):
            elbow_from_curve([10, 5])

    def test_three_blobs(self):
        vecs = blob_vectors([(0, 0), (10, 0), (0, 10)], per_blob=10)
        k, curve = select_k_elbow(vecs, 6)
        assert k == 3
        assert [c[0] for c in curve] == [1, 2, 3, 4, 5, 6]
        energies = [c[1] for c in curve]
        assert all(a >= b - 1e-9 for a, b in zip(energies, energies[1:]))

    def test_k_max_exceeds_points(self):
        with pytest.raises(ValueError):
            select_k_elbow([fv("a", 0.0), fv("b", 1.0)], 5)


class TestLabelClusters:
    def make_clusters(self, assignments):
        k = max(assignments.values()) + 1
        return ClusterSet(
            assignments=assignments,
            centroids=[np.zeros(2) for _ in range(k)],
            distortion_trace=[0.0],
            final_distortion=0.0,
            converged=True,
        )

    def test_excellent(self):
        cs = self.make_clusters({"a": 0, "b": 0, "c": 0})
        label_clusters(cs, {"a": 5.0, "b": 5.0, "c": 5.0})
        assert cs.labels[0] == EXCELLENT

    def test_weak(self):
        cs = self.make_clusters({"a": 0, "b": 0})
        label_clusters(cs, {"a": 2.0, "b": 2.0})
        assert cs.labels[0] == WEAK

    def test_mixed(self):
        cs = self.make_clusters({"a": 0, "b": 0, "c": 0})
        label_clusters(cs, {"a": 1.0, "b": 3.0, "c": 5.0})
        assert cs.labels[0] == MIXED

    def test_boundaries(self):
        cs = self.make_clusters({"a": 0, "b": 1})
        label_clusters(cs, {"a": 4.5, "b": 2.5})
        assert cs.labels[0] == EXCELLENT
        assert cs.labels[1] == WEAK

    def test_missing_grades(self):
        cs = self.make_clusters({"a": 0, "b": 0})
        with pytest.raises(ValueError, match="missing grades"):
            label_clusters(cs, {"a": 5.0})

    def test_invariant_under_renumbering(self):
        cs1 = self.make_clusters({"a": 0, "b": 1})
        cs2 = self.make_clusters({"a": 1, "b": 0})
        label_clusters(cs1, {"a": 5.0, "b": 2.0})
        label_clusters(cs2, {"a": 5.0, "b": 2.0})
        assert cs1.labels[0] == cs2.labels[1] == EXCELLENT
        assert cs1.labels[1] == cs2.labels[0] == WEAK


class TestSelectPrototype:
    def test_singleton(self):
        assert select_prototype([fv("only", 1, 1)], np.zeros(2)) == "only"

    def test_direct_minimum(self):
        members = [fv("far", 0.9, 0), fv("mid", 0.5, 0), fv("near", 0.1, 0)]
        assert select_prototype(members, np.zeros(2)) == "near"

    def test_tie_breaks_lexicographically(self):
        members = [fv("zz", 1.0, 0), fv("aa", -1.0, 0)]
        assert select_prototype(members, np.zeros(2)) == "aa"

    def test_empty(self):
        with pytest.raises(ValueError):
            select_prototype([], np.zeros(2))


def test_clusterset_roundtrip():
    vecs = blob_vectors([(0, 0), (4, 4)], per_blob=4)
    cs = run_kmeans(vecs, KMeansConfig(k=2))
    label_clusters(cs, {v.source_id: 5.0 for v in vecs})
    restored = ClusterSet.from_dict(cs.to_dict())
    assert restored.assignments == cs.assignments
    assert restored.labels == cs.labels
    assert restored.prototypes == cs.prototypes
    assert all(np.array_equal(a, b) for a, b in zip(restored.centroids, cs.centroids))
