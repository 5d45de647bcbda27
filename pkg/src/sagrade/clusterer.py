"""k-means over normalized answer vectors: seeded k-means++ runs with
restarts, elbow-based k selection, grade-based cluster labels, prototypes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .vectorizer import FeatureVector

EXCELLENT = "Excellent"
MIXED = "Mixed"
WEAK = "Weak"

EXCELLENT_MIN_TM = 4.5
WEAK_MAX_TM = 2.5


@dataclass(frozen=True)
class KMeansConfig:
    k: int
    max_iterations: int = 200
    restarts: int = 10
    seed: int = 42
    tolerance: float = 0.0

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "max_iterations": self.max_iterations,
            "restarts": self.restarts,
            "seed": self.seed,
            "tolerance": self.tolerance,
        }


@dataclass
class ClusterSet:
    assignments: dict[str, int]
    centroids: list[np.ndarray]
    distortion_trace: list[float]
    final_distortion: float
    converged: bool
    labels: dict[int, str] = field(default_factory=dict)
    prototypes: dict[int, str] = field(default_factory=dict)
    config: KMeansConfig | None = None

    @property
    def k(self) -> int:
        return len(self.centroids)

    def members(self, cluster: int) -> list[str]:
        return sorted(sid for sid, c in self.assignments.items() if c == cluster)

    def to_dict(self) -> dict:
        return {
            "assignments": dict(sorted(self.assignments.items())),
            "centroids": [c.tolist() for c in self.centroids],
            "distortion_trace": self.distortion_trace,
            "final_distortion": self.final_distortion,
            "converged": self.converged,
            "labels": {str(i): v for i, v in sorted(self.labels.items())},
            "prototypes": {str(i): v for i, v in sorted(self.prototypes.items())},
            "config": self.config.to_dict() if self.config else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterSet":
        return cls(
            assignments={k: int(v) for k, v in d["assignments"].items()},
            centroids=[np.asarray(c, dtype=float) for c in d["centroids"]],
            distortion_trace=[float(x) for x in d["distortion_trace"]],
            final_distortion=float(d["final_distortion"]),
            converged=bool(d["converged"]),
            labels={int(k): v for k, v in d["labels"].items()},
            prototypes={int(k): v for k, v in d["prototypes"].items()},
            config=KMeansConfig(**d["config"]) if d.get("config") else None,
        )


def _as_matrix(vectors: list[FeatureVector]) -> tuple[list[str], np.ndarray]:
    """Sort by source_id so results are independent of input order."""
    ordered = sorted(vectors, key=lambda v: v.source_id)
    ids = [v.source_id for v in ordered]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate source_ids in clustering input")
    matrix = np.ascontiguousarray([v.values for v in ordered], dtype=np.float64)
    return ids, matrix


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding over the (already sorted) point matrix."""
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centroids[0] = points[first]
    closest = kernels.sq_distances(points, centroids[:1]).ravel()
    for j in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(closest), r, side="right"))
            idx = min(idx, n - 1)
        centroids[j] = points[idx]
        d_new = kernels.sq_distances(points, centroids[j : j + 1]).ravel()
        closest = np.minimum(closest, d_new)
    return centroids


def _repair_empty(
    points: np.ndarray, labels: np.ndarray, centroids: np.ndarray, counts: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Move the point farthest from its centroid into each empty cluster."""
    labels = labels.copy()
    while True:
        empties = np.flatnonzero(counts == 0)
        if empties.size == 0:
            return labels, counts
        dists = kernels.sq_distances(points, np.ascontiguousarray(centroids))
        per_point = dists[np.arange(len(labels)), labels]
        # never empty a singleton cluster while filling another
        per_point[counts[labels] <= 1] = -np.inf
        donor = int(np.argmax(per_point))
        counts[labels[donor]] -= 1
        labels[donor] = int(empties[0])
        counts[empties[0]] += 1
        centroids, counts = kernels.update_centroids(points, labels, len(counts))


def _lloyd(
    points: np.ndarray, init_centroids: np.ndarray, config: KMeansConfig
) -> tuple[np.ndarray, np.ndarray, list[float], bool]:
    k = config.k
    centroids = np.ascontiguousarray(init_centroids)
    labels = kernels.assign(points, centroids)
    trace: list[float] = []
    converged = False
    for _ in range(config.max_iterations):
        centroids, counts = kernels.update_centroids(points, labels, k)
        if (counts == 0).any():
            labels, counts = _repair_empty(points, labels, centroids, counts)
            centroids, counts = kernels.update_centroids(points, labels, k)
        centroids = np.ascontiguousarray(centroids)
        energy = kernels.distortion(points, centroids, labels)
        new_labels = kernels.assign(points, centroids)
        if trace and config.tolerance > 0 and trace[-1] - energy <= config.tolerance:
            trace.append(energy)
            labels = new_labels
            converged = True
            break
        trace.append(energy)
        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels
    return labels, centroids, trace, converged


def run_kmeans(vectors: list[FeatureVector], config: KMeansConfig) -> ClusterSet:
    """Best-of-restarts seeded k-means; deterministic for a fixed seed."""
    if not vectors:
        raise ValueError("empty input")
    if config.k > len(vectors):
        raise ValueError(f"k={config.k} exceeds number of points {len(vectors)}")
    if config.k < 1:
        raise ValueError("k must be positive")
    ids, points = _as_matrix(vectors)

    best = None
    seeds = np.random.SeedSequence(config.seed).spawn(config.restarts)
    for restart, seq in enumerate(seeds):
        rng = np.random.Generator(np.random.PCG64(seq))
        init = _kmeanspp_init(points, config.k, rng)
        labels, centroids, trace, converged = _lloyd(points, init, config)
        energy = trace[-1]
        if best is None or energy < best[0]:
            best = (energy, restart, labels, centroids, trace, converged)

    energy, _, labels, centroids, trace, converged = best
    result = ClusterSet(
        assignments={sid: int(c) for sid, c in zip(ids, labels)},
        centroids=[centroids[j].copy() for j in range(config.k)],
        distortion_trace=trace,
        final_distortion=float(energy),
        converged=converged,
        config=config,
    )
    for j in range(config.k):
        members = result.members(j)
        if members:
            result.prototypes[j] = select_prototype(
                [v for v in vectors if v.source_id in set(members)], centroids[j]
            )
    return result


def select_prototype(members: list[FeatureVector], centroid: np.ndarray) -> str:
    """Member closest to the centroid; ties break to the smaller source_id."""
    if not members:
        raise ValueError("empty cluster has no prototype")
    ordered = sorted(members, key=lambda v: v.source_id)
    dists = [float(np.linalg.norm(v.values - centroid)) for v in ordered]
    return ordered[int(np.argmin(dists))].source_id


def select_k_elbow(
    vectors: list[FeatureVector],
    k_max: int,
    config: KMeansConfig | None = None,
    k_min: int = 1,
) -> tuple[int, list[tuple[int, float]]]:
    """Distortion-vs-k curve and the elbow chosen by maximum second difference."""
    base = config or KMeansConfig(k=1)
    if k_max > len(vectors):
        raise ValueError(f"k_max={k_max} exceeds number of points {len(vectors)}")
    curve = []
    for k in range(k_min, k_max + 1):
        cs = run_kmeans(
            vectors,
            KMeansConfig(
                k=k,
                max_iterations=base.max_iterations,
                restarts=base.restarts,
                seed=base.seed,
                tolerance=base.tolerance,
            ),
        )
        curve.append((k, cs.final_distortion))
    chosen = elbow_from_curve([e for _, e in curve], k_min=k_min)
    return chosen, curve


def elbow_from_curve(energies: list[float], k_min: int = 1) -> int:
    """k maximizing the second difference E(k-1) - 2E(k) + E(k+1)."""
    if len(energies) < 3:
        raise ValueError("need at least 3 curve points to locate an elbow")
    diffs = [
        energies[i - 1] - 2.0 * energies[i] + energies[i + 1]
        for i in range(1, len(energies) - 1)
    ]
    return k_min + 1 + int(np.argmax(diffs))


def label_clusters(clusters: ClusterSet, tm_by_id: dict[str, float]) -> ClusterSet:
    """Attach Excellent/Weak/Mixed labels from member grade averages.

    Labels are reporting metadata only; clustering itself never sees grades.
    """
    missing = sorted(set(clusters.assignments) - set(tm_by_id))
    if missing:
        raise ValueError(f"missing grades for assigned answers: {missing}")
    for j in range(clusters.k):
        tms = [tm_by_id[sid] for sid in clusters.members(j)]
        if not tms:
            continue
        if all(tm >= EXCELLENT_MIN_TM for tm in tms):
            clusters.labels[j] = EXCELLENT
        elif all(tm <= WEAK_MAX_TM for tm in tms):
            clusters.labels[j] = WEAK
        else:
            clusters.labels[j] = MIXED
    return clusters


def export_cluster_rows(
    clusters: ClusterSet, vectors: list[FeatureVector]
) -> list[tuple[str, int, str, float, bool]]:
    """Rows for the `source_id,cluster_index,label,distance_to_centroid,is_prototype` export."""
    by_id = {v.source_id: v for v in vectors}
    rows = []
    for sid in sorted(clusters.assignments):
        j = clusters.assignments[sid]
        dist = float(np.linalg.norm(by_id[sid].values - clusters.centroids[j]))
        rows.append(
            (sid, j, clusters.labels.get(j, ""), dist, clusters.prototypes.get(j) == sid)
        )
    return rows
