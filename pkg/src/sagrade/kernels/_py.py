"""Pure-NumPy fallback implementations of the clustering hot loops."""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def sq_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, shape (n_points, n_centroids)."""
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def assign(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Nearest-centroid labels; ties resolve to the lowest centroid index."""
    return np.argmin(sq_distances(points, centroids), axis=1).astype(np.int64)


def distortion(points: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> float:
    """Sum of squared distances of points to their assigned centroid."""
    diff = points - centroids[labels]
    return float(np.einsum("ij,ij->", diff, diff))


def update_centroids(
    points: np.ndarray, labels: np.ndarray, k: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-cluster means and member counts; empty clusters keep a zero row."""
    dim = points.shape[1]
    sums = np.zeros((k, dim), dtype=np.float64)
    counts = np.zeros(k, dtype=np.int64)
    np.add.at(sums, labels, points)
    np.add.at(counts, labels, 1)
    centroids = np.zeros_like(sums)
    nonempty = counts > 0
    centroids[nonempty] = sums[nonempty] / counts[nonempty, None]
    return centroids, counts
