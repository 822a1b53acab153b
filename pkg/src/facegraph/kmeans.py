"""Seeded k-means with k-means++ initialization.

Internal machinery for the IVFPQ index (coarse quantizer and the per-subspace
product-quantization codebooks). Deterministic for a given RNG state.
"""

from __future__ import annotations

import numpy as np

MAX_ITERS = 25
REL_TOL = 1e-4


def squared_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Pairwise squared L2 distances, (n_points, n_centers)."""
    p2 = np.einsum("ij,ij->i", points, points)
    c2 = np.einsum("ij,ij->i", centers, centers)
    d2 = p2[:, None] - 2.0 * (points @ centers.T) + c2[None, :]
    np.maximum(d2, 0.0, out=d2)
    return d2


def _plus_plus_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centers[0] = points[first]
    d2 = squared_distances(points, centers[:1])[:, 0]
    for i in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # all remaining mass on already-chosen points: fall back to uniform
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[i] = points[idx]
        d2 = np.minimum(d2, squared_distances(points, centers[i : i + 1])[:, 0])
    return centers


def kmeans(
    points: np.ndarray,
    k: int,
    rng: np.random.Generator,
    max_iters: int = MAX_ITERS,
    rel_tol: float = REL_TOL,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Cluster points into k centroids; returns (centroids, assignment, inertia).

    Stops after ``max_iters`` Lloyd iterations or when the relative inertia
    change drops below ``rel_tol``. Empty clusters are repaired by splitting
    the largest cluster (its farthest member becomes the empty centroid).
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    n = points.shape[0]
    if n < k:
        raise ValueError(f"k-means needs at least k={k} points, got {n}")
    centers = _plus_plus_init(points, k, rng)
    assign = np.zeros(n, dtype=np.int64)
    prev_inertia = np.inf
    inertia = np.inf
    for _ in range(max_iters):
        d2 = squared_distances(points, centers)
        assign = d2.argmin(axis=1)
        best = d2[np.arange(n), assign]
        inertia = float(best.sum())

        counts = np.bincount(assign, minlength=k)
        for empty in np.flatnonzero(counts == 0):
            largest = int(counts.argmax())
            members = np.flatnonzero(assign == largest)
            farthest = members[int(best[members].argmax())]
            centers[empty] = points[farthest]
            assign[farthest] = empty
            best[farthest] = 0.0
            counts[largest] -= 1
            counts[empty] += 1

        sums = np.zeros_like(centers)
        np.add.at(sums, assign, points)
        centers = sums / counts[:, None]

        if np.isfinite(prev_inertia) and prev_inertia - inertia <= rel_tol * max(prev_inertia, 1e-30):
            break
        prev_inertia = inertia

    d2 = squared_distances(points, centers)
    assign = d2.argmin(axis=1)
    inertia = float(d2[np.arange(n), assign].sum())
    return centers, assign, inertia
