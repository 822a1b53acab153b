"""Planted-identity synthetic archives: oracle-bearing test and benchmark data.

Each identity gets an anchor vector; anchors are pairwise separated by at
least the configured minimum, and every face is its identity's anchor plus
uniform noise inside a ball. With ``separation > 2*noise + threshold`` the
planted labels are unambiguous under the resolution threshold, so the
generator's labels double as ground truth.

``effective_dim`` optionally confines anchors to a random low-dimensional
subspace of the embedding space (rotated so it is not axis-aligned), for
studying how search quality depends on data dimensionality. The default is
full-dimensional: packing many separated anchors is cheapest there, which
keeps the overall spread, and with it quantization distortion, small.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import EMBEDDING_DIM, ArchiveManifest, ImageRecord


class InfeasibleSpecError(RuntimeError):
    """Anchor placement could not satisfy the separation within the budget."""


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of a planted archive.

    ``faces_min``/``faces_max`` bound the per-image uniform face count.
    ``threshold`` is the resolution threshold the labels must stay
    unambiguous under.
    """

    identity_count: int
    image_count: int
    faces_min: int = 1
    faces_max: int = 4
    noise_radius: float = 0.2
    min_separation: float = 1.2
    seed: int = 0
    threshold: float = 0.5
    effective_dim: int | None = None
    anchor_scale: float | None = None

    def __post_init__(self):
        if self.identity_count < 1 or self.image_count < 1:
            raise ValueError("identity_count and image_count must be >= 1")
        if not (0 < self.faces_min <= self.faces_max):
            raise ValueError("need 0 < faces_min <= faces_max")
        if self.min_separation <= 2.0 * self.noise_radius + self.threshold:
            raise ValueError(
                "min_separation must exceed 2*noise_radius + threshold, or planted "
                "labels are ambiguous"
            )
        if 2.0 * self.noise_radius >= self.threshold:
            raise ValueError("2*noise_radius must stay below the threshold")
        if self.effective_dim is not None and not (1 <= self.effective_dim <= EMBEDDING_DIM):
            raise ValueError("effective_dim out of range")
        if self.image_count * self.faces_min < self.identity_count:
            raise ValueError("archive too small to show every identity at least once")


def _ball_noise(rng: np.random.Generator, n: int, dim: int, radius: float) -> np.ndarray:
    """Uniform samples from the L2 ball of the given radius."""
    direction = rng.standard_normal((n, dim))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / dim)
    return direction * r[:, None]


def _auto_scale(count: int, dim: int, min_separation: float) -> float:
    """Gaussian scale keeping expected separation violations rare.

    Pairwise squared distance is 2*scale^2 * chi2(dim); pick the scale so the
    left-tail mass below min_separation stays around 1/(10*count) per pair.
    """
    from math import exp, lgamma, log

    if count < 2:
        return min_separation
    target = log(10.0 * count)
    z = 2.0 * exp(2.0 * (lgamma(dim / 2.0 + 1.0) - target) / dim)
    return float(min_separation / np.sqrt(2.0 * z))


def _violating_rows(low: np.ndarray, min_sep2: float, chunk: int = 1024) -> np.ndarray:
    """Indices whose nearest other anchor is closer than sqrt(min_sep2)."""
    n = low.shape[0]
    norms = np.einsum("ij,ij->i", low, low)
    bad: list[int] = []
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        d2 = norms[start:stop, None] - 2.0 * (low[start:stop] @ low.T) + norms[None, :]
        d2[np.arange(stop - start), np.arange(start, stop)] = np.inf
        bad.extend(int(i) for i in (start + np.flatnonzero(d2.min(axis=1) < min_sep2)))
    return np.array(bad, dtype=np.int64)


def place_separated_anchors(
    rng: np.random.Generator,
    count: int,
    min_separation: float,
    effective_dim: int | None = None,
    scale: float | None = None,
    max_rounds: int = 200,
) -> np.ndarray:
    """Draw ``count`` anchors in 128-d with pairwise distance >= min_separation.

    Anchors are Gaussian at a scale chosen so violations are rare; offending
    anchors are redrawn for up to ``max_rounds`` rounds before giving up with
    InfeasibleSpecError. With ``effective_dim`` the anchors live in a random
    rotated subspace of that dimension.
    """
    dim = effective_dim if effective_dim is not None else EMBEDDING_DIM
    if scale is None:
        scale = _auto_scale(count, dim, min_separation)
    min_sep2 = min_separation * min_separation
    low = rng.standard_normal((count, dim)) * scale
    for _ in range(max_rounds):
        bad = _violating_rows(low, min_sep2)
        if bad.size == 0:
            break
        # redraw the higher-indexed half of each clashing neighborhood
        keep_first = bad[bad > bad.min()] if bad.size > 1 else bad
        redraw = keep_first if keep_first.size else bad
        low[redraw] = rng.standard_normal((redraw.size, dim)) * scale
    else:
        raise InfeasibleSpecError(
            f"could not place {count} anchors at separation {min_separation}"
        )
    if effective_dim is None:
        return low
    gauss = rng.standard_normal((EMBEDDING_DIM, dim))
    basis, _ = np.linalg.qr(gauss)  # random orthonormal columns
    return low @ basis.T


def generate_synthetic_archive(
    spec: SyntheticSpec,
) -> tuple[ArchiveManifest, list[tuple[int, ...]]]:
    """Build the manifest and the per-image planted identity labels.

    Deterministic per seed. Every identity appears at least once; the first
    faces of the stream cycle through a seeded permutation of the identities
    so coverage is guaranteed regardless of archive size.
    """
    rng = np.random.default_rng(spec.seed)
    anchors = place_separated_anchors(
        rng,
        spec.identity_count,
        spec.min_separation,
        spec.effective_dim,
        spec.anchor_scale,
    )
    face_counts = rng.integers(spec.faces_min, spec.faces_max + 1, size=spec.image_count)
    total = int(face_counts.sum())
    labels = rng.integers(0, spec.identity_count, size=total)
    labels[: spec.identity_count] = rng.permutation(spec.identity_count)
    noise = _ball_noise(rng, total, EMBEDDING_DIM, spec.noise_radius)
    faces = anchors[labels] + noise

    records = []
    image_labels: list[tuple[int, ...]] = []
    cursor = 0
    width = len(str(spec.image_count - 1)) if spec.image_count > 1 else 1
    for i, count in enumerate(face_counts):
        block = faces[cursor : cursor + count]
        block = np.ascontiguousarray(block)
        block.setflags(write=False)
        records.append(ImageRecord(f"img{str(i).zfill(width)}", block))
        image_labels.append(tuple(int(x) for x in labels[cursor : cursor + count]))
        cursor += count
    return ArchiveManifest(tuple(records)), image_labels
