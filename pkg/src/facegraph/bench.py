"""Scaling benchmark: naive quadratic resolution vs. Flat vs. IVFPQ.

The naive baseline is an independent implementation (plain nested loop over
the canonical vectors, no index machinery), so it doubles as the resolution
oracle for the exact backends. Every run cross-checks recovered identity
counts against the planted ground truth; correctness is reported alongside
time, never silently traded.

Wall-clock numbers are machine-specific. What is stable, and what the tests
assert, is the shape: the naive resolver's log-log slope is about 2, the
IVFPQ slope stays well below it, and at the largest size IVFPQ < Flat <
naive.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .embeddings import ArchiveManifest
from .index import IndexConfig, auto_nlist
from .resolver import DEFAULT_THRESHOLD, ResolvedImage, resolve_archive
from .synthetic import SyntheticSpec, generate_synthetic_archive

BACKENDS = ("naive", "flat", "ivfpq")


@dataclass(frozen=True)
class TimingRecord:
    backend: str
    images: int
    faces: int
    seconds: float
    identities: int
    ground_truth_identities: int

    @property
    def identity_deviation(self) -> int:
        return self.identities - self.ground_truth_identities


def naive_resolve_archive(
    manifest: ArchiveManifest, threshold: float = DEFAULT_THRESHOLD
) -> tuple[list[np.ndarray], list[ResolvedImage]]:
    """Reference resolver: exhaustive pairwise scan, no index.

    Returns the canonical vectors and one ResolvedImage per manifest image.
    Semantics match the Flat backend exactly: nearest canonical wins when its
    distance is strictly below the threshold, ties go to the lowest id, and a
    miss appends the face as a new canonical.
    """
    if threshold <= 0:
        raise ValueError("threshold must be > 0")
    t2 = threshold * threshold
    canonicals: list[np.ndarray] = []
    resolved = []
    for record in manifest:
        ids = []
        for slot in range(record.face_count):
            face = record.embeddings[slot]
            best_id = -1
            best_d2 = t2
            for cand_id, canon in enumerate(canonicals):
                diff = canon - face
                d2 = float(diff @ diff)
                if d2 < best_d2:  # strict: ties keep the earlier (lower) id
                    best_d2 = d2
                    best_id = cand_id
            if best_id < 0:
                best_id = len(canonicals)
                canonicals.append(face.astype(np.float64))
            ids.append(best_id)
        resolved.append(ResolvedImage(record.image_id, tuple(ids)))
    return canonicals, resolved


def benchmark_spec(
    faces: int,
    seed: int,
    faces_per_image: tuple[int, int] = (2, 3),
    identity_fraction: float = 0.5,
    noise_radius: float = 0.05,
    min_separation: float = 1.2,
    effective_dim: int | None = None,
) -> SyntheticSpec:
    """Archive spec whose identity count grows with its face count.

    New faces keep appearing throughout the stream, which is what makes the
    naive resolver quadratic; a fixed identity pool would make it linear.
    """
    mean_faces = (faces_per_image[0] + faces_per_image[1]) / 2.0
    images = max(1, round(faces / mean_faces))
    identities = max(1, int(faces * identity_fraction))
    return SyntheticSpec(
        identity_count=identities,
        image_count=images,
        faces_min=faces_per_image[0],
        faces_max=faces_per_image[1],
        noise_radius=noise_radius,
        min_separation=min_separation,
        seed=seed,
        effective_dim=effective_dim,
    )


def _ivfpq_config(expected_faces: int, seed: int) -> IndexConfig:
    # train as soon as k-means has a usable sample, rather than the
    # production default of 1024, so small sweep sizes exercise the
    # trained path too
    nlist = auto_nlist(expected_faces)
    return IndexConfig(
        backend="ivfpq",
        nprobe=8,
        seed=seed,
        train_min=max(256, 2 * nlist),
    )


def run_scaling_benchmark(
    sizes: list[int],
    backends: tuple[str, ...] = BACKENDS,
    seed: int = 0,
    threshold: float = DEFAULT_THRESHOLD,
    progress=None,
) -> list[TimingRecord]:
    """Resolve one synthetic archive per size x backend and time it.

    Archive generation happens outside the timed section. ``progress`` is an
    optional callable receiving each TimingRecord as it lands.
    """
    if sorted(sizes) != list(sizes):
        raise ValueError("sizes must be ascending")
    unknown = set(backends) - set(BACKENDS)
    if unknown:
        raise ValueError(f"unknown backends: {sorted(unknown)}")
    records = []
    for size in sizes:
        spec = benchmark_spec(size, seed)
        manifest, labels = generate_synthetic_archive(spec)
        truth = len({identity for image in labels for identity in image})
        for backend in backends:
            started = time.perf_counter()
            if backend == "naive":
                canonicals, _ = naive_resolve_archive(manifest, threshold)
                found = len(canonicals)
            else:
                config = (
                    IndexConfig(backend="flat")
                    if backend == "flat"
                    else _ivfpq_config(manifest.face_count, seed)
                )
                registry, _ = resolve_archive(manifest, config, threshold)
                found = len(registry)
            elapsed = time.perf_counter() - started
            record = TimingRecord(
                backend=backend,
                images=len(manifest),
                faces=manifest.face_count,
                seconds=elapsed,
                identities=found,
                ground_truth_identities=truth,
            )
            records.append(record)
            if progress is not None:
                progress(record)
    return records


def fit_loglog_slope(faces: list[int], seconds: list[float]) -> float:
    """Least-squares slope of log(seconds) against log(faces)."""
    if len(faces) != len(seconds) or len(faces) < 2:
        raise ValueError("need at least two (faces, seconds) points")
    return float(np.polyfit(np.log(faces), np.log(seconds), 1)[0])


def slope_for(records: list[TimingRecord], backend: str) -> float:
    mine = [r for r in records if r.backend == backend]
    return fit_loglog_slope([r.faces for r in mine], [r.seconds for r in mine])


def write_series_csv(records: list[TimingRecord], path) -> None:
    """Plot-ready series: backend,faces,seconds (plus accounting columns)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("backend,faces,seconds,images,identities,ground_truth\n")
        for r in records:
            fh.write(
                f"{r.backend},{r.faces},{r.seconds:.6f},{r.images},"
                f"{r.identities},{r.ground_truth_identities}\n"
            )


def format_table(records: list[TimingRecord]) -> str:
    lines = [
        f"{'backend':<8} {'faces':>8} {'images':>8} {'seconds':>10} "
        f"{'identities':>11} {'truth':>8} {'dev':>5}"
    ]
    for r in records:
        lines.append(
            f"{r.backend:<8} {r.faces:>8} {r.images:>8} {r.seconds:>10.3f} "
            f"{r.identities:>11} {r.ground_truth_identities:>8} {r.identity_deviation:>+5}"
        )
    return "\n".join(lines)


def plot_series(records: list[TimingRecord], path) -> None:
    """Render time-vs-size per backend (requires matplotlib)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 5))
    for backend in dict.fromkeys(r.backend for r in records):
        mine = [r for r in records if r.backend == backend]
        ax.plot([r.faces for r in mine], [r.seconds for r in mine], marker="o", label=backend)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("faces in archive")
    ax.set_ylabel("resolution wall time (s)")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
