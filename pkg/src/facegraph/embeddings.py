"""Face embeddings, archive manifests, and the Euclidean distance primitive.

An archive manifest is an ordered list of images, each carrying the 128-d
embeddings of the faces detected in it. The manifest file format (one JSON
object per line, UTF-8) is the ingestion contract for the whole pipeline:

    {"image": "<id>", "embeddings": [[... 128 numbers ...], ...]}

Images with no faces carry an empty ``embeddings`` array and are retained,
so archive sizes stay honest for benchmarking.

All types in this module are immutable after construction and safe to share
across threads. Parsing is single-threaded per file.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

EMBEDDING_DIM = 128


class MalformedRecordError(ValueError):
    """A manifest line violates the record schema."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def as_embedding(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Validate and normalize one embedding to a read-only float64 vector.

    Raises ValueError when the vector is not exactly 128 finite numbers.
    """
    arr = np.array(values, dtype=np.float64)
    if arr.shape != (EMBEDDING_DIM,):
        raise ValueError(
            f"embedding must have exactly {EMBEDDING_DIM} elements, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError("embedding contains non-finite values")
    arr.setflags(write=False)
    return arr


def embedding_matrix(vectors: Iterable[Sequence[float]]) -> np.ndarray:
    """Stack embeddings into a read-only (n, 128) float64 matrix."""
    rows = [as_embedding(v) for v in vectors]
    if rows:
        mat = np.vstack(rows)
    else:
        mat = np.empty((0, EMBEDDING_DIM), dtype=np.float64)
    mat.setflags(write=False)
    return mat


def euclidean_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Exact Euclidean distance, accumulated in float64."""
    av = np.asarray(a, dtype=np.float64)
    bv = np.asarray(b, dtype=np.float64)
    d = av - bv
    return math.sqrt(float(np.dot(d, d)))


@dataclass(frozen=True)
class FaceObservation:
    """One detected face: its source image, slot within that image, embedding."""

    image_id: str
    slot: int
    embedding: np.ndarray


@dataclass(frozen=True)
class ImageRecord:
    """One archive image and the embeddings of its faces, in slot order."""

    image_id: str
    embeddings: np.ndarray  # (n_faces, 128), read-only

    @property
    def face_count(self) -> int:
        return self.embeddings.shape[0]


@dataclass(frozen=True)
class ArchiveManifest:
    """Ordered image records; processing order is the manifest order.

    Identity resolution is order-sensitive, so determinism downstream relies
    on this order being fixed.
    """

    images: tuple[ImageRecord, ...]

    def __len__(self) -> int:
        return len(self.images)

    def __iter__(self) -> Iterator[ImageRecord]:
        return iter(self.images)

    @property
    def face_count(self) -> int:
        return sum(rec.face_count for rec in self.images)

    def iter_faces(self) -> Iterator[FaceObservation]:
        for rec in self.images:
            for slot in range(rec.face_count):
                yield FaceObservation(rec.image_id, slot, rec.embeddings[slot])

    @staticmethod
    def from_pairs(pairs: Iterable[tuple[str, Iterable[Sequence[float]]]]) -> "ArchiveManifest":
        records = []
        seen: set[str] = set()
        for image_id, vectors in pairs:
            if image_id in seen:
                raise ValueError(f"duplicate image id {image_id!r}")
            seen.add(image_id)
            records.append(ImageRecord(image_id, embedding_matrix(vectors)))
        return ArchiveManifest(tuple(records))


def load_manifest(path) -> ArchiveManifest:
    """Parse a manifest file, rejecting malformed records with their line number.

    Raises MalformedRecordError for schema violations (wrong vector length,
    non-finite values, duplicate image ids, bad JSON) and OSError for I/O
    failures.
    """
    records: list[ImageRecord] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecordError(line_no, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise MalformedRecordError(line_no, "record is not an object")
            image_id = obj.get("image")
            if not isinstance(image_id, str) or not image_id:
                raise MalformedRecordError(line_no, "missing or empty 'image' field")
            if image_id in seen:
                raise MalformedRecordError(line_no, f"duplicate image id {image_id!r}")
            raw = obj.get("embeddings")
            if not isinstance(raw, list):
                raise MalformedRecordError(line_no, "'embeddings' must be an array")
            try:
                mat = embedding_matrix(raw)
            except (ValueError, TypeError) as exc:
                raise MalformedRecordError(line_no, str(exc)) from exc
            seen.add(image_id)
            records.append(ImageRecord(image_id, mat))
    return ArchiveManifest(tuple(records))


def save_manifest(manifest: ArchiveManifest, path) -> None:
    """Write a manifest back out in the line-delimited format (round-trips)."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in manifest:
            obj = {"image": rec.image_id, "embeddings": rec.embeddings.tolist()}
            fh.write(json.dumps(obj, sort_keys=True))
            fh.write("\n")
