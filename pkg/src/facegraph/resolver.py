"""Streaming identity resolution: match each face or mint a new identity.

Images are processed in manifest order and faces in slot order. Each face is
searched against the index of canonical embeddings; a hit below the distance
threshold (strictly less than, default 0.5) reuses that identity, a miss
appends the face as a new identity's permanent canonical vector. Canonical
vectors are never updated afterwards, so identity ids are dense integers in
first-appearance order.

Resolution is inherently order-sensitive; the functions here are strictly
sequential. Once resolution finishes the registry is immutable and can be
queried concurrently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .embeddings import ArchiveManifest, as_embedding
from .index import IndexConfig, SearchHit, create_index

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class IdentityRecord:
    identity_id: int
    embedding: np.ndarray
    first_image: str
    first_slot: int


@dataclass(frozen=True)
class ResolvedImage:
    """Identity assignment for one image, one id per face slot."""

    image_id: str
    identity_ids: tuple[int, ...]


class IdentityRegistry:
    """Canonical embedding per identity plus the search index over them."""

    def __init__(self, index=None, expected_n: int | None = None):
        self.index = index if index is not None else create_index(expected_n=expected_n)
        self.identities: list[IdentityRecord] = []

    def __len__(self) -> int:
        return len(self.identities)

    def canonical(self, identity_id: int) -> np.ndarray:
        return self.identities[identity_id].embedding

    def lookup(self, embedding, threshold: float = DEFAULT_THRESHOLD) -> SearchHit | None:
        """Read-only nearest-identity query; never modifies the registry."""
        return self.index.search_nearest(embedding, threshold)


def resolve_face(
    registry: IdentityRegistry,
    embedding,
    threshold: float = DEFAULT_THRESHOLD,
    first_seen: tuple[str, int] = ("", -1),
) -> tuple[int, bool]:
    """Return (identity_id, is_new) for one face, registering it on a miss."""
    vec = as_embedding(embedding)
    hit = registry.index.search_nearest(vec, threshold)
    if hit is not None:
        return hit.vector_id, False
    identity_id = registry.index.add(vec)
    registry.identities.append(
        IdentityRecord(identity_id, vec, first_seen[0], first_seen[1])
    )
    return identity_id, True


def resolve_archive(
    manifest: ArchiveManifest,
    config: IndexConfig | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    strict_dup_faces: bool = False,
) -> tuple[IdentityRegistry, list[ResolvedImage]]:
    """Resolve every face of the archive; returns the registry and one
    ResolvedImage per manifest image (zero-face images yield empty tuples).

    With ``strict_dup_faces`` a face that matches an identity already assigned
    within the same image is forced into a new identity instead (off by
    default: crowd photos can legitimately duplicate via near-identical
    detections, and the graph stage suppresses self-loops anyway).
    """
    if threshold <= 0:
        raise ValueError("threshold must be > 0")
    registry = IdentityRegistry(
        create_index(config, expected_n=manifest.face_count) if config else None,
        expected_n=manifest.face_count,
    )
    resolved: list[ResolvedImage] = []
    for record in manifest:
        ids: list[int] = []
        seen_here: set[int] = set()
        for slot in range(record.face_count):
            emb = record.embeddings[slot]
            identity_id, is_new = resolve_face(
                registry, emb, threshold, first_seen=(record.image_id, slot)
            )
            if strict_dup_faces and not is_new and identity_id in seen_here:
                identity_id = registry.index.add(emb)
                registry.identities.append(
                    IdentityRecord(identity_id, as_embedding(emb), record.image_id, slot)
                )
            ids.append(identity_id)
            seen_here.add(identity_id)
        resolved.append(ResolvedImage(record.image_id, tuple(ids)))
    return registry, resolved


def reassign_archive(
    registry: IdentityRegistry,
    manifest: ArchiveManifest,
    threshold: float = DEFAULT_THRESHOLD,
) -> list[ResolvedImage]:
    """Re-run assignment against a finished registry without modifying it."""
    resolved = []
    for record in manifest:
        ids = []
        for slot in range(record.face_count):
            hit = registry.lookup(record.embeddings[slot], threshold)
            ids.append(hit.vector_id if hit is not None else -1)
        resolved.append(ResolvedImage(record.image_id, tuple(ids)))
    return resolved


# -- file formats -----------------------------------------------------------


def save_resolution(resolved: list[ResolvedImage], path) -> None:
    """One line per image: {"image": ..., "identities": [...]}."""
    with open(path, "w", encoding="utf-8") as fh:
        for item in resolved:
            fh.write(
                json.dumps(
                    {"image": item.image_id, "identities": list(item.identity_ids)},
                    sort_keys=True,
                )
            )
            fh.write("\n")


def load_resolution(path) -> list[ResolvedImage]:
    resolved = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            resolved.append(
                ResolvedImage(obj["image"], tuple(int(i) for i in obj["identities"]))
            )
    return resolved


def save_registry(registry: IdentityRegistry, path) -> None:
    """One line per identity: canonical embedding plus first-seen provenance."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in registry.identities:
            fh.write(
                json.dumps(
                    {
                        "identity": rec.identity_id,
                        "embedding": rec.embedding.tolist(),
                        "first_seen": {"image": rec.first_image, "slot": rec.first_slot},
                    },
                    sort_keys=True,
                )
            )
            fh.write("\n")


def load_registry(path, config: IndexConfig | None = None) -> IdentityRegistry:
    """Rebuild a registry (and its index) from a registry export."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rows.append(json.loads(line))
    rows.sort(key=lambda r: int(r["identity"]))
    registry = IdentityRegistry(
        create_index(config, expected_n=len(rows)) if config else None,
        expected_n=len(rows),
    )
    for pos, row in enumerate(rows):
        if int(row["identity"]) != pos:
            raise ValueError("registry export has non-dense identity ids")
        vec = as_embedding(row["embedding"])
        registry.index.add(vec)
        registry.identities.append(
            IdentityRecord(pos, vec, row["first_seen"]["image"], int(row["first_seen"]["slot"]))
        )
    return registry
