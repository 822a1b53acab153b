"""Incremental nearest-neighbor indexes over face embeddings.

Two interchangeable backends:

* ``FlatIndex`` — exact brute-force L2 scan. Serves as the ground-truth
  oracle for everything else.
* ``IvfPqIndex`` — inverted-file index with product quantization. Vectors
  are partitioned by their nearest coarse k-means centroid; each vector is
  stored as an m-byte code quantizing its residual (vector minus coarse
  centroid). Queries scan the ``nprobe`` closest inverted lists and rank
  candidates by asymmetric distance (ADC): exact query vs. coded vector via
  per-subspace lookup tables.

Both assign dense integer ids in insertion order starting at 0. Searches
return the nearest stored vector only when its distance is strictly below
the caller's threshold; ties break toward the lowest id.

Writers require exclusive access (add/train mutate state); searches are safe
to run concurrently between mutations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict, replace
from math import sqrt

import numpy as np

from .embeddings import EMBEDDING_DIM, as_embedding
from .kmeans import kmeans

KSUB = 256  # codewords per sub-codebook; 8-bit codes are byte aligned
DEFAULT_EXPECTED_N = 4096


class UntrainedIndexError(RuntimeError):
    """IVFPQ operation requires training that has not happened."""


class InsufficientTrainingDataError(ValueError):
    """Training sample is too small for the configured cluster counts."""


def auto_nlist(expected_n: int) -> int:
    return max(1, int(4.0 * sqrt(max(expected_n, 0))))


@dataclass(frozen=True)
class IndexConfig:
    """Backend selection and IVFPQ parameters.

    ``nlist=None`` resolves to ``max(1, floor(4*sqrt(expected_n)))`` when the
    index is constructed. ``nprobe`` is clamped to ``nlist``. Before
    ``train_min`` vectors have been added, an IVFPQ index with the cold-start
    buffer enabled answers searches by exact scan of the buffered vectors; it
    trains on the buffer the moment ``train_min`` is reached and migrates the
    buffered vectors into the inverted lists. The effective training floor is
    ``max(train_min, nlist, 256)`` so k-means always has at least k points.
    """

    backend: str = "flat"  # "flat" | "ivfpq"
    nlist: int | None = None
    m: int = 8
    nbits: int = 8
    nprobe: int = 8
    train_min: int = 1024
    seed: int = 0
    cold_start_buffer: bool = True

    def __post_init__(self):
        if self.backend not in ("flat", "ivfpq"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if EMBEDDING_DIM % self.m != 0:
            raise ValueError(f"m={self.m} must divide {EMBEDDING_DIM}")
        if self.nbits != 8:
            raise ValueError("nbits is fixed at 8 (byte-aligned codes)")
        if self.nlist is not None and self.nlist < 1:
            raise ValueError("nlist must be >= 1")
        if self.nprobe < 1:
            raise ValueError("nprobe must be >= 1")


@dataclass(frozen=True)
class SearchHit:
    vector_id: int
    distance: float


class _GrowMatrix:
    """Append-only float64/uint8 matrix with capacity doubling."""

    def __init__(self, cols: int, dtype=np.float64):
        self._data = np.empty((16, cols), dtype=dtype)
        self.n = 0

    def append(self, row: np.ndarray) -> None:
        if self.n == self._data.shape[0]:
            grown = np.empty((self._data.shape[0] * 2, self._data.shape[1]), dtype=self._data.dtype)
            grown[: self.n] = self._data[: self.n]
            self._data = grown
        self._data[self.n] = row
        self.n += 1

    def view(self) -> np.ndarray:
        return self._data[: self.n]


class FlatIndex:
    """Exact L2 index: linear scan over all stored vectors."""

    backend = "flat"

    def __init__(self, config: IndexConfig | None = None, expected_n: int | None = None):
        self.config = config or IndexConfig(backend="flat")
        self._store = _GrowMatrix(EMBEDDING_DIM)

    def __len__(self) -> int:
        return self._store.n

    @property
    def vectors(self) -> np.ndarray:
        return self._store.view()

    def add(self, embedding) -> int:
        vec = as_embedding(embedding)
        self._store.append(vec)
        return self._store.n - 1

    def search_nearest(self, query, threshold: float) -> SearchHit | None:
        if threshold <= 0:
            raise ValueError("threshold must be > 0")
        if self._store.n == 0:
            return None
        q = np.asarray(query, dtype=np.float64)
        diff = self._store.view() - q
        d2 = np.einsum("ij,ij->i", diff, diff)
        best = int(d2.argmin())  # argmin takes the first minimum: lowest id
        # compare in squared space; threshold is stored unsquared
        if d2[best] < threshold * threshold:
            return SearchHit(best, sqrt(float(d2[best])))
        return None

    def save(self, path) -> None:
        np.savez(
            path,
            kind="flat",
            version=1,
            config=json.dumps(asdict(self.config), sort_keys=True),
            vectors=self._store.view().copy(),
        )

    @staticmethod
    def load(path) -> "FlatIndex":
        with np.load(path, allow_pickle=False) as data:
            if str(data["kind"]) != "flat":
                raise ValueError("snapshot is not a flat index")
            config = IndexConfig(**json.loads(str(data["config"])))
            index = FlatIndex(config)
            for row in data["vectors"]:
                index._store.append(row)
        return index


class IvfPqIndex:
    """Inverted-file index with product quantization over residuals."""

    backend = "ivfpq"

    def __init__(self, config: IndexConfig | None = None, expected_n: int | None = None):
        self.config = config or IndexConfig(backend="ivfpq")
        self.nlist = self.config.nlist or auto_nlist(expected_n or DEFAULT_EXPECTED_N)
        self.nprobe = min(self.config.nprobe, self.nlist)
        self.m = self.config.m
        self.dsub = EMBEDDING_DIM // self.m
        self.train_floor = max(self.config.train_min, self.nlist, KSUB)
        self.trained = False
        self.coarse_centroids: np.ndarray | None = None  # (nlist, 128)
        self.codebooks: np.ndarray | None = None  # (m, 256, dsub)
        self._codebook_norms: np.ndarray | None = None
        self._coarse_norms: np.ndarray | None = None
        self._list_ids: list[list[int]] = []
        self._list_codes: list[_GrowMatrix] = []
        self._buffer = _GrowMatrix(EMBEDDING_DIM)
        self._n = 0

    def __len__(self) -> int:
        return self._n

    # -- training ----------------------------------------------------------

    def train(self, sample) -> None:
        """Fit the coarse quantizer and PQ codebooks from a sample of vectors.

        Deterministic for a given config seed. Any vectors already buffered
        are migrated into the inverted lists afterwards.
        """
        mat = np.asarray(sample, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[1] != EMBEDDING_DIM:
            raise ValueError("training sample must be (n, 128)")
        required = max(self.nlist, KSUB)
        if mat.shape[0] < required:
            raise InsufficientTrainingDataError(
                f"need at least {required} vectors to train (nlist={self.nlist}), got {mat.shape[0]}"
            )
        rng = np.random.default_rng(self.config.seed)
        centers, assign, _ = kmeans(mat, self.nlist, rng)
        self.coarse_centroids = centers
        residuals = mat - centers[assign]
        codebooks = np.empty((self.m, KSUB, self.dsub), dtype=np.float64)
        for j in range(self.m):
            sub = residuals[:, j * self.dsub : (j + 1) * self.dsub]
            codebooks[j], _, _ = kmeans(sub, KSUB, rng)
        self.codebooks = codebooks
        self._codebook_norms = np.einsum("mkd,mkd->mk", codebooks, codebooks)
        self._coarse_norms = np.einsum("ij,ij->i", centers, centers)
        self._list_ids = [[] for _ in range(self.nlist)]
        self._list_codes = [_GrowMatrix(self.m, dtype=np.uint8) for _ in range(self.nlist)]
        self.trained = True
        self._migrate_buffer()

    def _migrate_buffer(self) -> None:
        buffered = self._buffer.view()
        for vector_id in range(buffered.shape[0]):
            self._insert_trained(buffered[vector_id], vector_id)
        self._buffer = _GrowMatrix(EMBEDDING_DIM)

    # -- encoding ----------------------------------------------------------

    def _coarse_d2(self, q: np.ndarray) -> np.ndarray:
        d2 = self._coarse_norms - 2.0 * (self.coarse_centroids @ q) + float(q @ q)
        np.maximum(d2, 0.0, out=d2)
        return d2

    def coarse_assign(self, embedding) -> int:
        self._require_trained()
        q = np.asarray(embedding, dtype=np.float64)
        return int(self._coarse_d2(q).argmin())

    def pq_encode(self, embedding, coarse_id: int) -> np.ndarray:
        """Code the residual of ``embedding`` w.r.t. an assigned coarse centroid."""
        self._require_trained()
        resid = np.asarray(embedding, dtype=np.float64) - self.coarse_centroids[coarse_id]
        resid_sub = resid.reshape(self.m, 1, self.dsub)
        d2 = self._codebook_norms - 2.0 * np.einsum(
            "mkd,mod->mk", self.codebooks, resid_sub
        ) + np.einsum("mod,mod->m", resid_sub, resid_sub)[:, None]
        return d2.argmin(axis=1).astype(np.uint8)

    def decode(self, code: np.ndarray, coarse_id: int) -> np.ndarray:
        """Reconstruct the stored approximation of a coded vector."""
        self._require_trained()
        parts = [self.codebooks[j, int(code[j])] for j in range(self.m)]
        return self.coarse_centroids[coarse_id] + np.concatenate(parts)

    def adc_distance(self, query, code: np.ndarray, coarse_id: int) -> float:
        """Asymmetric distance: exact query vs. the reconstruction of a code."""
        self._require_trained()
        resid = np.asarray(query, dtype=np.float64) - self.coarse_centroids[coarse_id]
        total = 0.0
        for j in range(self.m):
            sub = resid[j * self.dsub : (j + 1) * self.dsub]
            diff = sub - self.codebooks[j, int(code[j])]
            total += float(np.dot(diff, diff))
        return sqrt(total)

    # -- add / search ------------------------------------------------------

    def add(self, embedding) -> int:
        vec = as_embedding(embedding)
        if not self.trained:
            if not self.config.cold_start_buffer:
                raise UntrainedIndexError(
                    "IVFPQ index is untrained and the cold-start buffer is disabled"
                )
            self._buffer.append(vec)
            self._n += 1
            if self._n >= self.train_floor:
                self.train(self._buffer.view())
            return self._n - 1
        vector_id = self._n
        self._insert_trained(vec, vector_id)
        self._n += 1
        return vector_id

    def _insert_trained(self, vec: np.ndarray, vector_id: int) -> None:
        coarse_id = self.coarse_assign(vec)
        code = self.pq_encode(vec, coarse_id)
        self._list_ids[coarse_id].append(vector_id)
        self._list_codes[coarse_id].append(code)

    def search_nearest(self, query, threshold: float) -> SearchHit | None:
        if threshold <= 0:
            raise ValueError("threshold must be > 0")
        q = np.asarray(query, dtype=np.float64)
        if not self.trained:
            if not self.config.cold_start_buffer:
                raise UntrainedIndexError(
                    "IVFPQ index is untrained and the cold-start buffer is disabled"
                )
            buffered = self._buffer.view()
            if buffered.shape[0] == 0:
                return None
            diff = buffered - q
            d2 = np.einsum("ij,ij->i", diff, diff)
            best = int(d2.argmin())
            if d2[best] < threshold * threshold:
                return SearchHit(best, sqrt(float(d2[best])))
            return None

        if self._n == 0:
            return None
        coarse_d2 = self._coarse_d2(q)
        if self.nprobe < self.nlist:
            probes = np.argpartition(coarse_d2, self.nprobe)[: self.nprobe]
            probes = probes[np.argsort(coarse_d2[probes], kind="stable")]
        else:
            probes = np.argsort(coarse_d2, kind="stable")

        # per-probe ADC lookup tables (nprobe, m, 256) via the expanded form
        resid = q[None, :] - self.coarse_centroids[probes]
        resid_sub = resid.reshape(len(probes), self.m, self.dsub)
        tables = (
            np.einsum("pmd,pmd->pm", resid_sub, resid_sub)[:, :, None]
            - 2.0 * np.einsum("pmd,mkd->pmk", resid_sub, self.codebooks)
            + self._codebook_norms[None, :, :]
        )
        np.maximum(tables, 0.0, out=tables)

        best_d2 = np.inf
        best_id = -1
        cols = np.arange(self.m)
        for p, coarse_id in enumerate(probes):
            ids = self._list_ids[coarse_id]
            if not ids:
                continue
            codes = self._list_codes[coarse_id].view()
            d2 = tables[p][cols, codes].sum(axis=1)
            local = int(d2.argmin())
            d2_min = float(d2[local])
            if d2_min < best_d2:
                ties = np.flatnonzero(d2 == d2_min)
                cand = min(ids[t] for t in ties)
                best_d2, best_id = d2_min, cand
            elif d2_min == best_d2 and best_id >= 0:
                ties = np.flatnonzero(d2 == d2_min)
                best_id = min(best_id, min(ids[t] for t in ties))
        if best_id >= 0 and best_d2 < threshold * threshold:
            return SearchHit(best_id, sqrt(best_d2))
        return None

    def list_assignments(self) -> dict[int, int]:
        """vector_id -> inverted-list index, for verifying list membership."""
        self._require_trained()
        out: dict[int, int] = {}
        for list_idx, ids in enumerate(self._list_ids):
            for vector_id in ids:
                out[vector_id] = list_idx
        return out

    def _require_trained(self) -> None:
        if not self.trained:
            raise UntrainedIndexError("IVFPQ index is not trained")

    # -- persistence -------------------------------------------------------

    def save(self, path) -> None:
        flat_ids = np.array(
            [i for ids in self._list_ids for i in ids] if self.trained else [],
            dtype=np.int64,
        )
        offsets = np.zeros(self.nlist + 1, dtype=np.int64)
        if self.trained:
            lengths = [len(ids) for ids in self._list_ids]
            offsets[1:] = np.cumsum(lengths)
            codes = (
                np.vstack([g.view() for g in self._list_codes if g.n > 0])
                if flat_ids.size
                else np.empty((0, self.m), dtype=np.uint8)
            )
        else:
            codes = np.empty((0, self.m), dtype=np.uint8)
        np.savez(
            path,
            kind="ivfpq",
            version=1,
            config=json.dumps(asdict(self.config), sort_keys=True),
            nlist=self.nlist,
            n=self._n,
            trained=self.trained,
            coarse=self.coarse_centroids if self.trained else np.empty((0, EMBEDDING_DIM)),
            codebooks=self.codebooks if self.trained else np.empty((0, KSUB, self.dsub)),
            list_ids=flat_ids,
            list_offsets=offsets,
            codes=codes,
            buffer=self._buffer.view().copy(),
        )

    @staticmethod
    def load(path) -> "IvfPqIndex":
        with np.load(path, allow_pickle=False) as data:
            if str(data["kind"]) != "ivfpq":
                raise ValueError("snapshot is not an IVFPQ index")
            config = IndexConfig(**json.loads(str(data["config"])))
            index = IvfPqIndex(replace(config, nlist=int(data["nlist"])))
            index._n = int(data["n"])
            if bool(data["trained"]):
                index.trained = True
                index.coarse_centroids = data["coarse"].copy()
                index.codebooks = data["codebooks"].copy()
                index._codebook_norms = np.einsum(
                    "mkd,mkd->mk", index.codebooks, index.codebooks
                )
                index._coarse_norms = np.einsum(
                    "ij,ij->i", index.coarse_centroids, index.coarse_centroids
                )
                offsets = data["list_offsets"]
                flat_ids = data["list_ids"]
                codes = data["codes"]
                index._list_ids = []
                index._list_codes = []
                for li in range(index.nlist):
                    lo, hi = int(offsets[li]), int(offsets[li + 1])
                    index._list_ids.append([int(i) for i in flat_ids[lo:hi]])
                    grow = _GrowMatrix(index.m, dtype=np.uint8)
                    for row in codes[lo:hi]:
                        grow.append(row)
                    index._list_codes.append(grow)
            for row in data["buffer"]:
                index._buffer.append(row)
        return index


def create_index(config: IndexConfig | None = None, expected_n: int | None = None):
    """Instantiate the backend named by the config (default: flat)."""
    cfg = config or IndexConfig()
    if cfg.backend == "flat":
        return FlatIndex(cfg, expected_n)
    return IvfPqIndex(cfg, expected_n)


def load_index(path):
    """Load a snapshot produced by either backend's ``save``."""
    with np.load(path, allow_pickle=False) as data:
        kind = str(data["kind"])
    if kind == "flat":
        return FlatIndex.load(path)
    if kind == "ivfpq":
        return IvfPqIndex.load(path)
    raise ValueError(f"unknown index snapshot kind {kind!r}")
