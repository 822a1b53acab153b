"""Turn a directory of images into a face-embedding archive manifest.

The output is the line-delimited manifest format the co-occurrence pipeline
ingests: one JSON object per image, ``{"image": <filename>, "embeddings":
[[128 floats], ...]}``, images in sorted-filename order so extraction is
deterministic across runs. Images in which no face is found contribute an
empty embeddings array; unreadable files are skipped with a warning.

Detection uses scikit-image's bundled LBP frontal-face cascade by default
(an off-the-shelf detector that works offline). Each detected box is
cropped, resized to a 64x64 grayscale patch, and encoded as a 128-d HOG
descriptor (8 orientations over a 4x4 cell grid). Identical pixels always
produce identical embeddings.

A future manifest revision reserves an optional ``boxes`` field (parallel to
``embeddings``) for per-face source rectangles; nothing downstream consumes
it yet, so this extractor does not emit it.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from skimage import data as skimage_data
from skimage.feature import Cascade, hog
from skimage.transform import resize

EMBEDDING_DIM = 128
PATCH_SIZE = 64
IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp", ".gif", ".tif", ".tiff", ".webp"}


class NoImagesFoundError(FileNotFoundError):
    """The input directory contains no files with a raster-image suffix."""


@dataclass(frozen=True)
class FaceBox:
    """Detected face rectangle in image coordinates."""

    row: int
    col: int
    height: int
    width: int


class LbpCascadeDetector:
    """scikit-image's trained LBP frontal-face cascade."""

    name = "lbp-cascade"

    def __init__(self, min_size: int = 24):
        self._cascade = Cascade(skimage_data.lbp_frontal_face_cascade_filename())
        self._min_size = min_size

    def detect(self, gray: np.ndarray) -> list[FaceBox]:
        h, w = gray.shape
        if min(h, w) < self._min_size:
            return []
        raw = self._cascade.detect_multi_scale(
            img=gray,
            scale_factor=1.2,
            step_ratio=1,
            min_size=(self._min_size, self._min_size),
            max_size=(h, w),
        )
        boxes = [
            FaceBox(int(b["r"]), int(b["c"]), int(b["height"]), int(b["width"]))
            for b in raw
        ]
        boxes.sort(key=lambda b: (b.row, b.col, b.height, b.width))
        return boxes


DETECTORS = {LbpCascadeDetector.name: LbpCascadeDetector}


@dataclass(frozen=True)
class ExtractionConfig:
    image_dir: Path
    output_path: Path
    detector: str = "lbp-cascade"
    upsample: int = 0  # upscale the image 2**upsample before detection
    jitter: int = 0  # average the descriptor over 1 + 4*jitter shifted crops

    def __post_init__(self):
        if self.detector not in DETECTORS:
            raise ValueError(
                f"unknown detector {self.detector!r}; available: {sorted(DETECTORS)}"
            )
        if self.upsample < 0 or self.jitter < 0:
            raise ValueError("upsample and jitter must be >= 0")


@dataclass(frozen=True)
class ExtractionResult:
    manifest_path: Path
    images: int
    faces: int
    skipped: list[str]


def load_grayscale(path: Path) -> np.ndarray:
    """Decode an image to a grayscale uint8 array (raises on broken files)."""
    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=np.uint8)


def _crop(gray: np.ndarray, box: FaceBox, dr: int = 0, dc: int = 0) -> np.ndarray:
    h, w = gray.shape
    r0 = min(max(box.row + dr, 0), max(h - 1, 0))
    c0 = min(max(box.col + dc, 0), max(w - 1, 0))
    r1 = min(r0 + box.height, h)
    c1 = min(c0 + box.width, w)
    return gray[r0:r1, c0:c1]


def encode_face(gray: np.ndarray, box: FaceBox, jitter: int = 0) -> np.ndarray:
    """128-d HOG descriptor of the normalized face patch.

    ``jitter`` averages the descriptor over fixed two-pixel shifts of the
    crop window (deterministic, unlike random jitter augmentation).
    """
    offsets = [(0, 0)]
    for step in range(1, jitter + 1):
        d = 2 * step
        offsets.extend([(d, 0), (-d, 0), (0, d), (0, -d)])
    acc = np.zeros(EMBEDDING_DIM, dtype=np.float64)
    used = 0
    for dr, dc in offsets:
        crop = _crop(gray, box, dr, dc)
        if crop.size == 0:
            continue
        patch = resize(
            crop.astype(np.float64) / 255.0,
            (PATCH_SIZE, PATCH_SIZE),
            anti_aliasing=True,
            mode="reflect",
        )
        acc += hog(
            patch,
            orientations=8,
            pixels_per_cell=(16, 16),
            cells_per_block=(1, 1),
        )
        used += 1
    if used == 0:
        raise ValueError("face box lies entirely outside the image")
    return acc / used


def list_images(image_dir: Path) -> list[Path]:
    files = [
        p
        for p in sorted(image_dir.iterdir())
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    ]
    if not files:
        raise NoImagesFoundError(f"no image files found in {image_dir}")
    return files


def extract_archive(config: ExtractionConfig, detector=None) -> ExtractionResult:
    """Run detection + encoding over the directory and write the manifest.

    ``detector`` overrides the configured detector instance (any object with
    a ``detect(gray) -> list[FaceBox]`` method), which keeps the encoding and
    manifest plumbing testable without a real detector.
    """
    image_dir = Path(config.image_dir)
    if not image_dir.is_dir():
        raise NotADirectoryError(f"input directory not found: {image_dir}")
    files = list_images(image_dir)
    if detector is None:
        detector = DETECTORS[config.detector]()

    output_path = Path(config.output_path)
    faces = 0
    written = 0
    skipped: list[str] = []
    with open(output_path, "w", encoding="utf-8") as fh:
        for path in files:
            try:
                gray = load_grayscale(path)
            except (UnidentifiedImageError, OSError) as exc:
                warnings.warn(f"skipping unreadable image {path.name}: {exc}")
                skipped.append(path.name)
                continue
            if config.upsample:
                factor = 2**config.upsample
                gray8 = resize(
                    gray.astype(np.float64) / 255.0,
                    (gray.shape[0] * factor, gray.shape[1] * factor),
                    anti_aliasing=False,
                    mode="reflect",
                )
                gray = (gray8 * 255.0).astype(np.uint8)
            boxes = detector.detect(gray)
            embeddings = [encode_face(gray, box, config.jitter) for box in boxes]
            faces += len(embeddings)
            record = {
                "image": path.name,
                "embeddings": [e.tolist() for e in embeddings],
            }
            fh.write(json.dumps(record, sort_keys=True))
            fh.write("\n")
            written += 1
    return ExtractionResult(output_path, written, faces, skipped)
