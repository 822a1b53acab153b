"""facescan: image directory -> face-embedding archive manifest."""

__version__ = "0.1.0"

from .extractor import (
    DETECTORS,
    EMBEDDING_DIM,
    ExtractionConfig,
    ExtractionResult,
    FaceBox,
    LbpCascadeDetector,
    NoImagesFoundError,
    encode_face,
    extract_archive,
    list_images,
    load_grayscale,
)

__all__ = [
    "DETECTORS",
    "EMBEDDING_DIM",
    "ExtractionConfig",
    "ExtractionResult",
    "FaceBox",
    "LbpCascadeDetector",
    "NoImagesFoundError",
    "encode_face",
    "extract_archive",
    "list_images",
    "load_grayscale",
]
