"""Command line for the manifest extractor."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .extractor import DETECTORS, ExtractionConfig, extract_archive


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="facescan",
        description="Scan an image directory for faces and write an archive manifest.",
    )
    parser.add_argument("image_dir", type=Path, help="directory of raster images")
    parser.add_argument("output", type=Path, help="manifest output path (.jsonl)")
    parser.add_argument(
        "--detector", choices=sorted(DETECTORS), default="lbp-cascade"
    )
    parser.add_argument("--upsample", type=int, default=0, help="2**n pre-detection upscale")
    parser.add_argument("--jitter", type=int, default=0, help="average over 4n shifted crops")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = ExtractionConfig(
            image_dir=args.image_dir,
            output_path=args.output,
            detector=args.detector,
            upsample=args.upsample,
            jitter=args.jitter,
        )
        result = extract_archive(config)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"wrote {result.manifest_path}: {result.images} images, {result.faces} faces"
        + (f", skipped {len(result.skipped)} unreadable" if result.skipped else "")
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
