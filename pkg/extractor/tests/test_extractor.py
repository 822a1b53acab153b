import json

import numpy as np
import pytest
from PIL import Image
from skimage import data as skimage_data

from facescan import (
    EMBEDDING_DIM,
    ExtractionConfig,
    FaceBox,
    NoImagesFoundError,
    encode_face,
    extract_archive,
    list_images,
)
from facescan.cli import main as cli_main

from facegraph import load_manifest  # the manifest file is the contract


class StubDetector:
    """Fixed-box detector: exercises encoding and manifest plumbing alone."""

    def __init__(self, boxes_by_shape=None, box=None):
        self._box = box or FaceBox(8, 8, 48, 48)

    def detect(self, gray):
        h, w = gray.shape
        if min(h, w) < 64:
            return []
        return [self._box]


def write_png(path, array):
    Image.fromarray(array.astype(np.uint8)).save(path)


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    """Five-image directory: a real face photo, its byte-identical copy under
    another name, and three faceless images."""
    root = tmp_path_factory.mktemp("images")
    astronaut = skimage_data.astronaut()  # bundled photo with a frontal face
    write_png(root / "a_portrait.png", astronaut)
    write_png(root / "b_portrait_copy.png", astronaut)
    write_png(root / "c_solid.png", np.full((120, 120, 3), 64))
    gradient = np.linspace(0, 255, 120, dtype=np.uint8)
    write_png(root / "d_gradient.png", np.tile(gradient, (120, 1)))
    write_png(root / "e_dark.png", np.zeros((90, 90, 3)))
    return root


class TestManifestContract:
    def test_five_image_fixture(self, fixture_dir, tmp_path):
        out = tmp_path / "manifest.jsonl"
        result = extract_archive(ExtractionConfig(fixture_dir, out))
        assert result.images == 5
        assert result.skipped == []

        # the contract: the primary component parses it with zero errors
        manifest = load_manifest(out)
        assert len(manifest) == 5
        for record in manifest:
            for row in record.embeddings:
                assert row.shape == (EMBEDDING_DIM,)
                assert np.all(np.isfinite(row))

        by_name = {rec.image_id: rec for rec in manifest}
        # the real photo yields at least one face; the solid image none
        assert by_name["a_portrait.png"].face_count >= 1
        assert by_name["c_solid.png"].face_count == 0
        # identical pixels under two names give identical embeddings
        assert np.array_equal(
            by_name["a_portrait.png"].embeddings,
            by_name["b_portrait_copy.png"].embeddings,
        )

    def test_sorted_filename_order(self, fixture_dir, tmp_path):
        out = tmp_path / "manifest.jsonl"
        extract_archive(ExtractionConfig(fixture_dir, out))
        names = [json.loads(l)["image"] for l in out.read_text().splitlines()]
        assert names == sorted(names)

    def test_deterministic_across_runs(self, fixture_dir, tmp_path):
        first = tmp_path / "one.jsonl"
        second = tmp_path / "two.jsonl"
        extract_archive(ExtractionConfig(fixture_dir, first))
        extract_archive(ExtractionConfig(fixture_dir, second))
        assert first.read_bytes() == second.read_bytes()


class TestInputHandling:
    def test_no_images_found(self, tmp_path):
        (tmp_path / "notes.txt").write_text("not an image")
        with pytest.raises(NoImagesFoundError):
            list_images(tmp_path)

    def test_missing_directory(self, tmp_path):
        config = ExtractionConfig(tmp_path / "nowhere", tmp_path / "m.jsonl")
        with pytest.raises(NotADirectoryError):
            extract_archive(config)

    def test_unreadable_file_skipped_with_warning(self, tmp_path):
        write_png(tmp_path / "ok.png", np.full((80, 80), 128))
        (tmp_path / "broken.png").write_bytes(b"this is not a png")
        out = tmp_path / "manifest.jsonl"
        with pytest.warns(UserWarning, match="broken.png"):
            result = extract_archive(ExtractionConfig(tmp_path, out))
        assert result.skipped == ["broken.png"]
        assert result.images == 1
        assert len(load_manifest(out)) == 1

    def test_unknown_detector_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="detector"):
            ExtractionConfig(tmp_path, tmp_path / "m.jsonl", detector="cnn")


class TestEncoding:
    def gradient_image(self, size=128):
        ramp = np.linspace(0, 255, size, dtype=np.uint8)
        return np.tile(ramp, (size, 1))

    def test_descriptor_shape_and_finiteness(self):
        gray = self.gradient_image()
        desc = encode_face(gray, FaceBox(10, 10, 80, 80))
        assert desc.shape == (EMBEDDING_DIM,)
        assert np.all(np.isfinite(desc))

    def test_identical_pixels_identical_descriptor(self):
        gray = self.gradient_image()
        a = encode_face(gray, FaceBox(10, 10, 80, 80))
        b = encode_face(gray.copy(), FaceBox(10, 10, 80, 80))
        assert np.array_equal(a, b)

    def test_jitter_is_deterministic(self):
        gray = self.gradient_image()
        box = FaceBox(20, 20, 60, 60)
        a = encode_face(gray, box, jitter=1)
        b = encode_face(gray, box, jitter=1)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, encode_face(gray, box, jitter=0))

    def test_box_outside_image_rejected(self):
        gray = self.gradient_image(64)
        with pytest.raises(ValueError):
            encode_face(gray, FaceBox(200, 200, 0, 0))

    def test_stub_detector_pipeline(self, tmp_path):
        write_png(tmp_path / "x.png", self.gradient_image())
        out = tmp_path / "manifest.jsonl"
        result = extract_archive(
            ExtractionConfig(tmp_path, out), detector=StubDetector()
        )
        assert result.faces == 1
        record = load_manifest(out).images[0]
        assert record.face_count == 1

    def test_upsample_smoke(self, tmp_path):
        write_png(tmp_path / "x.png", self.gradient_image())
        out = tmp_path / "manifest.jsonl"
        result = extract_archive(
            ExtractionConfig(tmp_path, out, upsample=1), detector=StubDetector()
        )
        assert result.images == 1
        load_manifest(out)


class TestCli:
    def test_end_to_end(self, fixture_dir, tmp_path, capsys):
        out = tmp_path / "manifest.jsonl"
        assert cli_main([str(fixture_dir), str(out)]) == 0
        assert "5 images" in capsys.readouterr().out
        assert len(load_manifest(out)) == 5

    def test_error_surface(self, tmp_path, capsys):
        code = cli_main([str(tmp_path / "missing"), str(tmp_path / "m.jsonl")])
        assert code == 1
        assert "missing" in capsys.readouterr().err
