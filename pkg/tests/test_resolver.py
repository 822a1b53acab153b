import numpy as np
import pytest

from facegraph import (
    EMBEDDING_DIM,
    ArchiveManifest,
    IdentityRegistry,
    IndexConfig,
    SyntheticSpec,
    generate_synthetic_archive,
    load_registry,
    load_resolution,
    naive_resolve_archive,
    reassign_archive,
    resolve_archive,
    resolve_face,
    save_registry,
    save_resolution,
)
from conftest import basis_embedding, random_embedding


def planted_spec(**overrides):
    params = dict(
        identity_count=12,
        image_count=60,
        faces_min=1,
        faces_max=4,
        noise_radius=0.2,
        min_separation=1.2,
        seed=99,
    )
    params.update(overrides)
    return SyntheticSpec(**params)


class TestResolveFace:
    def test_first_face_founds_identity_zero(self, rng):
        registry = IdentityRegistry()
        identity, is_new = resolve_face(registry, random_embedding(rng))
        assert (identity, is_new) == (0, True)
        assert len(registry) == 1

    def test_exact_requery_matches(self, rng):
        registry = IdentityRegistry()
        v = random_embedding(rng)
        resolve_face(registry, v)
        identity, is_new = resolve_face(registry, v)
        assert (identity, is_new) == (0, False)
        assert len(registry) == 1

    def test_distance_exactly_half_founds_new_identity(self):
        registry = IdentityRegistry()
        resolve_face(registry, np.zeros(EMBEDDING_DIM))
        at_limit = basis_embedding(0, 0.5)
        identity, is_new = resolve_face(registry, at_limit)
        assert (identity, is_new) == (1, True)

    def test_distance_just_under_half_matches(self):
        registry = IdentityRegistry()
        resolve_face(registry, np.zeros(EMBEDDING_DIM))
        inside = basis_embedding(0, 0.5 - 1e-6)
        identity, is_new = resolve_face(registry, inside)
        assert (identity, is_new) == (0, False)

    def test_registry_grows_by_one_per_new(self, rng):
        registry = IdentityRegistry()
        sizes = []
        for _ in range(50):
            _, is_new = resolve_face(registry, random_embedding(rng, scale=2.0))
            sizes.append(len(registry))
        assert sizes == sorted(sizes)
        news = sum(1 for a, b in zip([0] + sizes, sizes) if b - a == 1)
        assert news == len(registry)


class TestResolveArchive:
    def test_three_copies_one_identity(self, rng):
        v = random_embedding(rng)
        manifest = ArchiveManifest.from_pairs(
            [("a", [v]), ("b", [v]), ("c", [v])]
        )
        registry, resolved = resolve_archive(manifest)
        assert len(registry) == 1
        assert [r.identity_ids for r in resolved] == [(0,), (0,), (0,)]

    def test_zero_face_images_kept(self, rng):
        manifest = ArchiveManifest.from_pairs(
            [("a", []), ("b", [random_embedding(rng)]), ("c", [])]
        )
        registry, resolved = resolve_archive(manifest)
        assert [r.identity_ids for r in resolved] == [(), (0,), ()]
        assert len(resolved) == len(manifest)

    def test_planted_archive_recovered_exactly(self):
        manifest, labels = generate_synthetic_archive(planted_spec())
        registry, resolved = resolve_archive(manifest)
        assert len(registry) == 12
        # planted labels must map 1:1 onto resolved ids
        mapping = {}
        for img_labels, img in zip(labels, resolved):
            for truth, got in zip(img_labels, img.identity_ids):
                assert mapping.setdefault(truth, got) == got
        assert len(set(mapping.values())) == 12

    def test_matches_naive_reference_on_random_archives(self):
        for seed in range(5):
            gen = np.random.default_rng(seed)
            pairs = []
            for i in range(40):
                count = int(gen.integers(0, 4))
                pairs.append(
                    (f"i{i}", [gen.standard_normal(EMBEDDING_DIM) * 0.35 for _ in range(count)])
                )
            manifest = ArchiveManifest.from_pairs(pairs)
            registry, resolved = resolve_archive(manifest)
            canonicals, reference = naive_resolve_archive(manifest)
            assert len(registry) == len(canonicals)
            assert [r.identity_ids for r in resolved] == [
                r.identity_ids for r in reference
            ]

    def test_deterministic_for_fixed_order(self):
        manifest, _ = generate_synthetic_archive(planted_spec(seed=5))
        first = resolve_archive(manifest)[1]
        second = resolve_archive(manifest)[1]
        assert [r.identity_ids for r in first] == [r.identity_ids for r in second]

    def test_reassign_readonly_gives_identical_ids(self):
        manifest, _ = generate_synthetic_archive(planted_spec(seed=6))
        registry, resolved = resolve_archive(manifest)
        size_before = len(registry)
        again = reassign_archive(registry, manifest)
        assert len(registry) == size_before
        assert [r.identity_ids for r in again] == [r.identity_ids for r in resolved]

    def test_strict_dup_faces_flag(self, rng):
        v = random_embedding(rng)
        manifest = ArchiveManifest.from_pairs([("a", [v, v])])
        _, default_res = resolve_archive(manifest)
        assert default_res[0].identity_ids == (0, 0)
        registry, strict_res = resolve_archive(manifest, strict_dup_faces=True)
        assert strict_res[0].identity_ids == (0, 1)
        assert len(registry) == 2

    def test_rejects_nonpositive_threshold(self, rng):
        manifest = ArchiveManifest.from_pairs([("a", [random_embedding(rng)])])
        with pytest.raises(ValueError):
            resolve_archive(manifest, threshold=0.0)

    def test_ivfpq_backend_runs(self):
        manifest, _ = generate_synthetic_archive(planted_spec(seed=7))
        cfg = IndexConfig(backend="ivfpq", seed=1)
        registry, resolved = resolve_archive(manifest, cfg)
        assert len(registry) == 12  # stays in the exact cold-start buffer here
        assert len(resolved) == len(manifest)


class TestResolutionFiles:
    def test_resolution_round_trip(self, tmp_path):
        manifest, _ = generate_synthetic_archive(planted_spec(seed=8))
        _, resolved = resolve_archive(manifest)
        path = tmp_path / "resolution.jsonl"
        save_resolution(resolved, path)
        back = load_resolution(path)
        assert back == resolved

    def test_registry_round_trip(self, tmp_path):
        manifest, _ = generate_synthetic_archive(planted_spec(seed=9))
        registry, _ = resolve_archive(manifest)
        path = tmp_path / "registry.jsonl"
        save_registry(registry, path)
        back = load_registry(path)
        assert len(back) == len(registry)
        for i in range(len(registry)):
            assert np.array_equal(back.canonical(i), registry.canonical(i))
            assert back.identities[i].first_image == registry.identities[i].first_image
            assert back.identities[i].first_slot == registry.identities[i].first_slot
        # the rebuilt index answers like the original registry
        q = registry.canonical(3)
        assert back.lookup(q, 0.5).vector_id == 3
