"""Synthetic data generator tests: geometry, provenance bookkeeping,
and determinism of the corruption injectors."""

import numpy as np
import pytest

import dynaprune as dp
from dynaprune.formats.dataset import ProvenanceTag


def test_gen_blobs_shapes_and_balance():
    ds = dp.gen_blobs(25, 4, 6, center_scale=5.0, sigma=1.0, seed=1)
    assert ds.n_samples == 100
    assert ds.features.shape == (100, 6)
    assert ds.n_classes == 4
    counts = np.bincount(ds.labels, minlength=4)
    assert list(counts) == [25] * 4
    # Class-major order.
    assert np.array_equal(ds.labels, np.repeat(np.arange(4, dtype=ds.labels.dtype), 25))
    assert all(int(t) == int(ProvenanceTag.CLEAN) for t in ds.prov_tags)
    assert np.array_equal(ds.original_labels, ds.labels)


def test_gen_blobs_center_distances_simplex():
    # D >= C: every pair of class centers is center_scale apart by design.
    scale = 8.0
    ds = dp.gen_blobs(2000, 3, 5, center_scale=scale, sigma=0.01, seed=2)
    centers = np.stack(
        [ds.features[ds.labels == c].mean(axis=0) for c in range(3)]
    )
    for a in range(3):
        for b in range(a + 1, 3):
            d = np.linalg.norm(centers[a] - centers[b])
            assert d == pytest.approx(scale, rel=0.02)


def test_gen_blobs_deterministic():
    a = dp.gen_blobs(10, 2, 3, 4.0, 1.0, seed=7)
    b = dp.gen_blobs(10, 2, 3, 4.0, 1.0, seed=7)
    assert a == b
    c = dp.gen_blobs(10, 2, 3, 4.0, 1.0, seed=8)
    assert not np.array_equal(a.features, c.features)


def test_gen_blobs_low_dim_fallback():
    ds = dp.gen_blobs(5, 5, 2, 4.0, 0.5, seed=3)  # D < C: gaussian directions
    assert ds.features.shape == (25, 2)
    assert ds.n_classes == 5


def test_gen_blobs_validation():
    with pytest.raises(dp.ParameterError):
        dp.gen_blobs(5, 1, 3, 4.0, 1.0, seed=0)
    with pytest.raises(dp.ParameterError):
        dp.gen_blobs(5, 2, 1, 4.0, 1.0, seed=0)
    with pytest.raises(dp.ParameterError):
        dp.gen_blobs(5, 2, 3, 4.0, 0.0, seed=0)


# -------------------------------------------------------------- duplicates

def test_inject_duplicates_bookkeeping():
    base = dp.gen_blobs(20, 2, 3, 5.0, 1.0, seed=4)  # N = 40
    ds = dp.inject_duplicates(base, 0.25, jitter=0.05, seed=5)
    assert ds.n_samples == 50  # 40 + round(0.25 * 40)
    counts = ds.tag_counts()
    assert counts["Duplicate"] == 10
    assert counts["Clean"] == 40
    dup_rows = [i for i in range(50) if ds.prov_tags[i] == ProvenanceTag.DUPLICATE]
    for i in dup_rows:
        src = int(ds.prov_refs[i])
        assert ds.prov_tags[src] == ProvenanceTag.CLEAN
        assert ds.labels[i] == ds.labels[src]
        # Jittered copy stays near the source.
        assert np.linalg.norm(ds.features[i] - ds.features[src]) < 1.0


def test_inject_duplicates_zero_jitter_bit_equal():
    base = dp.gen_blobs(10, 2, 2, 5.0, 1.0, seed=6)
    ds = dp.inject_duplicates(base, 0.2, jitter=0.0, seed=7)
    for i in range(base.n_samples, ds.n_samples):
        src = int(ds.prov_refs[i])
        assert np.array_equal(ds.features[i], ds.features[src])


def test_inject_duplicates_fraction_zero_is_noop():
    base = dp.gen_blobs(6, 2, 2, 5.0, 1.0, seed=8)
    assert dp.inject_duplicates(base, 0.0, 0.1, seed=9) is base


# -------------------------------------------------------------- label noise

def test_inject_label_noise_bookkeeping():
    base = dp.gen_blobs(25, 4, 4, 5.0, 1.0, seed=10)  # N = 100
    ds = dp.inject_label_noise(base, 0.2, seed=11)
    assert ds.n_samples == 100
    counts = ds.tag_counts()
    assert counts["Mislabeled"] == 20
    flipped = [
        i for i in range(100) if ds.prov_tags[i] == ProvenanceTag.MISLABELED
    ]
    for i in flipped:
        assert ds.labels[i] != ds.original_labels[i]
        assert base.labels[i] == ds.original_labels[i]
    untouched = [i for i in range(100) if ds.prov_tags[i] == ProvenanceTag.CLEAN]
    for i in untouched:
        assert ds.labels[i] == base.labels[i]


def test_inject_label_noise_then_duplicates_compose():
    base = dp.gen_blobs(20, 2, 3, 5.0, 1.0, seed=12)
    noisy = dp.inject_label_noise(base, 0.1, seed=13)
    both = dp.inject_duplicates(noisy, 0.25, 0.01, seed=14)
    counts = both.tag_counts()
    assert counts["Mislabeled"] == 4
    assert counts["Duplicate"] == 10
    # Duplicates must reference Clean rows even after noise injection.
    for i in range(both.n_samples):
        if both.prov_tags[i] == ProvenanceTag.DUPLICATE:
            assert both.prov_tags[int(both.prov_refs[i])] == ProvenanceTag.CLEAN


def test_inject_label_noise_insufficient_clean():
    base = dp.gen_blobs(5, 2, 2, 5.0, 1.0, seed=15)
    noisy = dp.inject_label_noise(base, 0.9, seed=16)  # 9 of 10 flipped
    with pytest.raises(dp.ParameterError):
        dp.inject_label_noise(noisy, 0.5, seed=17)  # needs 5 Clean, has 1


def test_injectors_deterministic():
    base = dp.gen_blobs(15, 3, 3, 5.0, 1.0, seed=18)
    a = dp.inject_duplicates(dp.inject_label_noise(base, 0.2, seed=19), 0.3, 0.02, seed=20)
    b = dp.inject_duplicates(dp.inject_label_noise(base, 0.2, seed=19), 0.3, 0.02, seed=20)
    assert a == b
