"""Synthetic gaussian-blob datasets with known redundancy ground truth.

gen_blobs places one center per class and draws isotropic gaussian samples
around it; inject_duplicates and inject_label_noise perturb a dataset while
recording what happened in per-sample provenance, so pruning quality can be
judged against planted redundancy and corruption.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ParameterError
from .formats.dataset import Dataset, ProvenanceTag


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5))


def gen_blobs(
    n_per_class: int,
    n_classes: int,
    n_features: int,
    center_scale: float,
    sigma: float,
    seed: int,
) -> Dataset:
    """Balanced gaussian blobs, class-major sample order, all tagged Clean.

    Centers: for D >= C, the centered regular simplex over the first C
    coordinates, scaled so every pair of centers is center_scale apart.
    For D < C a simplex does not fit, so centers fall back to seeded
    gaussian directions scaled to radius center_scale / sqrt(2) (pairwise
    distances then only approximate center_scale).
    """
    if n_classes < 2:
        raise ParameterError(f"n_classes must be >= 2, got {n_classes}")
    if n_features < 2:
        raise ParameterError(f"n_features must be >= 2, got {n_features}")
    if not sigma > 0.0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    if n_per_class < 1:
        raise ParameterError(f"n_per_class must be >= 1, got {n_per_class}")
    rng = np.random.Generator(np.random.PCG64(seed))
    c, d = n_classes, n_features
    centers = np.zeros((c, d), dtype=np.float64)
    if d >= c:
        # Standard basis vectors centered at their mean are sqrt(2) apart.
        eye = np.eye(c) - 1.0 / c
        centers[:, :c] = eye * (center_scale / math.sqrt(2.0))
    else:
        dirs = rng.standard_normal((c, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        centers = dirs * (center_scale / math.sqrt(2.0))
    n = n_per_class * c
    features = np.repeat(centers, n_per_class, axis=0) + sigma * rng.standard_normal((n, d))
    labels = np.repeat(np.arange(c, dtype=np.int64), n_per_class)
    return Dataset(
        features=features,
        labels=labels,
        n_classes=c,
        prov_tags=np.zeros(n, dtype=np.uint8),
        prov_refs=np.arange(n, dtype=np.uint64),
        original_labels=labels,
    )


def inject_duplicates(dataset: Dataset, fraction: float, jitter: float, seed: int) -> Dataset:
    """Append round(fraction * N) near-copies of uniformly chosen Clean
    samples (chosen with replacement), each offset by gaussian(jitter)
    feature noise, tagged Duplicate(of source). fraction = 0 is a no-op."""
    if not 0.0 <= fraction < 1.0:
        raise ParameterError(f"fraction must be in [0, 1), got {fraction}")
    if jitter < 0.0:
        raise ParameterError(f"jitter must be >= 0, got {jitter}")
    n = dataset.n_samples
    k = _round_half_away(fraction * n)
    if k == 0:
        return dataset
    clean = np.flatnonzero(dataset.prov_tags == ProvenanceTag.CLEAN)
    if clean.size == 0:
        raise ParameterError("dataset has no Clean samples to duplicate")
    rng = np.random.Generator(np.random.PCG64(seed))
    src = rng.choice(clean, size=k, replace=True)
    new_feats = dataset.features[src]
    if jitter > 0.0:
        new_feats = new_feats + jitter * rng.standard_normal(new_feats.shape)
    return Dataset(
        features=np.vstack([dataset.features, new_feats]),
        labels=np.concatenate([dataset.labels, dataset.labels[src]]),
        n_classes=dataset.n_classes,
        prov_tags=np.concatenate(
            [dataset.prov_tags, np.full(k, ProvenanceTag.DUPLICATE, dtype=np.uint8)]
        ),
        prov_refs=np.concatenate([dataset.prov_refs, src.astype(np.uint64)]),
        original_labels=np.concatenate([dataset.original_labels, dataset.labels[src]]),
    )


def inject_label_noise(dataset: Dataset, fraction: float, seed: int) -> Dataset:
    """Give round(fraction * N) samples a uniformly chosen wrong label.

    Victims are drawn without replacement from the Clean samples only, so
    Duplicate provenance (which must reference Clean sources) stays valid
    under any composition order; the pre-noise label is preserved in
    original_labels. fraction = 0 is a no-op.
    """
    if not 0.0 <= fraction < 1.0:
        raise ParameterError(f"fraction must be in [0, 1), got {fraction}")
    if dataset.n_classes < 2:
        raise ParameterError("label noise needs C >= 2")
    n = dataset.n_samples
    k = _round_half_away(fraction * n)
    if k == 0:
        return dataset
    clean = np.flatnonzero(dataset.prov_tags == ProvenanceTag.CLEAN)
    if k > clean.size:
        raise ParameterError(
            f"asked to mislabel {k} samples but only {clean.size} are Clean"
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    victims = rng.choice(clean, size=k, replace=False)
    labels = dataset.labels.astype(np.int64)
    # Uniform over the C-1 wrong classes: draw in [0, C-1) and skip the truth.
    draws = rng.integers(0, dataset.n_classes - 1, size=k)
    wrong = draws + (draws >= labels[victims]).astype(np.int64)
    new_labels = labels.copy()
    new_labels[victims] = wrong
    tags = dataset.prov_tags.copy()
    tags[victims] = ProvenanceTag.MISLABELED
    # Victims were Clean, so their original_labels already equal their
    # pre-noise labels; the column carries over unchanged.
    return Dataset(
        features=dataset.features,
        labels=new_labels,
        n_classes=dataset.n_classes,
        prov_tags=tags,
        prov_refs=dataset.prov_refs,
        original_labels=dataset.original_labels,
    )
