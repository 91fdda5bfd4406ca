"""Labeled datasets with provenance ("TDDT").

Layout: magic "TDDT" | version u32=1 | N u64 | D u32 | C u32 |
features N*D f64 row-major | labels N*u32 |
provenance N * (tag u8, ref u64, original_label u32) | CRC32.

Provenance semantics: ref is the sample's own index except for Duplicate
rows, where it names the copied (Clean) source; original_label equals the
current label except for Mislabeled rows, where it preserves the pre-noise
label.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, FormatError, ParameterError
from ._io import CrcReader, CrcWriter, write_file_atomic

MAGIC = b"TDDT"
VERSION = 1


class ProvenanceTag(enum.IntEnum):
    CLEAN = 0
    DUPLICATE = 1
    MISLABELED = 2


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    n_classes: int
    prov_tags: np.ndarray = field(repr=False)
    prov_refs: np.ndarray = field(repr=False)
    original_labels: np.ndarray = field(repr=False)

    def __post_init__(self):
        x = np.ascontiguousarray(self.features, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise ParameterError(f"features must be a nonempty N x D matrix, got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise DataError("features contain non-finite values")
        n = x.shape[0]
        if self.n_classes < 2:
            raise ParameterError(f"n_classes must be >= 2, got {self.n_classes}")
        y = np.ascontiguousarray(self.labels)
        tags = np.ascontiguousarray(self.prov_tags)
        refs = np.ascontiguousarray(self.prov_refs)
        orig = np.ascontiguousarray(self.original_labels)
        for name, arr in (("labels", y), ("prov_tags", tags),
                          ("prov_refs", refs), ("original_labels", orig)):
            if arr.shape != (n,):
                raise ParameterError(f"{name} shape {arr.shape} does not match N={n}")
            if arr.dtype.kind not in "iu":
                raise DataError(f"{name} must be integers, got dtype {arr.dtype}")
        for name, arr in (("labels", y), ("original_labels", orig)):
            if arr.min() < 0 or arr.max() >= self.n_classes:
                raise DataError(f"{name} must lie in [0, {self.n_classes})")
        if tags.min() < 0 or tags.max() > int(max(ProvenanceTag)):
            raise DataError(f"unknown provenance tag {int(tags.max())}")
        if refs.min() < 0 or refs.max() >= n:
            raise DataError("prov_refs must index into the dataset")
        tags8 = tags.astype(np.uint8)
        refs64 = refs.astype(np.uint64)
        dup = tags8 == ProvenanceTag.DUPLICATE
        if dup.any():
            targets = refs64[dup].astype(np.int64)
            if np.any(targets == np.flatnonzero(dup)):
                raise DataError("a Duplicate row references itself")
            if np.any(tags8[targets] != ProvenanceTag.CLEAN):
                raise DataError("Duplicate rows must reference Clean samples")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y.astype(np.uint32))
        object.__setattr__(self, "prov_tags", tags8)
        object.__setattr__(self, "prov_refs", refs64)
        object.__setattr__(self, "original_labels", orig.astype(np.uint32))

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def tag_counts(self) -> dict:
        return {
            tag.name.capitalize(): int(np.sum(self.prov_tags == tag))
            for tag in ProvenanceTag
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.n_classes == other.n_classes
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.prov_tags, other.prov_tags)
            and np.array_equal(self.prov_refs, other.prov_refs)
            and np.array_equal(self.original_labels, other.original_labels)
        )


def clean_dataset(features: np.ndarray, labels: np.ndarray, n_classes: int) -> Dataset:
    """Wrap plain (X, y) arrays as an all-Clean Dataset."""
    labels = np.asarray(labels)
    n = len(labels)
    return Dataset(
        features=features,
        labels=labels,
        n_classes=n_classes,
        prov_tags=np.zeros(n, dtype=np.uint8),
        prov_refs=np.arange(n, dtype=np.uint64),
        original_labels=labels,
    )


def write_dataset(path: str, ds: Dataset) -> int:
    def build(w: CrcWriter) -> None:
        w.write_magic(MAGIC)
        w.pack("<IQII", VERSION, ds.n_samples, ds.n_features, ds.n_classes)
        w.write(ds.features.astype("<f8", copy=False).tobytes())
        w.write(ds.labels.astype("<u4", copy=False).tobytes())
        prov = np.empty(
            ds.n_samples, dtype=[("tag", "u1"), ("ref", "<u8"), ("orig", "<u4")]
        )
        prov["tag"] = ds.prov_tags
        prov["ref"] = ds.prov_refs
        prov["orig"] = ds.original_labels
        w.write(prov.tobytes())

    write_file_atomic(path, build)
    n, d = ds.n_samples, ds.n_features
    return 24 + 8 * n * d + 4 * n + 13 * n + 4


def read_dataset(path: str) -> Dataset:
    with open(path, "rb") as fh:
        r = CrcReader(fh, MAGIC)
        version, n, d, c = r.unpack("<IQII")
        if version != VERSION:
            raise FormatError(f"unsupported TDDT version {version}")
        if n < 1 or d < 1:
            raise FormatError(f"bad dimensions N={n}, D={d}")
        features = np.frombuffer(r.read_exact(8 * n * d), dtype="<f8").reshape(n, d)
        labels = np.frombuffer(r.read_exact(4 * n), dtype="<u4")
        prov = np.frombuffer(
            r.read_exact(13 * n), dtype=[("tag", "u1"), ("ref", "<u8"), ("orig", "<u4")]
        )
        if r.tell() != r.payload_end:
            raise FormatError("trailing bytes after provenance records")
        try:
            return Dataset(
                features=features.copy(),
                labels=labels.copy(),
                n_classes=c,
                prov_tags=prov["tag"].copy(),
                prov_refs=prov["ref"].copy(),
                original_labels=prov["orig"].copy(),
            )
        except (ParameterError, DataError) as e:
            raise FormatError(f"invalid dataset: {e}") from None
