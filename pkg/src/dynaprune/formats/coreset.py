"""Coresets ("TDCS"): the kept sample indices and their importance weights.

Layout: magic "TDCS" | version u32=1 | N_total u64 | M u64 | p f32 |
reserved u32 | M * (index u64, weight f64) | CRC32.

The pruning rate is narrowed to f32 at construction so the size invariant
M = max(1, round((1-p)*N)) is checked against the same value a reader of
the file will see.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, FormatError, ParameterError
from ._io import CrcReader, CrcWriter, write_file_atomic

MAGIC = b"TDCS"
VERSION = 1


def expected_coreset_size(n_total: int, pruning_rate: float) -> int:
    """M = max(1, round((1-p)*N)), rounding halves away from zero."""
    p = float(np.float32(pruning_rate))
    kept = (1.0 - p) * n_total
    return max(1, int(math.floor(kept + 0.5)))


@dataclass(frozen=True, eq=False)
class Coreset:
    n_total: int
    indices: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    pruning_rate: float

    def __post_init__(self):
        if self.n_total < 1:
            raise ParameterError(f"n_total must be >= 1, got {self.n_total}")
        p = float(np.float32(self.pruning_rate))
        if not 0.0 < p < 1.0:
            raise ParameterError(f"pruning_rate must be in (0, 1), got {self.pruning_rate}")
        object.__setattr__(self, "pruning_rate", p)
        idx = np.ascontiguousarray(self.indices, dtype=np.uint64)
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if idx.ndim != 1 or w.shape != idx.shape:
            raise ParameterError(
                f"indices shape {idx.shape} and weights shape {w.shape} must be equal vectors"
            )
        m = expected_coreset_size(self.n_total, p)
        if len(idx) != m:
            raise ParameterError(
                f"coreset holds {len(idx)} indices but p={p} over N={self.n_total} "
                f"requires M={m}"
            )
        if len(idx) > self.n_total:
            raise ParameterError(f"M={len(idx)} exceeds N={self.n_total}")
        if idx.size and int(idx.max()) >= self.n_total:
            raise ParameterError(f"index {int(idx.max())} out of range for N={self.n_total}")
        if idx.size > 1 and not np.all(idx[1:] > idx[:-1]):
            raise ParameterError("indices must be strictly increasing")
        if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            raise DataError("weights must be finite and > 0")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return len(self.indices)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Coreset):
            return NotImplemented
        return (
            self.n_total == other.n_total
            and np.float32(self.pruning_rate) == np.float32(other.pruning_rate)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.weights, other.weights)
        )


def write_coreset(path: str, coreset: Coreset) -> int:
    def build(w: CrcWriter) -> None:
        w.write_magic(MAGIC)
        w.pack("<IQQfI", VERSION, coreset.n_total, coreset.size, coreset.pruning_rate, 0)
        entries = np.empty(coreset.size, dtype=[("index", "<u8"), ("weight", "<f8")])
        entries["index"] = coreset.indices
        entries["weight"] = coreset.weights
        w.write(entries.tobytes())

    write_file_atomic(path, build)
    return 32 + 16 * coreset.size + 4


def read_coreset(path: str) -> Coreset:
    with open(path, "rb") as fh:
        r = CrcReader(fh, MAGIC)
        version, n_total, m, p, reserved = r.unpack("<IQQfI")
        if version != VERSION:
            raise FormatError(f"unsupported TDCS version {version}")
        if reserved != 0:
            raise FormatError(f"reserved field must be 0, got {reserved}")
        entries = np.frombuffer(
            r.read_exact(16 * m), dtype=[("index", "<u8"), ("weight", "<f8")]
        )
        if r.tell() != r.payload_end:
            raise FormatError("trailing bytes after coreset entries")
        try:
            return Coreset(n_total, entries["index"].copy(), entries["weight"].copy(), p)
        except (ParameterError, DataError) as e:
            raise FormatError(f"invalid coreset: {e}") from None
