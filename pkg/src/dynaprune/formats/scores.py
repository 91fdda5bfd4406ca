"""Score tables ("TDSC"): one finite f64 score per sample, plus the
parameters that produced them.

Layout: magic "TDSC" | version u32=1 | method u16 | reserved u16 |
T u32 | K u32 | beta f32 | N u64 | scores N*f64 | CRC32.

The K field carries whichever window-like parameter the method uses
(K for the dual-depth score, E for EL2N, J for Dyn-Unc, 0 otherwise);
beta is meaningful only for the dual-depth score and is narrowed to f32
at construction so in-memory tables equal their disk roundtrip exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, FormatError, ParameterError
from ._io import CrcReader, CrcWriter, write_file_atomic

MAGIC = b"TDSC"
VERSION = 1


class Method(enum.IntEnum):
    TDDS = 0
    RANDOM = 1
    ENTROPY = 2
    FORGETTING = 3
    EL2N = 4
    AUM = 5
    DYN_UNC = 6


METHOD_NAMES = {
    Method.TDDS: "tdds",
    Method.RANDOM: "random",
    Method.ENTROPY: "entropy",
    Method.FORGETTING: "forgetting",
    Method.EL2N: "el2n",
    Method.AUM: "aum",
    Method.DYN_UNC: "dyn-unc",
}
METHODS_BY_NAME = {v: k for k, v in METHOD_NAMES.items()}


@dataclass(frozen=True, eq=False)
class ScoreTable:
    method: Method
    n_epochs: int
    window: int
    beta: float
    scores: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n_epochs < 0 or self.window < 0:
            raise ParameterError("n_epochs and window must be nonnegative")
        if not 0.0 <= self.beta <= 1.0:
            raise ParameterError(f"beta must be in [0, 1], got {self.beta}")
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "beta", float(np.float32(self.beta)))
        arr = np.ascontiguousarray(self.scores, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ParameterError(f"scores must be a nonempty vector, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DataError("scores must all be finite")
        object.__setattr__(self, "scores", arr)

    @property
    def n_samples(self) -> int:
        return len(self.scores)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScoreTable):
            return NotImplemented
        return (
            self.method == other.method
            and self.n_epochs == other.n_epochs
            and self.window == other.window
            and np.float32(self.beta) == np.float32(other.beta)
            and np.array_equal(self.scores, other.scores)
        )


def write_scores(path: str, table: ScoreTable) -> int:
    """Serialize a ScoreTable; returns total bytes written."""

    def build(w: CrcWriter) -> None:
        w.write_magic(MAGIC)
        w.pack(
            "<IHHIIfQ",
            VERSION,
            int(table.method),
            0,
            table.n_epochs,
            table.window,
            table.beta,
            table.n_samples,
        )
        w.write(table.scores.astype("<f8", copy=False).tobytes())

    write_file_atomic(path, build)
    return 32 + 8 * table.n_samples + 4


def read_scores(path: str) -> ScoreTable:
    with open(path, "rb") as fh:
        r = CrcReader(fh, MAGIC)
        version, method, reserved, t, k, beta, n = r.unpack("<IHHIIfQ")
        if version != VERSION:
            raise FormatError(f"unsupported TDSC version {version}")
        if reserved != 0:
            raise FormatError(f"reserved field must be 0, got {reserved}")
        try:
            method = Method(method)
        except ValueError:
            raise FormatError(f"unknown method code {method}") from None
        scores = np.frombuffer(r.read_exact(8 * n), dtype="<f8").copy()
        if r.tell() != r.payload_end:
            raise FormatError("trailing bytes after scores payload")
        try:
            return ScoreTable(method, t, k, beta, scores)
        except (ParameterError, DataError) as e:
            raise FormatError(f"invalid score table: {e}") from None
