"""Model checkpoints ("TDMD"): flat 64-bit parameter vectors plus the
architecture fields needed to rebuild the model.

Layout: magic "TDMD" | version u32=1 | arch u8 | D u32 | C u32 | H u32 |
theta_len u64 | theta f64 LE | CRC32.

H is the hidden width and must be 0 for the Linear architecture.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, FormatError, ParameterError
from ._io import CrcReader, CrcWriter, write_file_atomic

MAGIC = b"TDMD"
VERSION = 1


class Arch(enum.IntEnum):
    LINEAR = 0
    MLP = 1


def theta_length(arch: Arch, d: int, c: int, h: int) -> int:
    """Parameter count: weights plus biases for each layer."""
    if arch == Arch.LINEAR:
        return (d + 1) * c
    return (d + 1) * h + (h + 1) * c


@dataclass(frozen=True, eq=False)
class Checkpoint:
    arch: Arch
    n_features: int
    n_classes: int
    hidden: int
    theta: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "arch", Arch(self.arch))
        if self.n_features < 1 or self.n_classes < 2:
            raise ParameterError(
                f"need D >= 1 and C >= 2, got D={self.n_features}, C={self.n_classes}"
            )
        if self.arch == Arch.LINEAR and self.hidden != 0:
            raise ParameterError("Linear checkpoints must have hidden width 0")
        if self.arch == Arch.MLP and self.hidden < 1:
            raise ParameterError("MLP checkpoints need hidden width >= 1")
        theta = np.ascontiguousarray(self.theta, dtype=np.float64)
        want = theta_length(self.arch, self.n_features, self.n_classes, self.hidden)
        if theta.shape != (want,):
            raise ParameterError(f"theta shape {theta.shape}, expected ({want},)")
        if not np.all(np.isfinite(theta)):
            raise DataError("theta contains non-finite values")
        object.__setattr__(self, "theta", theta)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Checkpoint):
            return NotImplemented
        return (
            self.arch == other.arch
            and self.n_features == other.n_features
            and self.n_classes == other.n_classes
            and self.hidden == other.hidden
            and np.array_equal(self.theta, other.theta)
        )


def write_checkpoint(path: str, ckpt: Checkpoint) -> int:
    def build(w: CrcWriter) -> None:
        w.write_magic(MAGIC)
        w.pack(
            "<IBIIIQ",
            VERSION,
            int(ckpt.arch),
            ckpt.n_features,
            ckpt.n_classes,
            ckpt.hidden,
            len(ckpt.theta),
        )
        w.write(ckpt.theta.astype("<f8", copy=False).tobytes())

    write_file_atomic(path, build)
    return 4 + 25 + 8 * len(ckpt.theta) + 4


def read_checkpoint(path: str) -> Checkpoint:
    with open(path, "rb") as fh:
        r = CrcReader(fh, MAGIC)
        version, arch, d, c, h, tlen = r.unpack("<IBIIIQ")
        if version != VERSION:
            raise FormatError(f"unsupported TDMD version {version}")
        try:
            arch = Arch(arch)
        except ValueError:
            raise FormatError(f"unknown arch code {arch}") from None
        if tlen != theta_length(arch, d, c, h):
            raise FormatError(
                f"theta_len {tlen} inconsistent with arch dims "
                f"(expected {theta_length(arch, d, c, h)})"
            )
        theta = np.frombuffer(r.read_exact(8 * tlen), dtype="<f8").copy()
        if r.tell() != r.payload_end:
            raise FormatError("trailing bytes after theta")
        try:
            return Checkpoint(arch, d, c, h, theta)
        except (ParameterError, DataError) as e:
            raise FormatError(f"invalid checkpoint: {e}") from None
