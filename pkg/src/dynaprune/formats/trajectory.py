"""Trajectory logs ("TDLG"): per-epoch predicted probabilities or
pre-reduced loss-difference magnitudes, with random epoch access.

Layout (little-endian throughout):
    magic "TDLG" | version u32=1 | payload_kind u8 | recording_mode u8 |
    reserved u16=0 | N u64 | C u32 | T u32 | labels N*u32 |
    payload | CRC32 u32

payload is T blocks of N*C f32 row-major (FullProbs) or T-1 blocks of
N f32 (DeltaMagnitudes). The CRC covers every byte after the magic.
"""

from __future__ import annotations

import enum
import os
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import CapacityError, DataError, FormatError, ParameterError, RangeError
from ._io import CrcReader, CrcWriter

MAGIC = b"TDLG"
VERSION = 1
HEADER_BYTES = 28
ROW_SUM_TOL = 1e-4


class PayloadKind(enum.IntEnum):
    FULL_PROBS = 0
    DELTA_MAGNITUDES = 1


class RecordingMode(enum.IntEnum):
    TRAIN_TIME = 0
    EVAL_TIME = 1


@dataclass(frozen=True, eq=False)
class TrajectoryHeader:
    payload_kind: PayloadKind
    recording_mode: RecordingMode
    n_samples: int
    n_classes: int
    n_epochs: int
    labels: np.ndarray

    def __post_init__(self):
        if self.n_samples < 1:
            raise ParameterError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.n_classes < 1:
            raise ParameterError(f"n_classes must be >= 1, got {self.n_classes}")
        if self.n_epochs < 1:
            raise ParameterError(f"n_epochs must be >= 1, got {self.n_epochs}")
        raw = np.asarray(self.labels)
        if raw.shape != (self.n_samples,):
            raise ParameterError(
                f"labels shape {raw.shape} does not match n_samples {self.n_samples}"
            )
        if raw.dtype.kind not in "iu":
            raise DataError(f"labels must be integers, got dtype {raw.dtype}")
        if raw.size and (raw.min() < 0 or raw.max() >= self.n_classes):
            raise DataError(
                f"labels must lie in [0, {self.n_classes}), "
                f"got range [{raw.min()}, {raw.max()}]"
            )
        object.__setattr__(self, "labels", raw.astype(np.uint32))

    @property
    def n_blocks(self) -> int:
        if self.payload_kind == PayloadKind.FULL_PROBS:
            return self.n_epochs
        return self.n_epochs - 1

    @property
    def block_bytes(self) -> int:
        if self.payload_kind == PayloadKind.FULL_PROBS:
            return self.n_samples * self.n_classes * 4
        return self.n_samples * 4

    def total_bytes(self) -> int:
        return HEADER_BYTES + 4 * self.n_samples + self.n_blocks * self.block_bytes + 4

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrajectoryHeader):
            return NotImplemented
        return (
            self.payload_kind == other.payload_kind
            and self.recording_mode == other.recording_mode
            and self.n_samples == other.n_samples
            and self.n_classes == other.n_classes
            and self.n_epochs == other.n_epochs
            and np.array_equal(self.labels, other.labels)
        )


def _check_probs_block(probs: np.ndarray, n: int, c: int) -> np.ndarray:
    arr = np.asarray(probs)
    if arr.shape != (n, c):
        raise FormatError(f"probability block shape {arr.shape}, expected {(n, c)}")
    arr = np.ascontiguousarray(arr, dtype=np.float32)
    if not np.all(np.isfinite(arr)):
        raise DataError("probability block contains non-finite entries")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise DataError("probability entries must lie in [0, 1]")
    sums = arr.sum(axis=1, dtype=np.float64)
    bad = np.abs(sums - 1.0) > ROW_SUM_TOL
    if bad.any():
        i = int(np.argmax(bad))
        raise DataError(f"row {i} sums to {sums[i]:.6f}, outside 1 +/- {ROW_SUM_TOL}")
    return arr


def _check_delta_block(deltas: np.ndarray, n: int) -> np.ndarray:
    arr = np.asarray(deltas)
    if arr.shape != (n,):
        raise FormatError(f"delta block shape {arr.shape}, expected {(n,)}")
    arr = np.ascontiguousarray(arr, dtype=np.float32)
    if not np.all(np.isfinite(arr)):
        raise DataError("delta block contains non-finite entries")
    if arr.min() < 0.0:
        raise DataError("delta magnitudes must be nonnegative")
    return arr


class TrajectoryWriter:
    """Streaming single-writer for TDLG files.

    Blocks are appended one at a time so only one epoch is resident. The
    file is staged at `path + ".tmp"` and renamed on successful close, so a
    crashed or aborted write never leaves a plausible-looking artifact.
    """

    def __init__(self, path: str, header: TrajectoryHeader):
        self.header = header
        self._path = path
        self._tmp = path + ".tmp"
        self._blocks_written = 0
        self._closed = False
        self._fh = open(self._tmp, "wb")
        self._w = CrcWriter(self._fh)
        self._w.write_magic(MAGIC)
        self._w.pack(
            "<IBBHQII",
            VERSION,
            int(header.payload_kind),
            int(header.recording_mode),
            0,
            header.n_samples,
            header.n_classes,
            header.n_epochs,
        )
        self._w.write(header.labels.tobytes())

    def append_epoch(self, probs: np.ndarray) -> None:
        if self.header.payload_kind != PayloadKind.FULL_PROBS:
            raise ParameterError("append_epoch requires a FullProbs log")
        self._append(_check_probs_block(probs, self.header.n_samples, self.header.n_classes))

    def append_delta_block(self, deltas: np.ndarray) -> None:
        if self.header.payload_kind != PayloadKind.DELTA_MAGNITUDES:
            raise ParameterError("append_delta_block requires a DeltaMagnitudes log")
        self._append(_check_delta_block(deltas, self.header.n_samples))

    def _append(self, arr: np.ndarray) -> None:
        if self._closed:
            raise CapacityError("writer is closed")
        if self._blocks_written >= self.header.n_blocks:
            raise CapacityError(
                f"log declares {self.header.n_blocks} blocks, all already written"
            )
        self._w.write(arr.tobytes())
        self._blocks_written += 1

    def close(self) -> int:
        """Finalize the checksum and publish the file. Returns total bytes."""
        if self._closed:
            raise CapacityError("writer already closed")
        if self._blocks_written != self.header.n_blocks:
            self.abort()
            raise CapacityError(
                f"log declares {self.header.n_blocks} blocks, "
                f"only {self._blocks_written} written"
            )
        self._w.finish()
        self._fh.close()
        os.replace(self._tmp, self._path)
        self._closed = True
        return self.header.total_bytes()

    def abort(self) -> None:
        if not self._closed:
            self._fh.close()
            if os.path.exists(self._tmp):
                os.remove(self._tmp)
            self._closed = True

    def __enter__(self) -> "TrajectoryWriter":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is not None:
            self.abort()
        elif not self._closed:
            self.close()


def _parse_header(r: CrcReader) -> TrajectoryHeader:
    version, kind, mode, reserved, n, c, t = r.unpack("<IBBHQII")
    if version != VERSION:
        raise FormatError(f"unsupported TDLG version {version}")
    try:
        kind = PayloadKind(kind)
        mode = RecordingMode(mode)
    except ValueError as e:
        raise FormatError(f"bad header enum: {e}") from None
    if reserved != 0:
        raise FormatError(f"reserved header field must be 0, got {reserved}")
    labels = np.frombuffer(r.read_exact(4 * n), dtype="<u4").copy()
    try:
        return TrajectoryHeader(kind, mode, n, c, t, labels)
    except (ParameterError, DataError) as e:
        raise FormatError(f"invalid header: {e}") from None


class TrajectoryReader:
    """Random-access reader for TDLG files.

    The full-file CRC is verified once at open; reads after that are pure
    seeks into the verified payload. State is immutable after open, so one
    file may be open in any number of readers concurrently.
    """

    def __init__(self, path: str):
        self._fh = open(path, "rb")
        try:
            self._r = CrcReader(self._fh, MAGIC)
            self.header = _parse_header(self._r)
            self._payload_start = 4 + HEADER_BYTES - 4 + 4 * self.header.n_samples
            declared_end = self._payload_start + self.header.n_blocks * self.header.block_bytes
            if declared_end != self._r.payload_end:
                raise FormatError(
                    f"payload length {self._r.payload_end - self._payload_start} does not "
                    f"match header ({self.header.n_blocks} blocks of {self.header.block_bytes} bytes)"
                )
        except BaseException:
            self._fh.close()
            raise

    @property
    def payload_kind(self) -> PayloadKind:
        return self.header.payload_kind

    def read_epoch(self, t: int) -> np.ndarray:
        if self.header.payload_kind != PayloadKind.FULL_PROBS:
            raise ParameterError("read_epoch requires a FullProbs log")
        h = self.header
        if not 0 <= t < h.n_epochs:
            raise RangeError(f"epoch {t} out of range [0, {h.n_epochs})")
        self._r.seek(self._payload_start + t * h.block_bytes)
        flat = np.frombuffer(self._r.read_exact(h.block_bytes), dtype="<f4")
        return flat.reshape(h.n_samples, h.n_classes).copy()

    def read_delta_block(self, t: int) -> np.ndarray:
        if self.header.payload_kind != PayloadKind.DELTA_MAGNITUDES:
            raise ParameterError("read_delta_block requires a DeltaMagnitudes log")
        h = self.header
        if not 0 <= t < h.n_epochs - 1:
            raise RangeError(f"delta block {t} out of range [0, {h.n_epochs - 1})")
        self._r.seek(self._payload_start + t * h.block_bytes)
        return np.frombuffer(self._r.read_exact(h.block_bytes), dtype="<f4").copy()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "TrajectoryReader":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()


class InMemoryTrajectory:
    """Array-backed stand-in exposing the TrajectoryReader read surface.

    Used by the trainer (which produces blocks in memory) and by tests;
    write() serializes to the identical on-disk form.
    """

    def __init__(self, header: TrajectoryHeader, blocks: np.ndarray):
        blocks = np.asarray(blocks, dtype=np.float32)
        if header.payload_kind == PayloadKind.FULL_PROBS:
            want = (header.n_epochs, header.n_samples, header.n_classes)
        else:
            want = (header.n_epochs - 1, header.n_samples)
        if blocks.shape != want:
            raise FormatError(f"blocks shape {blocks.shape}, expected {want}")
        self.header = header
        self._blocks = blocks

    @property
    def payload_kind(self) -> PayloadKind:
        return self.header.payload_kind

    def read_epoch(self, t: int) -> np.ndarray:
        if self.header.payload_kind != PayloadKind.FULL_PROBS:
            raise ParameterError("read_epoch requires a FullProbs log")
        if not 0 <= t < self.header.n_epochs:
            raise RangeError(f"epoch {t} out of range [0, {self.header.n_epochs})")
        return self._blocks[t]

    def read_delta_block(self, t: int) -> np.ndarray:
        if self.header.payload_kind != PayloadKind.DELTA_MAGNITUDES:
            raise ParameterError("read_delta_block requires a DeltaMagnitudes log")
        if not 0 <= t < self.header.n_epochs - 1:
            raise RangeError(f"delta block {t} out of range [0, {self.header.n_epochs - 1})")
        return self._blocks[t]

    def close(self) -> None:
        pass

    def write(self, path: str) -> int:
        with TrajectoryWriter(path, self.header) as w:
            for block in self._blocks:
                if self.header.payload_kind == PayloadKind.FULL_PROBS:
                    w.append_epoch(block)
                else:
                    w.append_delta_block(block)
        return self.header.total_bytes()


def write_trajectory(path: str, header: TrajectoryHeader, blocks) -> int:
    """One-shot write of an iterable of blocks. Returns total bytes."""
    with TrajectoryWriter(path, header) as w:
        for block in blocks:
            if header.payload_kind == PayloadKind.FULL_PROBS:
                w.append_epoch(block)
            else:
                w.append_delta_block(block)
    return header.total_bytes()


def read_header(path: str) -> TrajectoryHeader:
    """Open, verify, and return just the header of a TDLG file."""
    with TrajectoryReader(path) as r:
        return r.header


def open_trajectory(path: str) -> TrajectoryReader:
    return TrajectoryReader(path)


def load_trajectory(path: str) -> InMemoryTrajectory:
    """Read a whole TDLG file into memory."""
    with TrajectoryReader(path) as r:
        h = r.header
        if h.payload_kind == PayloadKind.FULL_PROBS:
            blocks = np.stack([r.read_epoch(t) for t in range(h.n_epochs)]) \
                if h.n_epochs else np.empty((0, h.n_samples, h.n_classes), np.float32)
        else:
            blocks = (
                np.stack([r.read_delta_block(t) for t in range(h.n_epochs - 1)])
                if h.n_epochs > 1
                else np.empty((0, h.n_samples), np.float32)
            )
        return InMemoryTrajectory(h, blocks)
