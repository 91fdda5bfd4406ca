"""Low-level helpers for the binary artifact formats.

All artifacts share one envelope: a 4-byte ASCII magic, little-endian fixed
header fields, a payload, and a trailing CRC32 (IEEE, as computed by
zlib.crc32) over every byte after the magic. These helpers centralize the
struct packing and checksum bookkeeping so each format module only describes
its own fields.
"""

from __future__ import annotations

import io
import os
import struct
import zlib
from typing import BinaryIO

from ..errors import FormatError

_CHUNK = 1 << 20


class CrcWriter:
    """File-object wrapper that maintains a running CRC32 of written bytes.

    The magic is written via write_magic() and excluded from the checksum;
    everything else goes through write(). finish() appends the checksum.
    """

    def __init__(self, fh: BinaryIO):
        self._fh = fh
        self._crc = 0
        self._finished = False

    def write_magic(self, magic: bytes) -> None:
        if len(magic) != 4:
            raise FormatError(f"magic must be 4 bytes, got {len(magic)}")
        self._fh.write(magic)

    def write(self, data: bytes) -> None:
        if self._finished:
            raise FormatError("writer already finished")
        self._fh.write(data)
        self._crc = zlib.crc32(data, self._crc)

    def pack(self, fmt: str, *values) -> None:
        self.write(struct.pack(fmt, *values))

    def finish(self) -> None:
        if self._finished:
            raise FormatError("writer already finished")
        self._fh.write(struct.pack("<I", self._crc & 0xFFFFFFFF))
        self._finished = True


class CrcReader:
    """Seekable reader that verifies the trailing CRC32 once, up front.

    After construction the stream is positioned at the first byte past the
    magic; payload_end marks where the payload stops (start of the stored
    checksum). Random access within [4, payload_end) is allowed via seek().
    """

    def __init__(self, fh: BinaryIO, magic: bytes):
        self._fh = fh
        fh.seek(0, os.SEEK_END)
        size = fh.tell()
        if size < len(magic) + 4:
            raise FormatError(f"file too short ({size} bytes) to be a valid artifact")
        fh.seek(0)
        got = fh.read(4)
        if got != magic:
            raise FormatError(f"bad magic: expected {magic!r}, got {got!r}")
        self.payload_end = size - 4

        crc = 0
        pos = 4
        while pos < self.payload_end:
            chunk = fh.read(min(_CHUNK, self.payload_end - pos))
            if not chunk:
                raise FormatError("unexpected EOF while verifying checksum")
            crc = zlib.crc32(chunk, crc)
            pos += len(chunk)
        (stored,) = struct.unpack("<I", fh.read(4))
        if crc & 0xFFFFFFFF != stored:
            raise FormatError(
                f"CRC mismatch: computed 0x{crc & 0xFFFFFFFF:08x}, stored 0x{stored:08x}"
            )
        fh.seek(4)

    def seek(self, offset: int) -> None:
        if offset < 4 or offset > self.payload_end:
            raise FormatError(f"seek to {offset} outside payload bounds")
        self._fh.seek(offset)

    def tell(self) -> int:
        return self._fh.tell()

    def read_exact(self, n: int) -> bytes:
        end = self._fh.tell() + n
        if end > self.payload_end:
            raise FormatError("truncated file: payload shorter than header declares")
        data = self._fh.read(n)
        if len(data) != n:
            raise FormatError("unexpected EOF inside payload")
        return data

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.read_exact(struct.calcsize(fmt)))


def write_file_atomic(path: str, build) -> None:
    """Write an artifact via `build(CrcWriter)` to path, through a temp file.

    A partially written artifact never lands at the destination name: the
    temp file is renamed only after build() and finish() complete.
    """
    tmp = path + ".tmp"
    try:
        with open(tmp, "wb") as fh:
            w = CrcWriter(fh)
            build(w)
            if not w._finished:
                w.finish()
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def read_bytes_artifact(data: bytes, magic: bytes) -> CrcReader:
    """Wrap an in-memory artifact in a verified CrcReader."""
    return CrcReader(io.BytesIO(data), magic)
