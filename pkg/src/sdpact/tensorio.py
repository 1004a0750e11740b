"""PATD: a little-endian container of named float64 tensors.

Layout::

    b"PATD"  u32 version  u32 entry_count
    per entry:
        u32 name_len  name (UTF-8)  u32 rank  u32 dims[rank]  f64 payload[prod(dims)]

Payload is row-major.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

MAGIC = b"PATD"
VERSION = 1
# refuse to allocate more than this many elements for a single entry
MAX_ELEMENTS = 1 << 31


class PATDError(ValueError):
    code = "patd_error"

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class BadMagicError(PATDError):
    code = "bad_magic"


class UnsupportedVersionError(PATDError):
    code = "unsupported_version"


class TruncatedError(PATDError):
    code = "truncated"


class DuplicateNameError(PATDError):
    code = "duplicate_name"


class OversizedError(PATDError):
    code = "oversized"


def encode(table: dict[str, np.ndarray]) -> bytes:
    parts = [MAGIC, struct.pack("<II", VERSION, len(table))]
    for name, arr in table.items():
        arr = np.asarray(arr, dtype="<f8")
        raw = name.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
        parts.append(struct.pack(f"<I{arr.ndim}I", arr.ndim, *arr.shape))
        parts.append(np.ascontiguousarray(arr).tobytes())
    return b"".join(parts)


def decode(buf: bytes, path=None) -> dict[str, np.ndarray]:
    pos = 0

    def take(n):
        nonlocal pos
        if pos + n > len(buf):
            raise TruncatedError(f"need {n} bytes at offset {pos}, file has {len(buf)}", path)
        chunk = buf[pos:pos + n]
        pos += n
        return chunk

    if take(4) != MAGIC:
        raise BadMagicError("not a PATD file (bad magic)", path)
    version, count = struct.unpack("<II", take(8))
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported format version {version}", path)
    table = {}
    for _ in range(count):
        (nlen,) = struct.unpack("<I", take(4))
        name = take(nlen).decode("utf-8")
        if name in table:
            raise DuplicateNameError(f"duplicate entry name {name!r}", path)
        (rank,) = struct.unpack("<I", take(4))
        dims = struct.unpack(f"<{rank}I", take(4 * rank))
        n = 1
        for d in dims:
            n *= d
        if n > MAX_ELEMENTS or 8 * n > len(buf) - pos:
            if n > MAX_ELEMENTS:
                raise OversizedError(f"entry {name!r} declares {n} elements", path)
            raise TruncatedError(f"entry {name!r} payload truncated", path)
        table[name] = np.frombuffer(take(8 * n), dtype="<f8").reshape(dims).astype(np.float64)
    if pos != len(buf):
        raise PATDError(f"{len(buf) - pos} trailing bytes after last entry", path)
    return table


def save_tensors(table: dict[str, np.ndarray], path) -> None:
    """Write atomically: temp file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = encode(table)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_tensors(path) -> dict[str, np.ndarray]:
    path = Path(path)
    return decode(path.read_bytes(), path)
