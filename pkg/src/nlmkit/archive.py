"""Byte-exact tensor archives for weight sets.

Layout (all integers unsigned 64-bit little-endian, payloads IEEE-754
binary64 little-endian, row-major):

    magic   4 bytes  "ANLM"
    version u64      1
    count   u64      number of tensors
    entry*  count times:
        name_len u64
        name     UTF-8 bytes
        rank     u64
        dims     rank u64 values
        payload  prod(dims) float64 values

Round trips are bitwise: load(save(w)) reproduces every byte of every
tensor.  Malformed files raise a distinct error per failure mode (magic,
version, truncation, duplicate names).
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import (
    ArchiveDuplicateNameError,
    ArchiveError,
    ArchiveMagicError,
    ArchiveTruncatedError,
    ArchiveVersionError,
)
from .training import named_tensor_view

MAGIC = b"ANLM"
FORMAT_VERSION = 1


def save_weights(weights, path) -> None:
    """Write a named-tensor set (structured weights or plain dict)."""
    tensors = named_tensor_view(weights)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQ", FORMAT_VERSION, len(tensors)))
        for name, tensor in tensors.items():
            encoded = name.encode("utf-8")
            arr = np.ascontiguousarray(tensor, dtype="<f8")
            fh.write(struct.pack("<Q", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<Q", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
            fh.write(arr.tobytes())


def _read_exact(fh, count: int, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise ArchiveTruncatedError(
            f"archive ends inside {what}: wanted {count} bytes, got {len(data)}"
        )
    return data


def _read_u64(fh, what: str) -> int:
    return struct.unpack("<Q", _read_exact(fh, 8, what))[0]


def load_weights(path) -> dict[str, np.ndarray]:
    """Read an archive back into an ordered name -> float64 array dict."""
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "magic")
        if magic != MAGIC:
            raise ArchiveMagicError(f"bad magic {magic!r}; expected {MAGIC!r}")
        version = _read_u64(fh, "version")
        if version != FORMAT_VERSION:
            raise ArchiveVersionError(
                f"unsupported format version {version}; expected {FORMAT_VERSION}"
            )
        count = _read_u64(fh, "tensor count")
        tensors: dict[str, np.ndarray] = {}
        for _ in range(count):
            name_len = _read_u64(fh, "name length")
            try:
                name = _read_exact(fh, name_len, "tensor name").decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ArchiveError(f"tensor name is not valid UTF-8: {exc}") from None
            if name in tensors:
                raise ArchiveDuplicateNameError(f"archive contains tensor {name!r} twice")
            rank = _read_u64(fh, f"rank of {name}")
            dims = struct.unpack(f"<{rank}Q", _read_exact(fh, 8 * rank, f"dims of {name}"))
            size = 1
            for d in dims:
                size *= d
            payload = _read_exact(fh, 8 * size, f"payload of {name}")
            tensors[name] = np.frombuffer(payload, dtype="<f8").reshape(dims).copy()
        trailing = fh.read(1)
        if trailing:
            raise ArchiveError("archive has trailing bytes after the last tensor")
    return tensors
