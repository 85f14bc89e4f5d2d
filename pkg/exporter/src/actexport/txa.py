"""Writer for the .txa tensor interchange format.

A .txa file is a single dense float32 tensor:

    bytes 0..3    magic ``b"TXA1"``
    bytes 4..7    format version, u32 little-endian (always 1)
    bytes 8..11   number of dimensions, u32 little-endian (1..4)
    next 4*ndim   extents, u32 little-endian, each >= 1
    remainder     row-major float32 payload, little-endian

The writer is deliberately strict: payloads must be finite, extents must be
positive, and the byte stream it produces is a pure function of the array
contents, so re-exporting identical activations yields identical files.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"TXA1"
VERSION = 1
MAX_NDIM = 4


class TxaWriteError(ValueError):
    """Raised when an array cannot be represented as a .txa tensor."""


def encode_tensor(array: np.ndarray) -> bytes:
    """Serialize *array* to .txa bytes.

    The array is converted to float32; inputs that lose no information under
    that conversion (float32, or exact integer grids) are encoded verbatim.
    """
    arr = np.asarray(array)
    if arr.ndim < 1 or arr.ndim > MAX_NDIM:
        raise TxaWriteError(
            f"tensor must have 1..{MAX_NDIM} dimensions, got {arr.ndim}"
        )
    if any(extent < 1 for extent in arr.shape):
        raise TxaWriteError(f"tensor extents must be >= 1, got {arr.shape}")
    payload = np.ascontiguousarray(arr, dtype="<f4")
    if not np.isfinite(payload).all():
        raise TxaWriteError("tensor payload must be finite")
    header = MAGIC + struct.pack("<II", VERSION, payload.ndim)
    header += struct.pack(f"<{payload.ndim}I", *payload.shape)
    return header + payload.tobytes(order="C")


def write_tensor(path: str | Path, array: np.ndarray) -> None:
    """Write *array* to *path* in .txa format (atomic via temp-and-rename)."""
    path = Path(path)
    data = encode_tensor(array)
    tmp = path.with_name(path.name + ".part")
    tmp.write_bytes(data)
    tmp.replace(path)
