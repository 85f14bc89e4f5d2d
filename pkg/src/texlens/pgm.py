"""Minimal binary portable-graymap (P5, 8-bit) reader and writer.

Graymaps are the engine's only image codec: synthetic fixtures are written
as PGM, and saliency maps are rendered to PGM for quick inspection. Keeping
to one trivially parseable format avoids an imaging dependency.
"""

from __future__ import annotations

import numpy as np

from .errors import CorruptionError, FormatError, UsageError


def write_pgm(image, path) -> None:
    """Write a 2-D uint8 array (or [0,1] float array) as binary PGM."""
    arr = np.asarray(image)
    if arr.ndim != 2:
        raise UsageError(f"graymap must be 2-D, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        arr = np.asarray(arr, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise UsageError("graymap values must be finite")
        arr = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(arr).tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a binary 8-bit PGM into a 2-D uint8 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise FormatError(f"{path}: not a binary graymap (missing P5 signature)")
    # Header: P5, width, height, maxval — whitespace-separated, then one
    # whitespace byte before the pixel payload. Comment lines start with '#'.
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise CorruptionError(f"{path}: truncated graymap header")
        fields.append(data[start:pos])
    pos += 1  # single whitespace separating header from payload
    try:
        w, h, maxval = (int(f) for f in fields)
    except ValueError:
        raise FormatError(f"{path}: non-numeric graymap header fields {fields}") from None
    if w < 1 or h < 1:
        raise FormatError(f"{path}: bad graymap dimensions {w}x{h}")
    if maxval != 255:
        raise FormatError(f"{path}: only 8-bit graymaps supported, maxval={maxval}")
    payload = data[pos : pos + w * h]
    if len(payload) != w * h:
        raise CorruptionError(
            f"{path}: graymap payload has {len(payload)} bytes, expected {w * h}"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w)
