"""Helpers that synthesize small image trees for exporter tests."""

from __future__ import annotations

import numpy as np
from PIL import Image


def write_image(path, *, size=(64, 64), seed=0, mode="L", fmt=None) -> None:
    """Write one pseudo-random test image."""
    rng = np.random.default_rng(seed)
    if mode == "L":
        arr = rng.integers(0, 256, size=size, dtype=np.uint8)
    else:
        arr = rng.integers(0, 256, size=(*size, 3), dtype=np.uint8)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr, mode=mode).save(path, format=fmt)


def make_image_tree(root, classes: dict[str, int], *, size=(64, 64), seed=0) -> None:
    """Create a DTD-style tree: one folder per class with numbered images."""
    counter = seed
    for class_id, count in classes.items():
        for i in range(count):
            write_image(
                root / class_id / f"{class_id}_{i:04d}.png",
                size=size,
                seed=counter,
            )
            counter += 1
