"""Image loading and tensor preparation for activation export.

Every image goes through the same fixed recipe so exports are reproducible:

    1. decode and scale to ``resize`` x ``resize`` with bilinear filtering,
    2. convert to RGB (single-channel images are replicated across channels),
    3. map to float32 in [0, 1] and normalize per channel,
    4. crop the central ``crop`` x ``crop`` window.

The crop is always the deterministic center window — export is an analysis
step, not a training step, so no augmentation randomness is wanted.  The
normalization statistics default to the ones the backbone was trained with
and are recorded in the dataset manifest.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image

NORMALIZE_MEAN = (0.485, 0.456, 0.406)
NORMALIZE_STD = (0.229, 0.224, 0.225)


@dataclass(frozen=True)
class PreprocessSpec:
    """Fixed image-to-tensor recipe for one export run."""

    resize: int = 384
    crop: int = 352
    mean: tuple[float, float, float] = NORMALIZE_MEAN
    std: tuple[float, float, float] = NORMALIZE_STD

    def __post_init__(self) -> None:
        if self.resize < 1 or self.crop < 1:
            raise ValueError("resize and crop must be positive")
        if self.crop > self.resize:
            raise ValueError(
                f"crop ({self.crop}) cannot exceed resize ({self.resize})"
            )

    def describe(self) -> dict:
        """Parameters as recorded in the manifest provenance block."""
        return {
            "resize": self.resize,
            "crop": self.crop,
            "crop_mode": "center",
            "normalize_mean": list(self.mean),
            "normalize_std": list(self.std),
        }


def load_image_tensor(path: str | Path, spec: PreprocessSpec) -> torch.Tensor:
    """Load one image file as a normalized (3, crop, crop) float32 tensor.

    Raises ``OSError`` (from Pillow) when the file cannot be decoded; the
    caller decides whether that skips the sample or aborts the run.
    """
    with Image.open(path) as img:
        img = img.resize((spec.resize, spec.resize), Image.BILINEAR)
        img = img.convert("RGB")
        pixels = np.asarray(img, dtype=np.float32) / 255.0
    mean = np.asarray(spec.mean, dtype=np.float32)
    std = np.asarray(spec.std, dtype=np.float32)
    pixels = (pixels - mean) / std
    offset = (spec.resize - spec.crop) // 2
    window = pixels[offset : offset + spec.crop, offset : offset + spec.crop]
    return torch.from_numpy(np.ascontiguousarray(window.transpose(2, 0, 1)))
