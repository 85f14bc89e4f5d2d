"""Deterministic stand-in encoder: a pooled filter-bank pyramid.

Substitutes for a CNN in tests and desk-scale runs while preserving the
structural contract of a real backbone: five stages, non-negative channels,
spatial extents halving per stage. Unlike a CNN it is analytically
predictable — e.g. the horizontal-derivative-energy channel is exactly zero
on a constant image and strictly positive on vertical stripes — which makes
end-to-end pipeline behavior testable against hand oracles.

The 13-channel bank below is evaluated once at full resolution; stage s
(1-based) is the bank box-pooled by 2^s, so deep stages aggregate local
texture energy toward per-region statistics the way a backbone's growing
receptive fields do, and the stage extent is image/2^s:

    0      local mean (3x3 box)
    1      local contrast (3x3 mean squared difference from the center)
    2,3,4  horizontal / vertical / diagonal derivative energy, 5x5-smoothed
    5..12  band-pass energy at 2 wavelengths x 4 orientations

Channels 1-4 are built from pixel differences, so they are *exactly* zero
wherever the image is flat (box pooling preserves exact zeros); all
channels are non-negative, matching the post-ReLU assumption of the
saliency statistic.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import UsageError, ValidationError
from .exchange import STAGE_COUNT, ActivationSet

MIN_IMAGE_EXTENT = 32

CHANNEL_NAMES = (
    "mean",
    "contrast",
    "grad_h",
    "grad_v",
    "grad_diag",
    "band_w4_o0",
    "band_w4_o45",
    "band_w4_o90",
    "band_w4_o135",
    "band_w8_o0",
    "band_w8_o45",
    "band_w8_o90",
    "band_w8_o135",
)

_BAND_WAVELENGTHS = (4.0, 8.0)
_BAND_ORIENTATIONS = (0.0, 45.0, 90.0, 135.0)


def _reflect_indices(n: int, pad: int) -> np.ndarray:
    # Reflect-without-repeat border, generalized so pad may exceed n - 1
    # (needed when large kernels meet the tiny deepest-stage inputs).
    if n == 1:
        return np.zeros(n + 2 * pad, dtype=np.intp)
    period = 2 * n - 2
    base = np.mod(np.arange(-pad, n + pad), period)
    return np.where(base >= n, period - base, base)


def _pad_reflect(img: np.ndarray, ph: int, pw: int) -> np.ndarray:
    rows = _reflect_indices(img.shape[0], ph)
    cols = _reflect_indices(img.shape[1], pw)
    return img[np.ix_(rows, cols)]


def _conv2(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    kh, kw = kernel.shape
    padded = _pad_reflect(img, kh // 2, kw // 2)
    windows = sliding_window_view(padded, (kh, kw))
    return np.einsum("ijkl,kl->ij", windows, kernel, optimize=True)


def _box_kernel(size: int) -> np.ndarray:
    return np.full((size, size), 1.0 / (size * size))


def _band_pair(wavelength: float, orientation_deg: float):
    """Quadrature band-pass kernel pair (even cosine, odd sine)."""
    half = int(wavelength)
    y, x = np.mgrid[-half : half + 1, -half : half + 1].astype(np.float64)
    theta = np.deg2rad(orientation_deg)
    u = x * np.cos(theta) + y * np.sin(theta)
    window = np.exp(-(x * x + y * y) / (2.0 * (0.5 * wavelength) ** 2))
    phase = 2.0 * np.pi * u / wavelength
    even = np.cos(phase) * window
    odd = np.sin(phase) * window
    even -= even.mean()  # zero direct-current gain: flat regions respond ~0
    even /= np.abs(even).sum()
    odd /= np.abs(odd).sum()
    return even, odd


_BAND_KERNELS = tuple(
    _band_pair(w, o) for w in _BAND_WAVELENGTHS for o in _BAND_ORIENTATIONS
)

_SMOOTH5 = _box_kernel(5)


def _shifted_diff(img: np.ndarray, dr: int, dc: int) -> np.ndarray:
    """(img shifted by (dr,dc) minus img shifted by (-dr,-dc)) / 2.

    Central difference built from exact pixel subtraction: identically zero
    wherever the two shifted neighborhoods agree (e.g. any flat region).
    """
    padded = _pad_reflect(img, abs(dr), abs(dc))
    h, w = img.shape
    pr, pc = abs(dr), abs(dc)
    fwd = padded[pr + dr : pr + dr + h, pc + dc : pc + dc + w]
    bwd = padded[pr - dr : pr - dr + h, pc - dc : pc - dc + w]
    return (fwd - bwd) * 0.5


def filter_bank(image: np.ndarray) -> np.ndarray:
    """Apply the 13-channel bank at full resolution -> (13, H, W) float64."""
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape
    channels = np.empty((len(CHANNEL_NAMES), h, w))

    channels[0] = _conv2(img, _box_kernel(3))

    # Contrast: mean over the 3x3 window of squared difference from the
    # window center. Differences of equal pixels are exactly 0, so this
    # channel (unlike a box-mean variance) is bit-exact zero on flat images.
    padded = _pad_reflect(img, 1, 1)
    windows = sliding_window_view(padded, (3, 3))
    diff = windows - img[:, :, None, None]
    channels[1] = np.einsum("ijkl,ijkl->ij", diff, diff, optimize=True) / 9.0

    for slot, (dr, dc) in ((2, (0, 1)), (3, (1, 0)), (4, (1, 1))):
        g = _shifted_diff(img, dr, dc)
        channels[slot] = _conv2(g * g, _SMOOTH5)

    for slot, (even, odd) in enumerate(_BAND_KERNELS, start=5):
        re = _conv2(img, even)
        ro = _conv2(img, odd)
        channels[slot] = re * re + ro * ro

    return channels


def _pool_channels(bank: np.ndarray) -> np.ndarray:
    c, h, w = bank.shape
    return bank.reshape(c, h // 2, 2, w // 2, 2).mean(axis=(2, 4))


def standin_encoder(image, sample_id: str = "", class_id: str = "") -> ActivationSet:
    """Encode a grayscale image into a five-stage ActivationSet.

    The image (2-D, values in [0, 1], or uint8) is cropped at the origin to
    a multiple-of-32 box so every stage halves exactly; inputs smaller than
    32x32 are rejected.
    """
    img = np.asarray(image)
    if img.ndim != 2:
        raise UsageError(f"image must be 2-D grayscale, got shape {img.shape}")
    if img.dtype == np.uint8:
        img = img.astype(np.float64) / 255.0
    else:
        img = img.astype(np.float64)
    if not np.all(np.isfinite(img)):
        raise ValidationError("image contains non-finite values")
    h, w = img.shape
    if h < MIN_IMAGE_EXTENT or w < MIN_IMAGE_EXTENT:
        raise UsageError(
            f"image must be at least {MIN_IMAGE_EXTENT}x{MIN_IMAGE_EXTENT}, got {h}x{w}"
        )
    img = img[: (h // 32) * 32, : (w // 32) * 32]

    stages = []
    level = filter_bank(img)
    for _ in range(STAGE_COUNT):
        level = _pool_channels(level)
        stages.append(level.astype(np.float32))
    return ActivationSet(sample_id=sample_id, class_id=class_id, stages=tuple(stages))
