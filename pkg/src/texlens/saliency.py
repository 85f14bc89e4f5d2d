"""Saliency maps over stage activations and feature extraction.

A per-stage map scores every spatial location by how unevenly the channel
activations are distributed there: with v_c = max(x_c, eps) and mu the
channel mean, the statistic is (1/C) * sum_c v_c * ln(v_c / mu). It is zero
where all channels agree, grows with channel dispersion, and scales
linearly under positive scaling of the activations, so the argmax location
is scale-invariant.

Maps at different stage resolutions are squashed to (0, 1) and combined by
bilinear upsampling (half-pixel centers, edges clamped) followed by a
weighted mean. The feature vector of a sample is the raw channel vector at
the most salient location of its own stage map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, UsageError, ValidationError
from .exchange import ActivationSet

# Activation floor applied before logarithms.
EPSILON = 1e-7

WEIGHT_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class FeatureVector:
    """Channel vector read at the most salient location of one stage."""

    values: np.ndarray  # 1-D float64, length = stage channel count
    sample_id: str
    stage: int
    row: int
    col: int


def smoe_statistic(stage_activation) -> np.ndarray:
    """Channel dispersion map of a (channels, h, w) activation block."""
    arr = np.asarray(stage_activation, dtype=np.float64)
    if arr.ndim != 3:
        raise UsageError(
            f"stage activation must be channels x height x width, got shape {arr.shape}"
        )
    if arr.shape[0] < 1:
        raise UsageError("stage activation needs at least one channel")
    if not np.isfinite(arr).all():
        raise ValidationError("stage activation contains non-finite values")
    return _kernels.smoe_map(arr, EPSILON)


def normalize_map(saliency_map) -> np.ndarray:
    """Squash a map into (0, 1): z-score over all locations, then logistic.

    Constant maps (zero population std) normalize to 0.5 everywhere. The
    mapping is strictly increasing, so location ordering is preserved.
    """
    m = np.asarray(saliency_map, dtype=np.float64)
    if not np.isfinite(m).all():
        raise ValidationError("saliency map contains non-finite values")
    # Constancy check on the values themselves: the std of a constant map
    # can round to a nonzero denormal, which would turn 0/0 noise into
    # arbitrary z-scores.
    if m.size == 0 or np.ptp(m) == 0.0:
        return np.full_like(m, 0.5)
    sigma = m.std()
    if sigma == 0.0:
        return np.full_like(m, 0.5)
    z = (m - m.mean()) / sigma
    return 1.0 / (1.0 + np.exp(-z))


def bilinear_resize(values, output_shape) -> np.ndarray:
    """Bilinear upsampling with half-pixel centers and clamped edges.

    Source coordinate of output row i is (i + 0.5) * H_in / H_out - 0.5,
    clamped to the valid range (likewise for columns); a 1x1 input therefore
    resizes to a constant map.
    """
    m = np.asarray(values, dtype=np.float64)
    out_h, out_w = int(output_shape[0]), int(output_shape[1])
    if out_h < 1 or out_w < 1:
        raise UsageError(f"output shape must be positive, got {output_shape}")
    in_h, in_w = m.shape

    def axis_coords(n_in, n_out):
        x = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        x = np.clip(x, 0.0, n_in - 1.0)
        lo = np.floor(x).astype(np.intp)
        hi = np.minimum(lo + 1, n_in - 1)
        frac = x - lo
        return lo, hi, frac

    r0, r1, fr = axis_coords(in_h, out_h)
    c0, c1, fc = axis_coords(in_w, out_w)
    fr = fr[:, None]
    fc = fc[None, :]
    top = m[np.ix_(r0, c0)] * (1.0 - fc) + m[np.ix_(r0, c1)] * fc
    bottom = m[np.ix_(r1, c0)] * (1.0 - fc) + m[np.ix_(r1, c1)] * fc
    return top * (1.0 - fr) + bottom * fr


def combine_maps(maps, output_shape, weights=None) -> np.ndarray:
    """Weighted mean of maps bilinearly upsampled to ``output_shape``.

    Weights must be non-negative and sum to 1 (uniform when omitted). Being
    a convex combination of interpolants, the output stays within the
    min/max of the inputs; normalized inputs stay in [0, 1].
    """
    arrays = [np.asarray(m, dtype=np.float64) for m in maps]
    if not arrays:
        raise UsageError("no maps to combine")
    out_h, out_w = int(output_shape[0]), int(output_shape[1])
    for m in arrays:
        if m.ndim != 2:
            raise UsageError(f"maps must be 2-D, got shape {m.shape}")
        if m.shape[0] > out_h or m.shape[1] > out_w:
            raise UsageError(
                f"output shape {(out_h, out_w)} smaller than map shape {m.shape}"
            )
    if weights is None:
        w = np.full(len(arrays), 1.0 / len(arrays))
    else:
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (len(arrays),):
            raise ConfigError(
                f"need one weight per map ({len(arrays)}), got shape {w.shape}"
            )
        if (w < 0).any():
            raise ConfigError("combination weights must be non-negative")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise ConfigError(f"combination weights must sum to 1, got {w.sum()!r}")
    combined = np.zeros((out_h, out_w))
    for weight, m in zip(w, arrays):
        if weight != 0.0:
            combined += weight * bilinear_resize(m, (out_h, out_w))
    return combined


def salient_location(saliency_map) -> tuple:
    """(row, col) of the map maximum; ties go to the smallest row-major index."""
    m = np.asarray(saliency_map)
    if m.size == 0:
        raise UsageError("empty saliency map")
    flat = int(np.argmax(m))
    return flat // m.shape[1], flat % m.shape[1]


def extract_feature(activations: ActivationSet, stage: int) -> FeatureVector:
    """Channel vector at the most salient location of the chosen stage.

    The location is the argmax of that stage's own dispersion map; the
    returned values are the raw (unclamped) activations there.
    """
    if not 1 <= stage <= len(activations.stages):
        raise UsageError(f"stage must be 1-{len(activations.stages)}, got {stage}")
    block = np.asarray(activations.stage(stage), dtype=np.float64)
    row, col = salient_location(smoe_statistic(block))
    return FeatureVector(
        values=block[:, row, col].copy(),
        sample_id=activations.sample_id,
        stage=stage,
        row=row,
        col=col,
    )
