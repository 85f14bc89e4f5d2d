"""Texture-to-target-value correlation analytics.

Each texture class contributes one column of the relevance matrix: its mean
feature distance to every target class. Correlating that column against the
per-class CPS values says whether the texture's presence tracks strength.
Vectors are z-normalized (population sigma) before taking the cosine, which
makes s the Pearson correlation coefficient and makes the result invariant
to affine rescaling of either axis.

Relevance values are distances — small means the texture is strongly present
— so under the default ``similarity`` sign convention columns are negated
before normalization and a positive s reads as "more of this texture, higher
CPS". The raw ``distance`` convention is kept behind a flag for audits;
flipping the convention negates every reported s exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, UsageError
from .metric import RelevanceMatrix

SIGN_CONVENTIONS = ("similarity", "distance")


@dataclass(frozen=True)
class CpsVector:
    """Per-class CPS values in canonical class order."""

    class_ids: tuple
    values: np.ndarray  # (|C|,) float64

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if len(self.class_ids) != values.shape[0]:
            raise UsageError(
                f"{len(self.class_ids)} class ids but {values.shape[0]} CPS values"
            )
        if values.shape[0] < 2:
            raise UsageError("need CPS values for at least 2 classes")
        if not np.all(np.isfinite(values)):
            raise UsageError("CPS values must be finite")

    def __len__(self) -> int:
        return len(self.class_ids)


@dataclass(frozen=True)
class TextureScore:
    texture_id: str
    score: float
    degenerate: bool = False


@dataclass(frozen=True)
class CorrelationReport:
    """Per-texture correlation scores, sorted descending (ties by id)."""

    scores: tuple  # of TextureScore
    sign_convention: str

    def __iter__(self):
        return iter(self.scores)

    def __len__(self) -> int:
        return len(self.scores)


@dataclass(frozen=True)
class BatchProfiles:
    """Per-target-class z-normalized texture profiles."""

    class_ids: tuple
    texture_ids: tuple
    values: np.ndarray  # (|C|, |T|) float64, each row mu=0 sigma=1
    sign_convention: str


@dataclass(frozen=True)
class BatchSimilarityMatrix:
    """Class-by-class cosine similarity of texture profiles."""

    class_ids: tuple
    values: np.ndarray  # (|C|, |C|) float64, symmetric, unit diagonal


def znorm(v, name: str = "vector") -> np.ndarray:
    """Shift to mean 0 and scale to population standard deviation 1."""
    values = np.asarray(v, dtype=np.float64)
    if values.ndim != 1 or values.shape[0] < 2:
        raise UsageError(f"{name} must be 1-D with length >= 2, got shape {values.shape}")
    centered = values - values.mean()
    sigma = np.sqrt(np.mean(centered * centered))
    if sigma == 0.0:
        raise DegenerateInputError(f"{name} is constant; cannot normalize")
    return centered / sigma


def cosine(w, y) -> float:
    """Cosine similarity, clamped to [-1, 1] against rounding."""
    wv = np.asarray(w, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if wv.shape != yv.shape or wv.ndim != 1:
        raise UsageError(
            f"vectors must be 1-D with equal length, got {wv.shape} and {yv.shape}"
        )
    wn = np.sqrt(np.dot(wv, wv))
    yn = np.sqrt(np.dot(yv, yv))
    if wn == 0.0 or yn == 0.0:
        raise UsageError("cosine similarity of a zero vector is undefined")
    return min(1.0, max(-1.0, float(np.dot(wv, yv) / (wn * yn))))


def _check_alignment(rel: RelevanceMatrix, cps: CpsVector) -> None:
    if rel.sem_ids != tuple(cps.class_ids):
        raise UsageError(
            f"relevance rows {rel.sem_ids} do not match CPS classes "
            f"{tuple(cps.class_ids)}"
        )


def _check_sign(sign_convention: str) -> None:
    if sign_convention not in SIGN_CONVENTIONS:
        raise UsageError(
            f"sign_convention must be one of {SIGN_CONVENTIONS}, got {sign_convention!r}"
        )


def texture_cps_correlations(
    rel: RelevanceMatrix,
    cps: CpsVector,
    sign_convention: str = "similarity",
) -> CorrelationReport:
    """Correlate each texture's relevance column against the CPS vector.

    A texture whose relevance is constant across classes carries no signal;
    it is reported with s = 0 and a degeneracy flag rather than aborting a
    whole run. A constant CPS vector, by contrast, invalidates every score
    and raises.
    """
    _check_alignment(rel, cps)
    _check_sign(sign_convention)
    cps_z = znorm(cps.values, name="CPS vector")
    scores = []
    for t, texture_id in enumerate(rel.texture_ids):
        column = rel.values[:, t]
        if sign_convention == "similarity":
            column = -column
        if np.ptp(column) == 0.0:
            scores.append(TextureScore(texture_id, 0.0, degenerate=True))
            continue
        s = cosine(cps_z, znorm(column, name=f"texture {texture_id!r} column"))
        scores.append(TextureScore(texture_id, s))
    scores.sort(key=lambda e: (-e.score, e.texture_id))
    return CorrelationReport(scores=tuple(scores), sign_convention=sign_convention)


def batch_texture_profiles(
    rel: RelevanceMatrix,
    cps: CpsVector,
    sign_convention: str = "similarity",
) -> BatchProfiles:
    """Each class's z-normalized, sign-converted relevance row over textures."""
    _check_alignment(rel, cps)
    _check_sign(sign_convention)
    rows = np.empty_like(rel.values)
    for i, class_id in enumerate(rel.sem_ids):
        row = rel.values[i]
        if sign_convention == "similarity":
            row = -row
        rows[i] = znorm(row, name=f"class {class_id!r} relevance row")
    return BatchProfiles(
        class_ids=rel.sem_ids,
        texture_ids=rel.texture_ids,
        values=rows,
        sign_convention=sign_convention,
    )


def batch_similarity(profiles: BatchProfiles) -> BatchSimilarityMatrix:
    """Cosine similarity between every pair of class profiles.

    The upper triangle is computed once and mirrored, so the matrix is
    exactly symmetric and the diagonal exactly 1.
    """
    n = len(profiles.class_ids)
    if n < 2:
        raise UsageError(f"need at least 2 profiles, got {n}")
    values = np.empty((n, n))
    for i in range(n):
        values[i, i] = 1.0
        for j in range(i + 1, n):
            values[i, j] = values[j, i] = cosine(profiles.values[i], profiles.values[j])
    return BatchSimilarityMatrix(class_ids=profiles.class_ids, values=values)


def write_correlation_csv(report: CorrelationReport, fh) -> None:
    """CSV rows of (texture_id, s, degenerate), in ranked order."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["texture_id", "s", "degenerate"])
    for entry in report:
        writer.writerow([entry.texture_id, repr(entry.score), int(entry.degenerate)])


def format_ranking_table(report: CorrelationReport, top_n: int = 10) -> str:
    """Side-by-side Top/Bottom ranking of textures by correlation."""
    entries = list(report.scores)
    top = entries[:top_n]
    bottom = list(reversed(entries[-top_n:]))
    width = max(
        [len("texture")] + [len(e.texture_id) for e in entries[:top_n] + entries[-top_n:]]
    )
    lines = [
        f"{'Top ' + str(len(top)):<{width + 10}}    {'Bottom ' + str(len(bottom))}",
        f"{'texture':<{width}}  {'s':>8}    {'texture':<{width}}  {'s':>8}",
    ]
    for left, right in zip(top, bottom):
        lines.append(
            f"{left.texture_id:<{width}}  {left.score:>8.4f}    "
            f"{right.texture_id:<{width}}  {right.score:>8.4f}"
        )
    return "\n".join(lines) + "\n"


def write_similarity_csv(matrix: BatchSimilarityMatrix, fh) -> None:
    """CSV with class ids as header row and leading column."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["class_id", *matrix.class_ids])
    for class_id, row in zip(matrix.class_ids, matrix.values):
        writer.writerow([class_id, *[repr(float(v)) for v in row]])
