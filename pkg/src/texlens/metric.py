"""Feature-space distances, exact k-NN retrieval, and texture relevance.

Distances are Euclidean, accumulated in float64. Retrieval is exact brute
force over the whole index: at the scales this engine targets (thousands of
vectors, up to a few thousand dimensions) a dense distance matrix is cheap,
and exactness keeps every result comparable against an independent sort.

The relevance of a texture class T to a target class C is the grand mean of
all pairwise distances between the two classes' feature vectors; smaller
means the classes look more alike to the encoder.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import UsageError


def distance(a, b) -> float:
    """Euclidean distance between two equal-length vectors."""
    av = np.asarray(a, dtype=np.float64)
    bv = np.asarray(b, dtype=np.float64)
    if av.shape != bv.shape or av.ndim != 1:
        raise UsageError(
            f"vectors must be 1-D with equal length, got {av.shape} and {bv.shape}"
        )
    diff = av - bv
    return float(np.sqrt(np.dot(diff, diff)))


@dataclass(frozen=True)
class NeighborIndex:
    """Immutable stack of feature vectors in sample_id order."""

    sample_ids: tuple
    class_ids: tuple
    vectors: np.ndarray  # (n, d) float64
    stage: object = None

    def __len__(self) -> int:
        return len(self.sample_ids)


class Neighbor(NamedTuple):
    sample_id: str
    class_id: str
    distance: float


def build_index(entries, stage=None) -> NeighborIndex:
    """Build a NeighborIndex from (sample_id, class_id, vector) triples.

    Entries are canonically ordered by sample_id; duplicate ids and mixed
    vector lengths are rejected.
    """
    rows = sorted(entries, key=lambda e: e[0])
    if not rows:
        raise UsageError("cannot build an index from zero entries")
    ids = [r[0] for r in rows]
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})[0]
        raise UsageError(f"duplicate sample id {dup!r} in index entries")
    length = np.asarray(rows[0][2]).shape
    if len(length) != 1:
        raise UsageError("index vectors must be 1-D")
    for r in rows:
        if np.asarray(r[2]).shape != length:
            raise UsageError(
                f"mixed vector lengths in index: sample {r[0]!r} has shape "
                f"{np.asarray(r[2]).shape}, expected {length}"
            )
    matrix = np.ascontiguousarray([r[2] for r in rows], dtype=np.float64)
    return NeighborIndex(
        sample_ids=tuple(ids),
        class_ids=tuple(r[1] for r in rows),
        vectors=matrix,
        stage=stage,
    )


def knn(query, index: NeighborIndex, k: int) -> list:
    """The exact k nearest index entries to ``query``, ascending by distance.

    Ties break toward the smaller sample_id (the index is stored in
    sample_id order and the sort is stable).
    """
    if k < 1 or k > len(index):
        raise UsageError(f"k must be in 1..{len(index)}, got {k}")
    q = np.asarray(query, dtype=np.float64)
    if q.shape != (index.vectors.shape[1],):
        raise UsageError(
            f"query length {q.shape} does not match index width "
            f"{index.vectors.shape[1]}"
        )
    dists = _kernels.pairwise_distances(q[None, :], index.vectors)[0]
    order = np.argsort(dists, kind="stable")[:k]
    return [
        Neighbor(index.sample_ids[i], index.class_ids[i], float(dists[i]))
        for i in order
    ]


def _class_matrix(vectors, what: str) -> np.ndarray:
    m = np.ascontiguousarray(vectors, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] == 0:
        raise UsageError(f"{what} must be a non-empty set of equal-length vectors")
    return m


def class_mean_distance(class_vectors, z) -> float:
    """Mean distance from every vector of a class to the single vector z."""
    m = _class_matrix(class_vectors, "class")
    q = np.asarray(z, dtype=np.float64)
    if q.shape != (m.shape[1],):
        raise UsageError(f"vector length {q.shape} does not match class width {m.shape[1]}")
    return float(_kernels.pairwise_distances(m, q[None, :]).mean())


def class_mean_distances(class_vectors, queries) -> np.ndarray:
    """class_mean_distance of every query row at once -> (n_queries,) array."""
    m = _class_matrix(class_vectors, "class")
    q = _class_matrix(queries, "queries")
    if q.shape[1] != m.shape[1]:
        raise UsageError(
            f"query length {q.shape[1]} does not match class width {m.shape[1]}"
        )
    return _kernels.pairwise_distances(q, m).mean(axis=1)


def texture_relevance(sem_vectors, texture_vectors) -> float:
    """Relevance of a texture class to a target class.

    Mean over texture samples of the class-mean distance, which equals the
    grand mean of all pairwise distances between the two classes.
    """
    a = _class_matrix(sem_vectors, "target class")
    b = _class_matrix(texture_vectors, "texture class")
    if a.shape[1] != b.shape[1]:
        raise UsageError(
            f"vector length mismatch between classes: {a.shape[1]} vs {b.shape[1]}"
        )
    return float(_kernels.pairwise_distances(a, b).mean())


@dataclass(frozen=True)
class RelevanceMatrix:
    """Class-to-texture-class relevance values, canonical order both ways."""

    sem_ids: tuple
    texture_ids: tuple
    values: np.ndarray  # (|C|, |T|) float64, non-negative


def relevance_matrix(sem_classes, texture_classes) -> RelevanceMatrix:
    """Relevance of every texture class to every target class.

    Both arguments are iterables of (class_id, vectors). Rows and columns
    come out sorted by class id regardless of input order.
    """
    sems = sorted(sem_classes, key=lambda c: c[0])
    texs = sorted(texture_classes, key=lambda c: c[0])
    if len(sems) < 2:
        raise UsageError(f"need at least 2 target classes, got {len(sems)}")
    if len(texs) < 1:
        raise UsageError("need at least 1 texture class")
    values = np.empty((len(sems), len(texs)))
    for i, (_, sem_vectors) in enumerate(sems):
        for j, (_, tex_vectors) in enumerate(texs):
            values[i, j] = texture_relevance(sem_vectors, tex_vectors)
    return RelevanceMatrix(
        sem_ids=tuple(c[0] for c in sems),
        texture_ids=tuple(c[0] for c in texs),
        values=values,
    )


def write_relevance_csv(rel: RelevanceMatrix, fh) -> None:
    """CSV with texture ids across the header and one row per target class."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["class_id", *rel.texture_ids])
    for class_id, row in zip(rel.sem_ids, rel.values):
        writer.writerow([class_id, *[repr(float(v)) for v in row]])
