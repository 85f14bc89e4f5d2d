"""Distance metric, exact k-NN, and class relevance statistics."""

import io

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from texlens.errors import UsageError
from texlens.metric import (
    build_index,
    class_mean_distance,
    class_mean_distances,
    distance,
    knn,
    relevance_matrix,
    texture_relevance,
    write_relevance_csv,
)


def distance_reference(a, b, dps=60):
    with mpmath.workdps(dps):
        total = mpmath.fsum(
            (mpmath.mpf(float(x)) - mpmath.mpf(float(y))) ** 2
            for x, y in zip(a, b)
        )
        return float(mpmath.sqrt(total))


def test_distance_hand_values():
    assert distance([0.0, 0.0], [3.0, 4.0]) == 5.0
    assert distance([1.5], [1.5]) == 0.0


def test_distance_matches_high_precision_high_dim():
    rng = np.random.Generator(np.random.PCG64(13))
    for _ in range(5):
        a = rng.standard_normal(2048) * rng.uniform(0.01, 100)
        b = rng.standard_normal(2048) * rng.uniform(0.01, 100)
        want = distance_reference(a, b)
        assert distance(a, b) == pytest.approx(want, rel=1e-9)


def test_distance_rejects_mismatch():
    with pytest.raises(UsageError):
        distance([1.0, 2.0], [1.0])
    with pytest.raises(UsageError):
        distance(np.zeros((2, 2)), np.zeros((2, 2)))


def entries_from(ids, vectors, class_ids=None):
    class_ids = class_ids or ["c"] * len(ids)
    return [
        (sid, cid, np.asarray(vec, dtype=np.float64))
        for sid, cid, vec in zip(ids, class_ids, vectors)
    ]


def test_build_index_sorts_and_validates():
    entries = entries_from(["b", "a"], [[1.0, 2.0], [3.0, 4.0]], ["cb", "ca"])
    index = build_index(entries, stage=4)
    assert index.sample_ids == ("a", "b")
    assert index.class_ids == ("ca", "cb")
    assert index.vectors.shape == (2, 2) and index.stage == 4
    assert np.array_equal(index.vectors[0], [3.0, 4.0])
    with pytest.raises(UsageError):
        build_index([], stage=1)
    with pytest.raises(UsageError):
        build_index(entries_from(["a", "a"], [[1.0], [2.0]]), stage=1)
    with pytest.raises(UsageError):
        build_index(entries_from(["a", "b"], [[1.0], [2.0, 3.0]]), stage=1)


@given(
    seed=st.integers(0, 2**32 - 1),
    n=st.integers(2, 40),
    dim=st.integers(1, 8),
    k=st.integers(1, 40),
)
@settings(max_examples=60, deadline=None)
def test_knn_matches_brute_force(seed, n, dim, k):
    k = min(k, n)
    rng = np.random.Generator(np.random.PCG64(seed))
    vectors = np.round(rng.standard_normal((n, dim)), 1)  # rounding forces ties
    ids = [f"s{i:03d}" for i in range(n)]
    index = build_index(entries_from(ids, vectors), stage=1)
    query = np.round(rng.standard_normal(dim), 1)
    got = knn(query, index, k)
    want = sorted(
        (float(np.linalg.norm(vectors[i] - query)), ids[i]) for i in range(n)
    )[:k]
    assert [nb.sample_id for nb in got] == [sid for _, sid in want]
    for nb, (dist, _) in zip(got, want):
        assert nb.distance == pytest.approx(dist, rel=1e-12, abs=1e-12)


def test_knn_tie_break_is_lexicographic():
    vectors = [[1.0, 0.0], [1.0, 0.0], [1.0, 0.0], [9.0, 9.0]]
    index = build_index(entries_from(["c", "a", "b", "d"], vectors), stage=1)
    got = knn(np.array([0.0, 0.0]), index, 3)
    assert [nb.sample_id for nb in got] == ["a", "b", "c"]


def test_knn_k_bounds():
    index = build_index(entries_from(["a", "b"], [[0.0], [1.0]]), stage=1)
    assert len(knn(np.array([0.2]), index, 2)) == 2  # k == n is allowed
    for bad in (0, 3, -1):
        with pytest.raises(UsageError):
            knn(np.array([0.2]), index, bad)
    with pytest.raises(UsageError):
        knn(np.array([0.2, 0.4]), index, 1)  # dimension mismatch


def grand_mean_reference(a, b, dps=60):
    with mpmath.workdps(dps):
        total = mpmath.fsum(
            mpmath.sqrt(
                mpmath.fsum(
                    (mpmath.mpf(float(x)) - mpmath.mpf(float(y))) ** 2
                    for x, y in zip(row_a, row_b)
                )
            )
            for row_a in a
            for row_b in b
        )
        return float(total / (len(a) * len(b)))


def test_class_statistics_match_high_precision():
    rng = np.random.Generator(np.random.PCG64(29))
    for _ in range(8):
        n, m, d = rng.integers(1, 6), rng.integers(1, 6), rng.integers(1, 7)
        a = rng.standard_normal((n, d)) * 10
        b = rng.standard_normal((m, d)) * 10
        want = grand_mean_reference(a, b)
        assert texture_relevance(a, b) == pytest.approx(want, rel=1e-9)
        # the grand mean equals the average of per-query class-mean distances
        assert np.mean([class_mean_distance(a, q) for q in b]) == pytest.approx(
            want, rel=1e-9
        )
        assert class_mean_distances(a, b).mean() == pytest.approx(want, rel=1e-9)


def test_class_statistics_validation():
    with pytest.raises(UsageError):
        texture_relevance(np.zeros((2, 3)), np.zeros((2, 4)))
    with pytest.raises(UsageError):
        texture_relevance(np.zeros((0, 3)), np.zeros((2, 3)))
    with pytest.raises(UsageError):
        class_mean_distance(np.zeros((2, 3)), np.zeros(4))


def test_relevance_matrix_canonical_and_consistent():
    rng = np.random.Generator(np.random.PCG64(31))
    sems = {f"m{i}": rng.standard_normal((3, 4)) for i in (1, 0, 2)}
    texs = {tid: rng.standard_normal((2, 4)) for tid in ("zz", "aa")}
    rel = relevance_matrix(sems.items(), texs.items())
    assert rel.sem_ids == ("m0", "m1", "m2")
    assert rel.texture_ids == ("aa", "zz")
    assert rel.values.shape == (3, 2)
    assert (rel.values >= 0).all()
    assert rel.values[1, 0] == pytest.approx(
        texture_relevance(sems["m1"], texs["aa"]), rel=1e-12
    )


def test_relevance_matrix_needs_two_classes_and_one_texture():
    vec = np.ones((2, 3))
    with pytest.raises(UsageError):
        relevance_matrix([("a", vec)], [("t", vec)])
    with pytest.raises(UsageError):
        relevance_matrix([("a", vec), ("b", vec)], [])


def test_relevance_csv_roundtrips_exact_floats():
    rng = np.random.Generator(np.random.PCG64(37))
    rel = relevance_matrix(
        [("m0", rng.standard_normal((2, 3))), ("m1", rng.standard_normal((2, 3)))],
        [("t0", rng.standard_normal((2, 3)))],
    )
    sink = io.StringIO()
    write_relevance_csv(rel, sink)
    lines = sink.getvalue().strip().splitlines()
    assert lines[0] == "class_id,t0"
    for line, cid, row in zip(lines[1:], rel.sem_ids, rel.values):
        name, *cells = line.split(",")
        assert name == cid
        assert [float(c) for c in cells] == [float(v) for v in row]
