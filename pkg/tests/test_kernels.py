"""Compiled and fallback kernels must be interchangeable."""

import os
import subprocess
import sys

import numpy as np
import pytest

from texlens import _kernels
from texlens._kernels import (
    BACKEND,
    available_backends,
    get_backend,
    pairwise_distances,
    smoe_map,
)


def test_a_backend_is_selected():
    assert BACKEND in ("compiled", "fallback")
    assert available_backends()[-1] == "fallback"
    assert get_backend("fallback") is not None
    with pytest.raises(ValueError):
        get_backend("gpu")


def test_compiled_backend_present_in_this_build():
    # the distribution ships with the extension built; if this fails the
    # install is broken, not the tests
    assert "compiled" in available_backends()


def random_pair(seed, m=13, n=17, d=9):
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.standard_normal((m, d)) * 3, rng.standard_normal((n, d)) * 3


@pytest.mark.parametrize("seed", range(5))
def test_backends_agree_on_pairwise_distances(seed):
    if len(available_backends()) < 2:
        pytest.skip("only one backend built")
    a, b = random_pair(seed)
    got = {
        name: get_backend(name).pairwise_distances(a, b)
        for name in available_backends()
    }
    ref = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
    for name, values in got.items():
        assert values.shape == (13, 17)
        assert np.allclose(values, ref, rtol=1e-12, atol=1e-12), name
    assert np.allclose(got["compiled"], got["fallback"], rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("seed", range(5))
def test_backends_agree_on_smoe(seed):
    if len(available_backends()) < 2:
        pytest.skip("only one backend built")
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.uniform(0.0, 4.0, size=(6, 7, 8))
    a = get_backend("compiled").smoe_map(x, 1e-7)
    b = get_backend("fallback").smoe_map(x, 1e-7)
    assert a.shape == (7, 8)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-15)


def test_fallback_chunking_consistent():
    # indexes larger than the chunk budget take the blocked path; results
    # must not depend on where the block boundaries fall
    from texlens._kernels import fallback

    rng = np.random.Generator(np.random.PCG64(8))
    a = rng.standard_normal((64, 33))
    b = rng.standard_normal((97, 33))
    whole = fallback.pairwise_distances(a, b)
    old = fallback._CHUNK_BYTES
    try:
        fallback._CHUNK_BYTES = 1  # force one-row blocks
        blocked = fallback.pairwise_distances(a, b)
    finally:
        fallback._CHUNK_BYTES = old
    assert np.array_equal(whole, blocked)


def test_wrappers_validate_shape():
    with pytest.raises(ValueError):
        pairwise_distances(np.zeros(3), np.zeros((2, 3)))
    with pytest.raises(ValueError):
        smoe_map(np.zeros((2, 2)))


def test_env_var_forces_fallback_backend():
    code = (
        "from texlens._kernels import BACKEND; print(BACKEND)"
    )
    env = dict(os.environ, TEXLENS_KERNELS="fallback")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "fallback"


def test_env_var_rejects_unknown_backend():
    env = dict(os.environ, TEXLENS_KERNELS="cuda")
    out = subprocess.run(
        [sys.executable, "-c", "import texlens._kernels"],
        env=env,
        capture_output=True,
        text=True,
    )
    assert out.returncode != 0
    assert "TEXLENS_KERNELS" in out.stderr
