"""Binary graymap (P5) round-trips and malformed-file handling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from texlens.errors import CorruptionError, FormatError, UsageError
from texlens.pgm import read_pgm, write_pgm


@given(
    seed=st.integers(0, 2**32 - 1),
    h=st.integers(1, 12),
    w=st.integers(1, 12),
)
@settings(max_examples=60, deadline=None)
def test_uint8_round_trip_is_exact(tmp_path_factory, seed, h, w):
    rng = np.random.Generator(np.random.PCG64(seed))
    img = rng.integers(0, 256, size=(h, w), dtype=np.uint8)
    path = tmp_path_factory.mktemp("pgm") / "x.pgm"
    write_pgm(img, path)
    assert np.array_equal(read_pgm(path), img)


def test_header_layout(tmp_path):
    path = tmp_path / "x.pgm"
    write_pgm(np.zeros((3, 5), dtype=np.uint8), path)
    data = path.read_bytes()
    assert data == b"P5\n5 3\n255\n" + b"\x00" * 15


def test_float_input_scaled_and_rounded(tmp_path):
    img = np.array([[0.0, 0.5, 1.0], [2.0, -1.0, 127.49 / 255.0]])
    path = tmp_path / "x.pgm"
    write_pgm(img, path)
    got = read_pgm(path)
    # 0.5*255 = 127.5 rounds to even (128); out-of-range clips
    assert got.tolist() == [[0, 128, 255], [255, 0, 127]]


def test_write_rejects_bad_inputs(tmp_path):
    with pytest.raises(UsageError):
        write_pgm(np.zeros(4), tmp_path / "x.pgm")
    with pytest.raises(UsageError):
        write_pgm(np.array([[np.nan]]), tmp_path / "x.pgm")


def test_read_accepts_comments_and_flexible_whitespace(tmp_path):
    path = tmp_path / "x.pgm"
    path.write_bytes(b"P5 # sig\n# a comment line\n 2\t2 \n255\n\x01\x02\x03\x04")
    assert read_pgm(path).tolist() == [[1, 2], [3, 4]]


@pytest.mark.parametrize(
    "payload, error",
    [
        (b"P4\n2 2\n255\n\x00\x00\x00\x00", FormatError),  # wrong signature
        (b"P5\n2 x\n255\n\x00\x00\x00\x00", FormatError),  # non-numeric field
        (b"P5\n0 2\n255\n", FormatError),  # zero extent
        (b"P5\n2 2\n65535\n\x00\x00\x00\x00", FormatError),  # 16-bit maxval
        (b"P5\n2 2\n255\n\x00\x00\x00", CorruptionError),  # short payload
        (b"P5\n2 2", CorruptionError),  # truncated header
    ],
)
def test_read_rejects_malformed_files(tmp_path, payload, error):
    path = tmp_path / "bad.pgm"
    path.write_bytes(payload)
    with pytest.raises(error, match="bad.pgm"):
        read_pgm(path)
