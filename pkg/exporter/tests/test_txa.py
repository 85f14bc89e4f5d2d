"""Tensor writer: byte layout, strictness, and cross-package readability."""

import struct

import numpy as np
import pytest
from texlens import exchange

from actexport.txa import TxaWriteError, encode_tensor, write_tensor


def test_encoded_bytes_match_documented_layout():
    arr = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]], dtype=np.float32)
    data = encode_tensor(arr)
    assert data[:4] == b"TXA1"
    version, ndim = struct.unpack_from("<II", data, 4)
    assert (version, ndim) == (1, 2)
    assert struct.unpack_from("<II", data, 12) == (2, 3)
    assert data[20:] == arr.tobytes(order="C")
    assert len(data) == 20 + 24


def test_written_file_loads_through_engine_reader_bit_exact(tmp_path):
    rng = np.random.default_rng(5)
    arr = rng.standard_normal((4, 6, 5)).astype(np.float32)
    path = tmp_path / "t.txa"
    write_tensor(path, arr)
    back = exchange.load_tensor(path)
    assert back.dtype == np.float32
    assert back.shape == arr.shape
    assert back.view(np.uint32).tolist() == arr.view(np.uint32).tolist()


def test_integer_input_is_cast_to_float32(tmp_path):
    path = tmp_path / "i.txa"
    write_tensor(path, np.arange(6, dtype=np.int64).reshape(2, 3))
    back = exchange.load_tensor(path)
    assert back.tolist() == [[0.0, 1.0, 2.0], [3.0, 4.0, 5.0]]


@pytest.mark.parametrize(
    "bad",
    [
        np.float32(3.0),  # 0-d
        np.zeros((2, 2, 2, 2, 2), dtype=np.float32),  # 5-d
        np.zeros((0, 3), dtype=np.float32),  # zero extent
        np.array([1.0, np.nan], dtype=np.float32),
        np.array([np.inf], dtype=np.float32),
    ],
)
def test_writer_rejects_unrepresentable_arrays(bad):
    with pytest.raises(TxaWriteError):
        encode_tensor(bad)


def test_writer_output_is_deterministic(tmp_path):
    arr = np.random.default_rng(2).standard_normal((3, 7)).astype(np.float32)
    a, b = tmp_path / "a.txa", tmp_path / "b.txa"
    write_tensor(a, arr)
    write_tensor(b, arr)
    assert a.read_bytes() == b.read_bytes()


def test_no_partial_file_left_behind(tmp_path):
    path = tmp_path / "x.txa"
    with pytest.raises(TxaWriteError):
        write_tensor(path, np.array([np.nan], dtype=np.float32))
    assert not path.exists()
    assert list(tmp_path.iterdir()) == []
