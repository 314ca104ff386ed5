import numpy as np
import pytest

from lplr.errors import HeaderMismatch, ParseError
from lplr.matio import load_matrix, store_matrix


def test_binary_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    a = rng.normal(size=(7, 3)) * 10.0 ** rng.integers(-200, 200, size=(7, 3))
    path = tmp_path / "m.lplr"
    store_matrix(path, a)
    back = load_matrix(path)
    assert back.dtype == np.float64
    np.testing.assert_array_equal(back, a)


def test_csv_roundtrip_and_parsing(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("1,2\n3,4\n")
    np.testing.assert_array_equal(load_matrix(path), [[1.0, 2.0], [3.0, 4.0]])
    a = np.random.default_rng(1).normal(size=(5, 4))
    store_matrix(path, a)
    np.testing.assert_array_equal(load_matrix(path), a)  # 17 significant digits round-trip exactly


def test_truncated_binary_rejected(tmp_path):
    path = tmp_path / "m.lplr"
    store_matrix(path, np.eye(4))
    raw = path.read_bytes()
    path.write_bytes(raw[:-8])
    with pytest.raises(ParseError, match="truncated"):
        load_matrix(path)


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "m.lplr"
    store_matrix(path, np.eye(2))
    raw = bytearray(path.read_bytes())
    raw[:4] = b"NOPE"
    path.write_bytes(bytes(raw))
    with pytest.raises(ParseError, match="magic"):
        load_matrix(path)


def test_trailing_bytes_are_header_mismatch(tmp_path):
    path = tmp_path / "m.lplr"
    store_matrix(path, np.eye(2))
    path.write_bytes(path.read_bytes() + b"\x00" * 8)
    with pytest.raises(HeaderMismatch):
        load_matrix(path)


def test_csv_bad_cell_reports_position(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("1,2\n3,oops\n")
    with pytest.raises(ParseError, match=r":2: column 2"):
        load_matrix(path)


def test_csv_ragged_rows_rejected(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("1,2\n3\n")
    with pytest.raises(ParseError, match="expected 2 columns"):
        load_matrix(path)


def test_non_finite_rejected_on_store(tmp_path):
    from lplr.errors import ShapeMismatch

    with pytest.raises(ShapeMismatch):
        store_matrix(tmp_path / "m.lplr", np.array([[np.inf, 1.0]]))


def test_format_inferred_from_extension(tmp_path):
    a = np.arange(6.0).reshape(2, 3)
    store_matrix(tmp_path / "x.csv", a)
    assert (tmp_path / "x.csv").read_text().startswith("0,1,2")
    store_matrix(tmp_path / "x.lplr", a)
    assert (tmp_path / "x.lplr").read_bytes()[:4] == b"LPLR"
