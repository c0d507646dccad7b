import numpy as np
import pytest

from core.errors import ReportFormatError
from core.format_parser import MatrixFormatParser
from core.matrix_io import read_coefficients, read_kernel, read_matrix, write_coefficients, write_matrix
from ustat import KernelTable


@pytest.fixture
def parser():
    return MatrixFormatParser()


@pytest.mark.parametrize("token, expected", [
    ("1.5", 1.5 + 0j),
    ("-2e-3", -2e-3 + 0j),
    ("1-2I", 1 - 2j),
    ("0.5+1e-3I", 0.5 + 1e-3j),
    ("3I", 3j),
])
def test_parse_entry(parser, token, expected):
    assert parser.parse_entry(token) == pytest.approx(expected)


def test_parse_entry_rejects_garbage(parser):
    assert parser.parse_entry("abc") is None
    assert parser.parse_entry("1+2J") is None


def test_parse_record_real(parser):
    arr = parser.parse_record("2 2\n1 2\n3 4\n")
    assert arr.dtype == np.float64
    np.testing.assert_array_equal(arr, [[1.0, 2.0], [3.0, 4.0]])


def test_parse_record_complex_and_comments(parser):
    arr = parser.parse_record("# comment\n1 2\n1+1I 2\n")
    assert np.iscomplexobj(arr)
    assert arr[0, 0] == 1 + 1j


@pytest.mark.parametrize("text", ["", "2 x\n1 2", "2 2\n1 2 3", "0 2\n", "1 1\nfoo"])
def test_parse_record_errors(parser, text):
    with pytest.raises(ReportFormatError):
        parser.parse_record(text)


def test_format_record_keeps_full_precision(parser):
    M = np.array([[1.0 / 3.0, -2.5], [1e-300, 7.0]])
    np.testing.assert_array_equal(parser.parse_record(parser.format_record(M)), M)


def test_complex_matrix_file(tmp_path):
    M = np.array([[1.0, 2 - 1j], [2 + 1j, -3.0]])
    path = write_matrix(M, tmp_path / "m.mat")
    np.testing.assert_array_equal(read_matrix(path), M)


def test_read_missing_matrix(tmp_path):
    with pytest.raises(ReportFormatError):
        read_matrix(tmp_path / "missing.mat")


def test_coefficient_directory(tmp_path, coefficients):
    write_coefficients(np.asarray(coefficients.blocks), tmp_path / "coeffs")
    assert (tmp_path / "coeffs" / "A_1_2.mat").exists()
    assert not (tmp_path / "coeffs" / "A_1_1.mat").exists()
    np.testing.assert_array_equal(read_coefficients(tmp_path / "coeffs"), coefficients.blocks)


def test_empty_coefficient_directory(tmp_path):
    with pytest.raises(ReportFormatError):
        read_coefficients(tmp_path)


def test_kernel_directory(tmp_path, degenerate_kernel):
    H, P = degenerate_kernel
    H.to_directory(P, tmp_path / "kernel")
    H2, P2 = KernelTable.from_directory(tmp_path / "kernel")
    np.testing.assert_array_equal(H2.values, H.values)
    np.testing.assert_array_equal(P2.probs, P.probs)
    assert P2.labels == P.labels


def test_kernel_directory_without_manifest(tmp_path):
    with pytest.raises(ReportFormatError):
        read_kernel(tmp_path)
