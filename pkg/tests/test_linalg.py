import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from core.errors import InvalidInputError
from core.linalg import (
    BlockHermMatrix,
    ChaosCoefficients,
    HermMatrix,
    RectMatrix,
    assemble_block_G,
    blocks_from_flat,
    gram_trace_gap,
    hermitian_dilation,
    is_psd,
    schatten_norm,
    singular_values,
    spectral_norm,
    variance_proxies,
)

finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)


@settings(max_examples=200, deadline=None)
@given(A=arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 4)), elements=finite))
def test_dilation_preserves_spectral_norm(A):
    D = hermitian_dilation(A)
    expected = float(np.linalg.norm(A, 2))
    assert abs(spectral_norm(D) - expected) <= 1e-10 * max(1.0, expected)


@settings(max_examples=100, deadline=None)
@given(A=arrays(np.float64, (3, 2), elements=finite))
def test_dilation_square_is_block_diagonal(A):
    D = hermitian_dilation(A).entries
    square = D @ D
    np.testing.assert_allclose(square[:3, :3], A @ A.T, atol=1e-9)
    np.testing.assert_allclose(square[3:, 3:], A.T @ A, atol=1e-9)
    np.testing.assert_allclose(square[:3, 3:], 0.0, atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(M=arrays(np.float64, (3, 3), elements=finite))
def test_herm_matrix_from_symmetrized_input(M):
    S = M + M.T
    H = HermMatrix(S)
    np.testing.assert_allclose(H.entries, S)
    assert H.dim == 3


def test_herm_matrix_rejects_asymmetric():
    with pytest.raises(InvalidInputError):
        HermMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_herm_matrix_rejects_non_finite():
    with pytest.raises(InvalidInputError):
        HermMatrix(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_herm_matrix_symmetrizes_tiny_asymmetry():
    M = np.array([[1.0, 2.0], [2.0 + 1e-14, 3.0]])
    H = HermMatrix(M)
    assert H.entries[0, 1] == H.entries[1, 0]


def test_spectral_and_schatten_norms_of_diagonal():
    D = np.diag([3.0, -5.0])
    assert spectral_norm(D) == pytest.approx(5.0)
    assert schatten_norm(D, 1) == pytest.approx(8.0)
    assert schatten_norm(D, 2) == pytest.approx(math.sqrt(34.0))
    assert schatten_norm(D, math.inf) == pytest.approx(5.0)
    with pytest.raises(InvalidInputError):
        schatten_norm(D, 0.5)


def test_rectangular_singular_values(rng):
    A = rng.standard_normal((4, 2))
    np.testing.assert_allclose(singular_values(RectMatrix(A)), np.linalg.svd(A, compute_uv=False), atol=1e-10)


def test_complex_hermitian_norm():
    M = np.array([[0.0, 1j], [-1j, 0.0]])
    assert spectral_norm(HermMatrix(M)) == pytest.approx(1.0)


def test_chaos_coefficients_validation():
    blocks = np.zeros((2, 2, 1, 1))
    blocks[0, 0] = 1.0
    with pytest.raises(InvalidInputError):
        ChaosCoefficients(blocks)
    with pytest.raises(InvalidInputError):
        ChaosCoefficients(np.zeros((1, 1, 2, 2)))
    assert ChaosCoefficients.zeros(3, 2).n == 3


def test_scalar_two_index_proxies():
    a = 1.7
    blocks = np.zeros((2, 2, 1, 1))
    blocks[0, 1] = blocks[1, 0] = a
    proxies = variance_proxies(blocks)
    assert proxies.gg_star_norm == pytest.approx(a ** 2)
    assert proxies.sum_sq_norm == pytest.approx(2 * a ** 2)
    assert proxies.row_sum_total == pytest.approx(2 * a ** 2)


def test_variance_proxy_invariants(coefficients):
    proxies = variance_proxies(coefficients)
    assert proxies.check_invariants()
    assert proxies.gg_star_norm <= proxies.row_sum_total + 1e-9


def test_gram_trace_matches_square_trace(coefficients):
    assert gram_trace_gap(coefficients) < 1e-12


def test_block_flat_round_trip(coefficients):
    G = assemble_block_G(coefficients)
    np.testing.assert_array_equal(blocks_from_flat(G.flat(), G.n), G.blocks)
    assert G.is_self_adjoint()


def test_block_matrix_shape_checks():
    with pytest.raises(InvalidInputError):
        BlockHermMatrix(np.zeros((2, 3, 1, 1)))


def test_is_psd(rng):
    B = rng.standard_normal((3, 3))
    assert is_psd(B @ B.T)
    assert not is_psd(np.diag([1.0, -1.0]))
