import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bounds import VERIFIED, BoundConstants
from core.errors import CapacityError, ContractError, InvalidInputError
from inequality_tools import (
    block_matrix_check,
    coupled_norm_moment,
    decoupling_check,
    e2_bound_check,
    matrix_khintchine_series,
    schatten_khintchine_chaos,
    schatten_khintchine_series,
    symmetrization_check,
    useful_bound_check,
)
from ustat import COUPLED, DiscreteDistribution, exact_U_moment, random_symmetric_kernel

from .conftest import symmetric_coefficients


def hermitian_terms(rng, n, d):
    B = rng.standard_normal((n, d, d))
    return list(B + np.swapaxes(B, -1, -2))


@pytest.mark.parametrize("n, d", [(1, 1), (3, 2), (5, 3)])
def test_matrix_khintchine_series(rng, n, d):
    for _ in range(5):
        report = matrix_khintchine_series(hermitian_terms(rng, n, d))
        assert report.verdict == VERIFIED
        assert report.ratio >= 1.0


def test_matrix_khintchine_series_cap(rng):
    with pytest.raises(CapacityError):
        matrix_khintchine_series(hermitian_terms(rng, 4, 2), max_terms=3)


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_schatten_khintchine_series(rng, p):
    for _ in range(5):
        B = [rng.standard_normal((2, 3)) for _ in range(4)]
        assert schatten_khintchine_series(B, p).verdict == VERIFIED


@pytest.mark.parametrize("p", [1.0, 2.0])
def test_schatten_khintchine_chaos(rng, p):
    for _ in range(3):
        A = symmetric_coefficients(rng, 3, 2)
        assert schatten_khintchine_chaos(np.asarray(A.blocks), p).verdict == VERIFIED


def test_decoupling_and_symmetrization(degenerate_kernel):
    H, P = degenerate_kernel
    for q in (1.0, 2.0):
        report = decoupling_check(H, P, q)
        assert report.verdict == VERIFIED
        assert report.constants == {"decoupling_c": 4.0}
    symmetrized = symmetrization_check(H, P, 2.0, cap=4096)
    assert symmetrized.verdict == VERIFIED
    with pytest.raises(CapacityError):
        symmetrization_check(H, P, 2.0, cap=4095)


def test_constants_scale_the_reported_value(degenerate_kernel):
    H, P = degenerate_kernel
    base = decoupling_check(H, P, 1.0)
    doubled = decoupling_check(H, P, 1.0, BoundConstants(decoupling_c=8.0))
    assert doubled.value == pytest.approx(2.0 * base.value)


def test_checks_need_degenerate_kernels(rng):
    H = random_symmetric_kernel(3, 2, 2, rng)
    P = DiscreteDistribution.from_values([0.0, 1.0], [0.5, 0.5])
    with pytest.raises(ContractError):
        decoupling_check(H, P, 1.0)
    with pytest.raises(ContractError):
        symmetrization_check(H, P, 1.0)


def test_coupled_norm_moment_matches_u_moment(degenerate_kernel):
    H, P = degenerate_kernel
    for q in (1.0, 1.5):
        assert coupled_norm_moment(H, P, 2 * q) == pytest.approx(exact_U_moment(H, P, q, COUPLED).value, rel=1e-12)


def test_block_matrix_check(rng):
    B = rng.standard_normal((5, 5))
    M = B @ B.T
    for p in (1.0, 2.0, math.inf):
        report = block_matrix_check(M, 2, p)
        assert report.verdict == VERIFIED


def test_block_matrix_check_rejections(rng):
    with pytest.raises(InvalidInputError):
        block_matrix_check(np.diag([1.0, -1.0]), 1)
    with pytest.raises(InvalidInputError):
        block_matrix_check(np.eye(3), 0)
    with pytest.raises(InvalidInputError):
        block_matrix_check(np.ones((2, 3)), 1)


@settings(max_examples=100, deadline=None)
@given(
    B=arrays(np.float64, (4, 3), elements=st.floats(min_value=-5.0, max_value=5.0, allow_nan=False)),
    d1=st.integers(1, 3),
)
def test_block_matrix_lemma_holds_for_gram_matrices(B, d1):
    M = B @ B.T
    M = 0.5 * (M + M.T)
    report = block_matrix_check(M, d1, math.inf)
    assert report.value >= report.oracle_value - 1e-9 * max(1.0, report.oracle_value)


def test_useful_bound(coefficients):
    report = useful_bound_check(coefficients)
    assert report.verdict == VERIFIED
    assert len(report.constituent_terms) == coefficients.n


def test_e2_bound(degenerate_kernel):
    H, P = degenerate_kernel
    for x1 in [(0, 0, 0), (0, 1, 1), (1, 0, 1)]:
        assert e2_bound_check(H, P, x1).verdict == VERIFIED
    with pytest.raises(InvalidInputError):
        e2_bound_check(H, P, (0, 1))
    with pytest.raises(InvalidInputError):
        e2_bound_check(H, P, (0, 1, 5))
