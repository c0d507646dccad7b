import math

import numpy as np
import pytest

from core.errors import InvalidInputError
from core.linalg import variance_proxies
from core.matrix_io import read_coefficients
from example_instances import (
    EXAMPLE_NAMES,
    build_example,
    build_example1,
    build_example2,
    build_polynomial_chaos,
    pair_swap_matrix,
)
from ustat import DiscreteDistribution, KernelTable, degeneracy_check


@pytest.mark.parametrize("n", range(3, 9))
def test_example1_proxies(n):
    inst = build_example1(n, n)
    proxies = variance_proxies(inst.coefficients)
    assert proxies.sum_sq_norm == pytest.approx(inst.expected["sum_sq_norm"], rel=1e-12)
    assert proxies.sum_sq_norm == pytest.approx(2 * (n - 1), rel=1e-12)
    assert proxies.gg_star_norm >= (n - 2) * n - 1e-9


def test_example1_accepts_rotated_basis(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    proxies = variance_proxies(build_example1(4, 5, basis=Q).coefficients)
    assert proxies.sum_sq_norm == pytest.approx(6.0, rel=1e-10)


@pytest.mark.parametrize("n", [4, 6, 8])
def test_example2_proxies(n):
    inst = build_example2(n, n)
    proxies = variance_proxies(inst.coefficients)
    assert proxies.gg_star_norm == pytest.approx(1.0, rel=1e-12)
    assert proxies.sum_sq_norm == pytest.approx(2.0, rel=1e-12)
    assert proxies.row_sum_total == pytest.approx(float(n), rel=1e-12)
    assert inst.expected["separation"] == pytest.approx(math.sqrt(n))


def test_pair_swap_matrix_is_orthogonal():
    C = pair_swap_matrix(6)
    np.testing.assert_array_equal(C @ C.T, np.eye(6))
    assert np.all(np.diag(C) == 0.0)
    with pytest.raises(InvalidInputError):
        pair_swap_matrix(5)


def test_size_checks():
    with pytest.raises(InvalidInputError):
        build_example2(5, 6)
    with pytest.raises(InvalidInputError):
        build_example1(4, 3)
    with pytest.raises(InvalidInputError):
        build_example1(3, 3, basis=np.ones((3, 3)))
    with pytest.raises(InvalidInputError):
        build_example("example3", 4, 4)


def test_rademacher_polynomial_chaos():
    A = build_example1(3, 3).coefficients
    inst = build_polynomial_chaos(A, DiscreteDistribution.rademacher(), q=2.0)
    assert isinstance(inst.kernel(), KernelTable)
    assert inst.expected["max_power_moment"] == pytest.approx(1.0)
    assert inst.expected["r"] == pytest.approx(max(2.0, math.log(3 * math.e)))
    assert inst.expected["var_term"] == pytest.approx(2.0)
    assert degeneracy_check(inst.kernel(), inst.distribution())


def test_polynomial_chaos_max_moment_for_three_point_law():
    law = DiscreteDistribution.from_values([-math.sqrt(2.0), 0.0, math.sqrt(2.0)], [0.25, 0.5, 0.25])
    inst = build_polynomial_chaos(build_example1(2, 2).coefficients, law, q=1.0)
    # P(max |X_i| = sqrt 2) = 1 - 1/4 over two copies
    assert inst.expected["max_power_moment"] == pytest.approx(0.75 * 2.0)


def test_polynomial_chaos_needs_standardized_law():
    A = build_example1(3, 3).coefficients
    with pytest.raises(InvalidInputError):
        build_polynomial_chaos(A, DiscreteDistribution.from_values([0.0, 1.0], [0.5, 0.5]))
    with pytest.raises(InvalidInputError):
        build_polynomial_chaos(A, DiscreteDistribution.from_values([-2.0, 2.0], [0.5, 0.5]))


def test_exports(tmp_path):
    inst = build_example("example2", 4, 4)
    path = inst.export(tmp_path / "ex2")
    np.testing.assert_array_equal(read_coefficients(path), inst.coefficients.blocks)
    chaos = build_example("polynomial-chaos", 3, 3)
    H, P = KernelTable.from_directory(chaos.export(tmp_path / "chaos"))
    np.testing.assert_array_equal(H.values, chaos.kernel().values)
    assert P.labels == chaos.distribution().labels


def test_example_names():
    assert EXAMPLE_NAMES == ("example1", "example2", "polynomial-chaos")
