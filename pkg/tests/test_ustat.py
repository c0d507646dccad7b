import itertools

import numpy as np
import pytest

from chaos import exact_chaos_moment
from core.errors import CapacityError, InvalidInputError
from ustat import (
    COUPLED,
    DECOUPLED,
    DiscreteDistribution,
    KernelExpectations,
    KernelTable,
    SampleConfig,
    assemble_Gtilde,
    degeneracy_check,
    e2_gg_star,
    evaluate_U,
    exact_U_moment,
    mc_U_moment,
    pi_project,
    product_kernel,
    random_distribution,
    random_symmetric_kernel,
    symmetrized_U_moment,
)

from .conftest import symmetric_coefficients


def test_distribution_validation():
    with pytest.raises(InvalidInputError):
        DiscreteDistribution.from_values([0.0, 1.0], [0.5, 0.6])
    with pytest.raises(InvalidInputError):
        DiscreteDistribution(labels=("a", "a"), probs=np.array([0.5, 0.5]))
    with pytest.raises(InvalidInputError):
        DiscreteDistribution(labels=("a",), probs=np.array([0.5, 0.5]))


def test_distribution_moments():
    law = DiscreteDistribution.from_values([-2.0, 0.0, 2.0], [0.25, 0.5, 0.25])
    assert law.mean() == pytest.approx(0.0)
    assert law.moment(2) == pytest.approx(2.0)
    restored = DiscreteDistribution.from_manifest(law.to_manifest())
    assert restored.labels == law.labels
    np.testing.assert_array_equal(restored.probs, law.probs)


def test_kernel_requires_permutation_symmetry(rng):
    values = rng.standard_normal((2, 2, 2, 2, 1, 1))
    with pytest.raises(InvalidInputError):
        KernelTable(values)


def test_kernel_diagonal_is_zeroed(rng):
    H = random_symmetric_kernel(3, 2, 2, rng)
    assert np.all(np.asarray(H.values)[np.arange(3), np.arange(3)] == 0.0)
    assert (H.n, H.s, H.d) == (3, 2, 2)


def test_hoeffding_reconstruction_and_degeneracy(rng):
    for _ in range(20):
        H = random_symmetric_kernel(3, 2, 3, rng)
        P = random_distribution(3, rng)
        decomposition = pi_project(H, P)
        scale = max(1.0, H.max_norm())
        residual = np.max(np.abs(decomposition.reconstruct() - np.asarray(H.values)))
        assert residual <= 1e-12 * scale
        assert degeneracy_check(decomposition.pi2, P, 1e-9)


def test_raw_kernel_is_not_degenerate(rng):
    H = random_symmetric_kernel(3, 2, 2, rng)
    P = random_distribution(2, rng)
    assert not degeneracy_check(H, P, 1e-9)


def brute_U_moment(H, P, q, mode):
    n, s = H.n, H.s
    total = 0.0
    for x1 in itertools.product(range(s), repeat=n):
        w1 = np.prod([P.probs[v] for v in x1])
        seconds = [None] if mode == COUPLED else list(itertools.product(range(s), repeat=n))
        for x2 in seconds:
            w2 = 1.0 if x2 is None else np.prod([P.probs[v] for v in x2])
            U = evaluate_U(H, SampleConfig(x1, x2)).entries
            total += w1 * w2 * np.max(np.abs(np.linalg.eigvalsh(U))) ** (2 * q)
    return total ** (1.0 / (2 * q))


@pytest.mark.parametrize("mode", [COUPLED, DECOUPLED])
def test_exact_moment_matches_brute_force(degenerate_kernel, mode):
    H, P = degenerate_kernel
    for q in (1.0, 2.0):
        assert exact_U_moment(H, P, q, mode).value == pytest.approx(brute_U_moment(H, P, q, mode), rel=1e-12)


def test_decoupled_product_kernel_equals_chaos(rng, rademacher):
    for n, d in [(2, 1), (3, 2), (4, 3)]:
        A = symmetric_coefficients(rng, n, d)
        H = product_kernel(A, rademacher)
        for q in (1.0, 2.0):
            decoupled = exact_U_moment(H, rademacher, q, DECOUPLED).value
            chaos = exact_chaos_moment(A, q).value
            assert abs(decoupled - chaos) <= 1e-12 * max(1.0, chaos)


def test_product_kernel_needs_index_symmetry(rng, rademacher):
    blocks = np.zeros((2, 2, 1, 1))
    blocks[0, 1] = 1.0
    blocks[1, 0] = 2.0
    with pytest.raises(InvalidInputError):
        product_kernel(blocks, rademacher)


def test_enumeration_cap(degenerate_kernel):
    H, P = degenerate_kernel
    with pytest.raises(CapacityError):
        exact_U_moment(H, P, 1.0, DECOUPLED, cap=16)
    with pytest.raises(InvalidInputError):
        exact_U_moment(H, P, 1.0, "sideways")


def test_monte_carlo_moment(degenerate_kernel):
    H, P = degenerate_kernel
    first = mc_U_moment(H, P, 1.0, COUPLED, replicas=4000, seed=11, block_size=1000)
    assert first == mc_U_moment(H, P, 1.0, COUPLED, replicas=4000, seed=11, block_size=1000)
    exact = exact_U_moment(H, P, 1.0, COUPLED).value
    assert abs(first.value - exact) <= 6 * first.stderr + 1e-9 * exact


def test_symmetrized_moment_capacity(degenerate_kernel):
    H, P = degenerate_kernel
    assert symmetrized_U_moment(H, P, 2.0).value > 0
    with pytest.raises(CapacityError):
        symmetrized_U_moment(H, P, 2.0, cap=100)


def test_evaluate_U_checks_sample_length(degenerate_kernel):
    H, _ = degenerate_kernel
    with pytest.raises(InvalidInputError):
        evaluate_U(H, SampleConfig((0, 1)))
    with pytest.raises(InvalidInputError):
        SampleConfig((0, 1, 0), (0, 1))


def test_e2_gg_star_matches_expectation_of_gtilde(degenerate_kernel):
    H, P = degenerate_kernel
    x1 = (0, 1, 1)
    expected = np.zeros((H.n * H.d, H.n * H.d))
    for x2 in itertools.product(range(H.s), repeat=H.n):
        w = np.prod([P.probs[v] for v in x2])
        flat = assemble_Gtilde(H, SampleConfig(x1, x2)).flat()
        expected += w * flat @ flat.T
    np.testing.assert_allclose(e2_gg_star(H, P, x1).entries, expected, atol=1e-12)


def test_gtilde_needs_decoupled_sample(degenerate_kernel):
    H, _ = degenerate_kernel
    with pytest.raises(InvalidInputError):
        assemble_Gtilde(H, SampleConfig((0, 0, 0)))


def test_expectations_fall_back_to_monte_carlo(degenerate_kernel):
    H, P = degenerate_kernel
    exact = KernelExpectations(H, P)
    sampled = KernelExpectations(H, P, cap=4, replicas=2000, seed=3)
    fn = lambda X1: exact.e2_gg_star_norms(X1)
    first = exact.over_first_sample(fn, 1.0)
    estimate = sampled.over_first_sample(fn, 1.0)
    assert first.exact and first.stderr == 0.0
    assert not estimate.exact
    assert abs(estimate.value - first.value) <= 6 * estimate.stderr + 1e-9


def test_closed_form_row_terms(degenerate_kernel):
    H, P = degenerate_kernel
    ex = KernelExpectations(H, P)
    rows = ex.row_norms()
    assert rows.shape == (H.n, H.s)
    assert ex.row_sum() == pytest.approx(ex.row_power_sum(1.0))
    assert ex.row_max_power(1.0) <= ex.row_sum() + 1e-12
    squares = np.asarray(H.values) @ np.asarray(H.values)
    brute = sum(P.probs[x] * P.probs[y] * np.max(np.abs(np.linalg.eigvalsh(squares[i, j, x, y])))
                for i in range(H.n) for j in range(H.n) for x in range(H.s) for y in range(H.s))
    assert ex.pair_power_sum(1.0) == pytest.approx(brute, rel=1e-12)
