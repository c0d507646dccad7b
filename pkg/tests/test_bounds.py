import math

import numpy as np
import pytest

from bounds import (
    CALIBRATED,
    COROLLARY,
    ESTIMATED,
    FLOOR,
    FULL,
    IDENTITY,
    LOWER,
    RECORDED,
    REFINED,
    VERIFIED,
    VIOLATED,
    BoundConstants,
    BoundReport,
    SummandLaw,
    bernstein_moment_bound,
    bernstein_parameters,
    bernstein_tail_bound,
    concentration_tail,
    expectation_bounds_comparison,
    lower_bound_terms,
    moment_to_tail,
    rosenthal_moment_bound,
    rosenthal_psd_bound,
    sum_max_bound,
    tail_to_moment,
    theorem_moment_bound,
)
from core.errors import ContractError, InvalidInputError
from core.linalg import ChaosCoefficients
from example_instances import build_example2
from ustat import (
    COUPLED,
    DECOUPLED,
    DiscreteDistribution,
    KernelExpectations,
    exact_U_moment,
    product_kernel,
    random_symmetric_kernel,
)


def report(value, direction="upper"):
    return BoundReport(bound_name="b", q_or_t=1.0, value=value, direction=direction)


class TestBoundReport:

    def test_upper_verdicts(self):
        ok = report(2.0).with_oracle(1.0)
        assert ok.verdict == VERIFIED
        assert ok.ratio == pytest.approx(2.0)
        assert report(1.0).with_oracle(2.0).verdict == VIOLATED
        assert report(1.0).with_oracle(1.0 + 1e-12).verdict == VERIFIED

    def test_estimated_oracle_uses_three_sigma(self):
        assert report(1.0).with_oracle(1.2, exact=False, stderr=0.1).verdict == ESTIMATED
        assert report(1.0).with_oracle(1.4, exact=False, stderr=0.1).verdict == VIOLATED

    def test_floor_and_identity(self):
        assert report(1.0, FLOOR).with_oracle(2.0).verdict == VERIFIED
        assert report(3.0, FLOOR).with_oracle(2.0).verdict == VIOLATED
        assert report(1.0, IDENTITY).with_oracle(1.0 + 1e-12).verdict == VERIFIED
        assert report(1.0, IDENTITY).with_oracle(1.1).verdict == VIOLATED

    def test_lower_and_calibrated_are_recorded(self):
        assert report(5.0, LOWER).with_oracle(1.0).verdict == RECORDED
        calibrated = report(0.5, CALIBRATED).with_oracle(1.0)
        assert calibrated.verdict == RECORDED
        assert calibrated.ratio == pytest.approx(0.5)

    def test_zero_oracle_has_no_ratio(self):
        assert report(1.0).with_oracle(0.0).ratio is None

    def test_value_must_be_finite_and_nonnegative(self):
        with pytest.raises(InvalidInputError):
            report(-1.0)
        with pytest.raises(InvalidInputError):
            report(math.inf)

    def test_to_dict_lists_notes(self):
        d = report(1.0).with_note("x").to_dict()
        assert d["notes"] == ["x"]


def test_constants_convention():
    constants = BoundConstants()
    assert constants.bernstein_c2() == pytest.approx(2 * math.sqrt(2) * 4.0)
    assert BoundConstants(bernstein_moment_c2=3.0).bernstein_c2() == 3.0
    assert constants.convention()["bernstein_moment_c2"] == pytest.approx(8 * math.sqrt(2))


@pytest.mark.parametrize("q", [1.0, 2.0])
def test_theorem_variants_dominate_both_oracles(degenerate_kernel, q):
    H, P = degenerate_kernel
    coupled = exact_U_moment(H, P, q, COUPLED)
    decoupled = exact_U_moment(H, P, q, DECOUPLED)
    for variant in (FULL, COROLLARY, REFINED):
        bound = theorem_moment_bound(H, P, q, variant)
        assert bound.variant == variant
        assert bound.r_convention == "max(q,log(ed))"
        assert bound.with_moment_oracle(coupled).verdict == VERIFIED
        assert bound.with_moment_oracle(decoupled).verdict == VERIFIED


def test_theorem_contract_and_variant_checks(rng, degenerate_kernel):
    H = random_symmetric_kernel(3, 2, 2, rng)
    P = DiscreteDistribution.from_values([0.0, 1.0], [0.5, 0.5])
    with pytest.raises(ContractError, match="degeneracy_check"):
        theorem_moment_bound(H, P, 1.0)
    H, P = degenerate_kernel
    with pytest.raises(InvalidInputError):
        theorem_moment_bound(H, P, 1.0, "sharpest")


def test_lower_bound_is_recorded(degenerate_kernel):
    H, P = degenerate_kernel
    lower = lower_bound_terms(H, P, 1.0, BoundConstants(lower_bound_c=0.5))
    assert lower.direction == LOWER
    assert set(lower.constituent_terms) == {"max", "gg_star", "sum_sq"}
    assert lower.value == pytest.approx(0.5 * sum(lower.constituent_terms.values()))
    assert lower.with_moment_oracle(exact_U_moment(H, P, 1.0, COUPLED)).verdict == RECORDED


def random_summands(rng, m, s, d, psd=False):
    out = []
    for _ in range(m):
        B = rng.standard_normal((s, d, d))
        values = B @ np.swapaxes(B, -1, -2) if psd else B + np.swapaxes(B, -1, -2)
        out.append(SummandLaw(values, rng.dirichlet(np.ones(s))))
    return out


@pytest.mark.parametrize("q", [1.0, 2.0])
def test_rosenthal_bounds(rng, q):
    for _ in range(5):
        assert rosenthal_moment_bound(random_summands(rng, 4, 3, 2), q).verdict == VERIFIED
        assert rosenthal_psd_bound(random_summands(rng, 4, 3, 2, psd=True), q).verdict == VERIFIED


def test_rosenthal_non_integer_note(rng):
    bound = rosenthal_moment_bound(random_summands(rng, 3, 2, 2), 1.5)
    assert bound.notes and "non-integer" in bound.notes[0]


def test_rosenthal_psd_rejects_indefinite_summands():
    Y = [SummandLaw(np.array([np.diag([1.0, -1.0])]), np.array([1.0]))]
    with pytest.raises(InvalidInputError):
        rosenthal_psd_bound(Y, 1.0)


def test_summand_law_checks():
    with pytest.raises(InvalidInputError):
        SummandLaw(np.array([[[0.0, 1.0], [0.0, 0.0]]]), np.array([1.0]))
    law = SummandLaw.rademacher(np.eye(2))
    np.testing.assert_allclose(law.mean(), 0.0)
    assert law.size == 2 and law.d == 2


def test_bernstein_parameters_for_rademacher_series():
    A = [np.diag([1.0, 0.0]), np.diag([0.0, 2.0])]
    sigma2, B, d = bernstein_parameters([SummandLaw.rademacher(a) for a in A])
    assert sigma2 == pytest.approx(4.0)
    assert B == pytest.approx(2.0)
    assert d == 2


def test_bernstein_tail_formula():
    tail = bernstein_tail_bound(4.0, 1.0, 3, 2.0)
    assert tail.threshold == pytest.approx(4 * math.sqrt(2) + 8.0 / 3.0)
    assert tail.prob == pytest.approx(6 * math.exp(-2.0))
    assert bernstein_tail_bound(4.0, 1.0, 3, 0.1).prob == 1.0
    with pytest.raises(InvalidInputError):
        bernstein_tail_bound(4.0, 1.0, 3, 0.0)


@pytest.mark.parametrize("q", [1.0, 2.0, 3.0])
def test_bernstein_moment_dominates(rng, q):
    Y = random_summands(rng, 4, 3, 2)
    sigma2, B, d = bernstein_parameters(Y)
    bound = bernstein_moment_bound(sigma2, B, d, q, summands=Y)
    assert bound.constituent_terms["C2"] == pytest.approx(8 * math.sqrt(2))
    assert bound.verdict == VERIFIED


def test_moment_tail_conversions():
    assert moment_to_tail(1.0, 0.0, 2.0, 0.0, 0.0, 3.0) == pytest.approx(math.e * 7.0)
    assert tail_to_moment(1.0, 2.0, 3.0, 4.0, C=2.0) == pytest.approx(2.0 * (1.0 + 4.0 + 12.0))
    with pytest.raises(InvalidInputError):
        moment_to_tail(1.0, 0.0, 0.0, 0.0, 0.0, 1.5)
    with pytest.raises(InvalidInputError):
        tail_to_moment(-1.0, 0.0, 0.0, 2.0)


def test_sum_max(rng):
    laws = [DiscreteDistribution.from_values(rng.standard_normal(3), rng.dirichlet(np.ones(3))) for _ in range(4)]
    for q in (1.5, 2.0, 3.0):
        for alpha in (0.0, 0.5, 1.0):
            assert sum_max_bound(laws, q, alpha).verdict == VERIFIED
    with pytest.raises(InvalidInputError):
        sum_max_bound(laws, 1.0, 0.0)


def identical_kernel(d=2, n=3):
    A = np.diag(np.arange(1.0, d + 1))
    blocks = np.broadcast_to(A, (n, n, d, d)).copy()
    blocks[np.arange(n), np.arange(n)] = 0.0
    P = DiscreteDistribution.rademacher()
    return product_kernel(ChaosCoefficients(blocks), P), P, float(d)


def test_concentration_tail():
    H, P, M = identical_kernel()
    tail = concentration_tail(H, P, M, 2.0)
    assert tail.prob == pytest.approx(math.exp(-2.0))
    assert tail.threshold > 0
    with pytest.raises(InvalidInputError):
        concentration_tail(H, P, M, 0.5)
    with pytest.raises(InvalidInputError):
        concentration_tail(H, P, 0.5 * M, 2.0)


def test_concentration_tail_needs_identical_kernels(degenerate_kernel):
    H, P = degenerate_kernel
    with pytest.raises(ContractError):
        concentration_tail(H, P, 10.0 * H.max_norm(), 2.0)


@pytest.mark.parametrize("n", [4, 6])
def test_expectation_separation_on_example2(n):
    inst = build_example2(n, n)
    comparison = expectation_bounds_comparison(inst.kernel(), inst.distribution())
    assert comparison.separation == pytest.approx(math.sqrt(n), rel=1e-6)
    assert comparison.exact
    assert comparison.terms["T_row"] == pytest.approx(math.sqrt(n))


@pytest.mark.parametrize("n", [4, 8, 16])
def test_row_sum_assembly_exceeds_gg_assembly_on_example2(n):
    inst = build_example2(n, n)
    H, P = inst.kernel(), inst.distribution()
    ex = KernelExpectations(H, P, cap=4096, replicas=200, seed=1)
    comparison = expectation_bounds_comparison(H, P, expectations=ex)
    L = math.log(math.e * n)
    assert comparison.mom1 == pytest.approx(L * (1 + math.sqrt(2) + math.sqrt(L)), rel=1e-9)
    assert comparison.mom3 == pytest.approx(L * math.sqrt(n) * (1 + math.sqrt(L)), rel=1e-9)
    assert comparison.mom1 < comparison.mom3
    assert comparison.exact == (n == 4)
