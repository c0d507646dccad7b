import math

import numpy as np
import pytest

from adamczak import (
    FULL,
    SIMPLIFIED,
    AdamczakTerms,
    SphereObjective,
    adamczak_moment_tail,
    adamczak_terms,
    calibrate_constant,
    mean_norm_estimate,
    sphere_objective,
    sphere_sup_estimate,
)
from bounds import CALIBRATED, RECORDED, BoundReport, expectation_bounds_comparison
from core.errors import ContractError, InvalidInputError
from ustat import COUPLED, DiscreteDistribution, exact_U_moment, random_symmetric_kernel

SEARCH = dict(restarts=4, max_iter=60, threads=1)


def test_sphere_search_on_rank_one_form():
    objective = SphereObjective(matrices=np.array([np.diag([1.0, 0.0])]), weights=np.array([1.0]), relaxation_sq=1.0)
    result = sphere_sup_estimate(objective, restarts=2, threads=1)
    assert result.sup_estimate == pytest.approx(1.0, abs=1e-10)
    assert result.relaxation == pytest.approx(1.0)
    assert abs(abs(result.maximizer[0]) - 1.0) < 1e-6


def test_sphere_gradient_matches_finite_differences(rng):
    B = rng.standard_normal((3, 3, 3))
    objective = SphereObjective(matrices=B + np.swapaxes(B, -1, -2), weights=np.array([0.2, 0.3, 0.5]),
                                relaxation_sq=0.0)
    phi = rng.standard_normal(3)
    h = 1e-6
    numeric = np.array([(objective.value(phi + h * e) - objective.value(phi - h * e)) / (2 * h) for e in np.eye(3)])
    np.testing.assert_allclose(objective.gradient(phi), numeric, rtol=1e-6, atol=1e-6)


def test_sphere_estimate_stays_below_relaxation(degenerate_kernel):
    H, P = degenerate_kernel
    objective = sphere_objective(H, P)
    result = sphere_sup_estimate(objective, restarts=4, max_iter=60, threads=1)
    assert 0.0 < result.sup_estimate <= result.relaxation * (1 + 1e-12)
    assert np.linalg.norm(result.maximizer) == pytest.approx(1.0)


def test_complex_kernel_uses_real_form(rng):
    H = random_symmetric_kernel(2, 2, 1, rng, complex_valued=True)
    objective = sphere_objective(H, DiscreteDistribution.from_values([0.0], [1.0]))
    assert objective.dim == 4
    assert sphere_sup_estimate(objective, restarts=2, threads=1).sup_estimate <= objective.relaxation_sq ** 0.5 + 1e-12


@pytest.mark.parametrize("variant", [FULL, SIMPLIFIED])
def test_terms_are_consistent(degenerate_kernel, variant):
    H, P = degenerate_kernel
    terms = adamczak_terms(H, P, 2.0, variant, **SEARCH)
    assert terms.variant == variant
    assert terms.exact
    assert terms.B <= terms.B_relaxation * (1 + 1e-12)
    assert min(terms.A, terms.B, terms.Gamma, terms.D) >= 0.0
    assert terms.mean_norm_estimate == pytest.approx(expectation_bounds_comparison(H, P).mom1)
    assert terms.details["log_ed"] == pytest.approx(math.log(math.e * H.d))


def test_mean_norm_estimate_scales_with_constant(degenerate_kernel):
    H, P = degenerate_kernel
    assert mean_norm_estimate(H, P, mom1_c=3.0) == pytest.approx(3.0 * mean_norm_estimate(H, P))


def test_terms_reject_bad_input(rng, degenerate_kernel):
    H, P = degenerate_kernel
    with pytest.raises(InvalidInputError):
        adamczak_terms(H, P, 1.0, "coarse", **SEARCH)
    raw = random_symmetric_kernel(3, 2, 2, rng)
    with pytest.raises(ContractError):
        adamczak_terms(raw, DiscreteDistribution.from_values([0.0, 1.0], [0.5, 0.5]), 1.0, **SEARCH)
    with pytest.raises(InvalidInputError):
        AdamczakTerms(A=-1.0, B=0.0, Gamma=0.0, D=0.0, variant=FULL, mean_norm_estimate=0.0)


def test_moment_and_tail_assembly():
    terms = AdamczakTerms(A=1.0, B=2.0, Gamma=3.0, D=4.0, variant=FULL, mean_norm_estimate=5.0,
                          B_relaxation=2.5, gamma_proof_form=6.0)
    moment = adamczak_moment_tail(terms, None, 4.0, C=2.0)
    assert moment.value == pytest.approx(2.0 * (5.0 + 2.0 * 1.0 + 4.0 * 2.0 + 8.0 * 3.0 + 16.0 * 4.0))
    assert moment.direction == CALIBRATED
    assert moment.notes == ("Gamma proof form / stated form = 2",)
    tail = adamczak_moment_tail(terms, 0.0, 2.0, tail=True)
    assert tail.bound_name == "adamczak_tail"
    assert tail.value == pytest.approx(math.sqrt(2.0) + 4.0 + 2.0 ** 1.5 * 3.0 + 16.0)
    with pytest.raises(InvalidInputError):
        adamczak_moment_tail(terms, None, 1.5, tail=True)


def test_assembly_against_oracle_is_recorded(degenerate_kernel):
    H, P = degenerate_kernel
    terms = adamczak_terms(H, P, 1.0, **SEARCH)
    report = adamczak_moment_tail(terms, None, 1.0).with_moment_oracle(exact_U_moment(H, P, 1.0, COUPLED))
    assert report.verdict == RECORDED
    assert report.ratio is not None


def calibrated(value, oracle, c=1.0):
    report = BoundReport(bound_name="adamczak_moment", q_or_t=1.0, value=value, direction=CALIBRATED,
                         constants={"adamczak_c": c})
    return report if oracle is None else report.with_oracle(oracle)


def test_calibrate_constant():
    assert calibrate_constant([calibrated(2.0, 3.0), calibrated(4.0, 2.0)]) == pytest.approx(1.5)
    assert calibrate_constant([calibrated(4.0, 3.0, c=2.0)]) == pytest.approx(1.5)
    assert calibrate_constant([calibrated(1.0, None)]) == 0.0
    assert calibrate_constant([calibrated(0.0, 1.0)]) == math.inf
