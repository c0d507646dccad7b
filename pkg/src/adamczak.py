#!/usr/bin/env python3
"""
Adamczak-type moment and tail assembly for degenerate matrix U-statistics.

    (E||U_n||^{2q})^{1/2q} <= C (E||U_n|| + sqrt(q) A + q B + q^{3/2} Gamma + q^2 D)

A, B, Gamma and D come in a full and a simplified form.  B needs the
supremum over unit vectors z of sum E (z* H z)^2, estimated here by
projected gradient ascent on the sphere and always reported next to its
closed-form relaxation ||sum E H^2||^{1/2}.  C is left open by the inequality
and is calibrated against enumeration oracles instead of asserted.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from bounds import CALIBRATED, BoundReport, expectation_bounds_comparison, require_degenerate
from core.errors import InvalidInputError
from core.linalg import batched_spectral_norm
from ustat import DiscreteDistribution, KernelExpectations, KernelTable
from utils.helpers import block_rng, inputs_digest, run_blocks
from utils.validators import validate_moment_order, validate_nonnegative, validate_positive_int

logger = logging.getLogger(__name__)

FULL = "full"
SIMPLIFIED = "simplified"
ADAMCZAK_VARIANTS = (FULL, SIMPLIFIED)

DEFAULT_RESTARTS = 32
DEFAULT_GRADIENT_TOL = 1e-10
DEFAULT_MAX_ITER = 500


@dataclass(frozen=True)
class SphereObjective:
    """f(phi) = sum_k w_k (phi^T M_k phi)^2 on real unit vectors.

    Complex d x d matrices are carried in their real 2d x 2d form
    [[Re M, -Im M], [Im M, Re M]], for which z* M z = phi^T M_r phi with
    phi = (Re z, Im z).
    """
    matrices: np.ndarray
    weights: np.ndarray
    relaxation_sq: float

    @property
    def dim(self) -> int:
        return self.matrices.shape[-1]

    def value(self, phi: np.ndarray) -> float:
        forms = np.einsum("a,kab,b->k", phi, self.matrices, phi)
        return float(np.dot(self.weights, forms ** 2))

    def gradient(self, phi: np.ndarray) -> np.ndarray:
        Mphi = np.einsum("kab,b->ka", self.matrices, phi)
        forms = Mphi @ phi
        return 4.0 * np.einsum("k,ka->a", self.weights * forms, Mphi)


def _real_form(stack: np.ndarray) -> np.ndarray:
    if not np.iscomplexobj(stack):
        return np.asarray(stack, dtype=np.float64)
    re, im = stack.real, stack.imag
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def sphere_objective(H: KernelTable, P: DiscreteDistribution) -> SphereObjective:
    """Objective for sup_z sum_{(i1,i2)} E (z* H_{i1,i2}(X1, X2) z)^2 over independent X1, X2"""
    n, s, d = H.n, H.s, H.d
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    stack = np.asarray(H.values)[tuple(np.array(pairs).T)].reshape(len(pairs) * s * s, d, d)
    weights = np.tile(np.outer(P.probs, P.probs).ravel(), len(pairs))
    keep = weights > 0
    stack, weights = stack[keep], weights[keep]
    relaxation_sq = float(batched_spectral_norm(np.einsum("k,kab,kbc->ac", weights, stack, stack)))
    return SphereObjective(matrices=_real_form(stack), weights=weights, relaxation_sq=relaxation_sq)


class SphereSupremum(NamedTuple):
    sup_estimate: float
    relaxation: float
    maximizer: np.ndarray
    iterations: int


def _ascend(objective: SphereObjective, gradient_tol: float, max_iter: int,
            start: np.ndarray) -> Tuple[float, np.ndarray, int]:
    phi = start / np.linalg.norm(start)
    f = objective.value(phi)
    for it in range(max_iter):
        g = objective.gradient(phi)
        tangent = g - np.dot(phi, g) * phi
        norm = np.linalg.norm(tangent)
        if norm <= gradient_tol * max(1.0, f):
            return f, phi, it
        direction = tangent / norm
        # exact search along the great circle through phi in the ascent direction
        along = lambda theta: -objective.value(math.cos(theta) * phi + math.sin(theta) * direction)
        res = minimize_scalar(along, bounds=(0.0, math.pi / 2), method="bounded", options={"xatol": 1e-14})
        if -res.fun <= f:
            return f, phi, it
        phi = math.cos(res.x) * phi + math.sin(res.x) * direction
        phi /= np.linalg.norm(phi)
        f = -res.fun
    return f, phi, max_iter


def sphere_sup_estimate(objective: SphereObjective, restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                        gradient_tol: float = DEFAULT_GRADIENT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                        threads: int = None) -> SphereSupremum:
    """Best of `restarts` random starts plus the eigenvectors of sum w M^2.

    The estimate is a value attained on the sphere, so it never exceeds the
    supremum and hence the relaxation.
    """
    restarts = validate_positive_int(restarts, "restarts", minimum=0)
    relaxation = math.sqrt(max(objective.relaxation_sq, 0.0))
    if objective.matrices.shape[0] == 0:
        return SphereSupremum(0.0, relaxation, np.eye(objective.dim)[0], 0)

    rng = block_rng(seed, 0)
    squares = np.einsum("k,kab,kbc->ac", objective.weights, objective.matrices, objective.matrices)
    _, vecs = np.linalg.eigh(squares)
    starts = [vecs[:, j] for j in range(objective.dim)[::-1]]
    starts.extend(rng.standard_normal((restarts, objective.dim)))

    results = run_blocks(partial(_ascend, objective, gradient_tol, max_iter), starts, threads)
    best_f, best_phi, iterations = max(results, key=lambda r: r[0])
    sup = math.sqrt(max(best_f, 0.0))
    logger.debug("sphere ascent over %d starts: sup %.12g, relaxation %.12g", len(starts), sup, relaxation)
    return SphereSupremum(sup, relaxation, best_phi, iterations)


@dataclass(frozen=True)
class AdamczakTerms:
    A: float
    B: float
    Gamma: float
    D: float
    variant: str
    mean_norm_estimate: float
    B_relaxation: float = 0.0
    gamma_proof_form: float = 0.0
    exact: bool = True
    details: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("A", "B", "Gamma", "D", "mean_norm_estimate"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise InvalidInputError(f"Adamczak term {name} must be finite and nonnegative, got {value}")
        if self.variant not in ADAMCZAK_VARIANTS:
            raise InvalidInputError(f"variant must be one of {ADAMCZAK_VARIANTS}, got {self.variant!r}")


def mean_norm_estimate(H: KernelTable, P: DiscreteDistribution, mom1_c: float = 1.0,
                       expectations: KernelExpectations = None) -> float:
    """E||U_n|| proxy: mom1_c log(ed) (E||E_2 G~G~*||^{1/2} + ||sum E H^2||^{1/2} + sqrt(log(ed)) max-term)"""
    return expectation_bounds_comparison(H, P, mom1_c=mom1_c, expectations=expectations).mom1


def adamczak_terms(H: KernelTable, P: DiscreteDistribution, q: float, variant: str = FULL,
                   expectations: KernelExpectations = None, mom1_c: float = 1.0,
                   restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                   gradient_tol: float = DEFAULT_GRADIENT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                   degeneracy_tol: float = 1e-9, threads: int = None) -> AdamczakTerms:
    q = validate_moment_order(q)
    if variant not in ADAMCZAK_VARIANTS:
        raise InvalidInputError(f"variant must be one of {ADAMCZAK_VARIANTS}, got {variant!r}")
    require_degenerate(H, P, degeneracy_tol, "adamczak_terms")
    ex = expectations or KernelExpectations(H, P)
    n, d = H.n, H.d
    L = math.log(math.e * d)
    log_factor = 1 + math.log(d) / q

    gg1 = ex.over_first_sample(lambda X1: ex.e2_gg_star_norms(X1), 1.0, per_item=ex.per_item_cost("gg"),
                               label="E2 GG* first moment")
    variance = float(batched_spectral_norm(ex.pair_second_moments().sum(axis=(0, 1))))
    inner = math.sqrt(gg1.value + variance)

    sup = sphere_sup_estimate(sphere_objective(H, P), restarts=restarts, seed=seed,
                              gradient_tol=gradient_tol, max_iter=max_iter, threads=threads)
    row_term = ex.row_power_sum(q) ** (1.0 / (2 * q))
    pair_term = ex.pair_power_sum(q) ** (1.0 / (2 * q))
    gamma_proof = 2.0 * ex.column_power_sum(q) ** (1.0 / (2 * q))
    exact = gg1.exact

    if variant == FULL:
        max_row = ex.over_joint_sample(lambda X1, X2: ex.max_row_square_norms(X1, X2), 1.0,
                                       per_item=n * n * d * d, label="max row first moment")
        exact = exact and max_row.exact
        A = math.sqrt(L) * inner + L * math.sqrt(max_row.value)
        Gamma = math.sqrt(log_factor) * row_term
        row_max = ex.row_pair_max_power(q) ** (1.0 / (2 * q))
        D = pair_term + log_factor * row_max
        details = {"max_row_first_moment": max_row.value, "row_pair_max_term": row_max}
    else:
        A = L * inner
        Gamma = L ** 1.5 * row_term
        D = L * pair_term
        details = {}
    details.update({"E2_gg_first_moment": gg1.value, "sum_sq_norm": variance, "row_power_term": row_term,
                    "pair_power_term": pair_term, "log_ed": L})

    return AdamczakTerms(
        A=A, B=sup.sup_estimate, Gamma=Gamma, D=D, variant=variant,
        mean_norm_estimate=mean_norm_estimate(H, P, mom1_c, ex),
        B_relaxation=sup.relaxation, gamma_proof_form=gamma_proof, exact=exact, details=details,
    )


def adamczak_moment_tail(terms: AdamczakTerms, mean: Optional[float], q_or_t: float, C: float = 1.0,
                         tail: bool = False) -> BoundReport:
    """C (mean + sqrt(q) A + q B + q^{3/2} Gamma + q^2 D); with tail=True q_or_t is t >= 2 and the level is e^{-t}"""
    mean = terms.mean_norm_estimate if mean is None else validate_nonnegative(mean, "mean")
    C = validate_nonnegative(C, "C")
    if tail:
        if q_or_t < 2:
            raise InvalidInputError(f"the Adamczak tail form needs t >= 2, got {q_or_t}")
        x = float(q_or_t)
    else:
        x = validate_moment_order(q_or_t)
    pieces = {"mean": mean, "A": math.sqrt(x) * terms.A, "B": x * terms.B,
              "Gamma": x ** 1.5 * terms.Gamma, "D": x ** 2 * terms.D}
    value = C * sum(pieces.values())

    notes = ()
    if terms.Gamma > 0:
        notes = (f"Gamma proof form / stated form = {terms.gamma_proof_form / terms.Gamma:.6g}",)
    constituent = dict(pieces)
    constituent.update({"B_relaxation": terms.B_relaxation, "gamma_proof_form": terms.gamma_proof_form})
    return BoundReport(
        bound_name="adamczak_tail" if tail else "adamczak_moment", q_or_t=x, value=value,
        constituent_terms=constituent, r_convention="log(ed)", direction=CALIBRATED,
        exact=terms.exact, constants={"adamczak_c": C}, variant=terms.variant, notes=notes,
        inputs_digest=inputs_digest(np.array([terms.A, terms.B, terms.Gamma, terms.D, mean]), x=x, tail=tail),
    )


def calibrate_constant(reports: Sequence[BoundReport]) -> float:
    """Smallest C with C * (value at C = 1) >= oracle on every report carrying an oracle"""
    worst = 0.0
    for report in reports:
        if report.oracle_value is None or report.oracle_value <= 0:
            continue
        c = report.constants.get("adamczak_c", 1.0)
        base = report.value / c if c > 0 else 0.0
        if base <= 0:
            return math.inf
        worst = max(worst, report.oracle_value / base)
    return worst
