#!/usr/bin/env python3
"""
Checks for the supporting inequalities the main bounds are built from:
Khintchine for Rademacher series and chaos (spectral and Schatten forms),
decoupling and symmetrization of degenerate U-statistics, the PSD block
lemma and the two block-diagonal relaxations of GG* and E_2 G~G~*.
"""

import logging
import math
from typing import Sequence, Tuple

import numpy as np

from bounds import BoundConstants, BoundReport, require_degenerate
from chaos import DEFAULT_N_CAP
from core.errors import InvalidInputError
from core.linalg import (
    HERMITIAN_TOL,
    BlockHermMatrix,
    CoefficientsLike,
    RectMatrix,
    as_coefficients,
    asymmetry,
    batched_eigenvalues,
    batched_spectral_norm,
    conjugate_transpose,
    is_psd,
    schatten_norm,
    stack_hermitian,
    variance_proxies,
)
from ustat import (
    COUPLED,
    DEFAULT_CONFIGURATION_CAP,
    DEFAULT_SYMMETRIZATION_CAP,
    DECOUPLED,
    DiscreteDistribution,
    KernelExpectations,
    KernelTable,
    e2_gg_star,
    exact_U_moment,
    symmetrized_U_moment,
    u_matrices,
)
from utils.helpers import (
    check_capacity,
    configuration_weights,
    inputs_digest,
    mixed_radix_configurations,
    power_mean,
    sign_patterns,
)
from utils.validators import validate_indices, validate_moment_order

logger = logging.getLogger(__name__)

SERIES_SIGN_CAP = 14
SCHATTEN_KHINTCHINE_FACTOR = 2.0 * math.sqrt(2.0) / math.e


def matrix_khintchine_series(A_list: Sequence[np.ndarray], max_terms: int = SERIES_SIGN_CAP) -> BoundReport:
    """sqrt(e(1 + 2 log d)) ||sum A_i^2||^{1/2} against (E||sum eps_i A_i||^2)^{1/2}"""
    A = stack_hermitian(A_list)
    if asymmetry(A) > HERMITIAN_TOL:
        raise InvalidInputError("Khintchine series needs self-adjoint terms")
    n, d = A.shape[0], A.shape[1]
    check_capacity("Rademacher series sign enumeration", 2 ** n, 2 ** max_terms)

    variance = float(batched_spectral_norm(np.matmul(A, A).sum(axis=0)))
    factor = math.sqrt(math.e * (1 + 2 * math.log(d)))
    signs = sign_patterns(n)
    norms = batched_spectral_norm(np.einsum("bi,iac->bac", signs, A))
    oracle = math.sqrt(float(np.mean(norms ** 2)))

    report = BoundReport(
        bound_name="matrix_khintchine_series", q_or_t=1.0, value=factor * math.sqrt(variance),
        constituent_terms={"variance": math.sqrt(variance), "factor": factor},
        inputs_digest=inputs_digest(A),
    )
    return report.with_oracle(oracle)


def _schatten_power(gram_stack: np.ndarray, p: float) -> np.ndarray:
    """tr(M^p) for a stack of PSD matrices, i.e. ||M^{1/2}||_{S_2p}^{2p}"""
    lam = np.clip(batched_eigenvalues(gram_stack), 0.0, None)
    return np.sum(lam ** p, axis=-1)


def schatten_khintchine_series(B_list: Sequence[np.ndarray], p: float,
                               max_terms: int = SERIES_SIGN_CAP) -> BoundReport:
    """Schatten-2p Khintchine for rectangular B_j, both sides taken to the power 1/2p.

    value  = ((2 sqrt2 p / e)^p max(tr (sum BB*)^p, tr (sum B*B)^p))^{1/2p}
    oracle = (E ||sum eps_j B_j||_{S_2p}^{2p})^{1/2p}
    """
    p = validate_moment_order(p, "p")
    B = np.stack([m.entries if isinstance(m, RectMatrix) else RectMatrix(m).entries for m in B_list])
    n = B.shape[0]
    check_capacity("Rademacher series sign enumeration", 2 ** n, 2 ** max_terms)

    Bh = conjugate_transpose(B)
    left = float(_schatten_power((B @ Bh).sum(axis=0), p))
    right = float(_schatten_power((Bh @ B).sum(axis=0), p))
    scale = (SCHATTEN_KHINTCHINE_FACTOR * p) ** p
    value = (scale * max(left, right)) ** (1.0 / (2 * p))

    S = np.einsum("bi,irc->brc", sign_patterns(n), B)
    powers = _schatten_power(S @ conjugate_transpose(S), p)
    oracle = float(np.mean(powers)) ** (1.0 / (2 * p))

    report = BoundReport(
        bound_name="schatten_khintchine_series", q_or_t=p, value=value,
        constituent_terms={"row_trace": left, "column_trace": right, "scale": scale},
        inputs_digest=inputs_digest(B, p=p),
    )
    return report.with_oracle(oracle)


def schatten_khintchine_chaos(A: np.ndarray, p: float, n_cap: int = DEFAULT_N_CAP) -> BoundReport:
    """Schatten-2p Khintchine for the full double sum, diagonal blocks included.

    G is built from every block A_{i1,i2}; value and oracle are 2p-th roots of
    2 (2 sqrt2 p / e)^{2p} max(tr (GG*)^p, tr (sum A^2)^p) and E||X||_{S_2p}^{2p}.
    """
    p = validate_moment_order(p, "p")
    blocks = BlockHermMatrix(np.asarray(A)).blocks
    if asymmetry(blocks) > HERMITIAN_TOL:
        raise InvalidInputError("chaos blocks must be self-adjoint")
    n = blocks.shape[0]
    check_capacity("chaos sign enumeration", 4 ** n, 4 ** n_cap)

    flat = BlockHermMatrix(blocks).flat()
    gram = float(_schatten_power(flat @ conjugate_transpose(flat), p))
    squares = float(_schatten_power(np.matmul(blocks, blocks).sum(axis=(0, 1)), p))
    scale = 2 * (SCHATTEN_KHINTCHINE_FACTOR * p) ** (2 * p)
    value = (scale * max(gram, squares)) ** (1.0 / (2 * p))

    patterns = sign_patterns(2 * n)
    X = np.einsum("bi,bj,ijkl->bkl", patterns[:, :n], patterns[:, n:], blocks, optimize=True)
    eig = batched_eigenvalues(X)
    oracle = float(np.mean(np.sum(np.abs(eig) ** (2 * p), axis=-1))) ** (1.0 / (2 * p))

    report = BoundReport(
        bound_name="schatten_khintchine_chaos", q_or_t=p, value=value,
        constituent_terms={"gg_star_trace": gram, "sum_sq_trace": squares, "scale": scale},
        inputs_digest=inputs_digest(blocks, p=p),
    )
    return report.with_oracle(oracle)


def decoupling_check(H: KernelTable, P: DiscreteDistribution, q: float, constants: BoundConstants = BoundConstants(),
                     cap: int = DEFAULT_CONFIGURATION_CAP, degeneracy_tol: float = 1e-9) -> BoundReport:
    """C (E||U'_n||^{2q})^{1/2q} against (E||U_n||^{2q})^{1/2q} with C = decoupling_c (4 for canonical kernels)"""
    q = validate_moment_order(q)
    require_degenerate(H, P, degeneracy_tol, "decoupling_check")
    decoupled = exact_U_moment(H, P, q, mode=DECOUPLED, cap=cap)
    coupled = exact_U_moment(H, P, q, mode=COUPLED, cap=cap)
    c = constants.decoupling_c
    report = BoundReport(
        bound_name="decoupling", q_or_t=q, value=c * decoupled.value,
        constituent_terms={"decoupled_moment": decoupled.value},
        constants={"decoupling_c": c}, inputs_digest=inputs_digest(H.values, P.probs, q=q),
    )
    return report.with_moment_oracle(coupled)


def coupled_norm_law(H: KernelTable, P: DiscreteDistribution,
                     cap: int = DEFAULT_CONFIGURATION_CAP) -> Tuple[np.ndarray, np.ndarray]:
    """Support and probabilities of ||U_n||, one entry per coupled sample"""
    check_capacity("coupled U-statistic enumeration", H.s ** H.n, cap)
    configs = mixed_radix_configurations(H.s, H.n)
    weights = configuration_weights(configs, P.probs)
    return batched_spectral_norm(u_matrices(np.asarray(H.values), configs, configs)), weights


def coupled_norm_moment(H: KernelTable, P: DiscreteDistribution, p: float,
                        cap: int = DEFAULT_CONFIGURATION_CAP) -> float:
    """(E||U_n||^p)^{1/p} for any p >= 1 by enumeration of the coupled sample"""
    p = validate_moment_order(p, "p")
    norms, weights = coupled_norm_law(H, P, cap)
    return power_mean(norms, weights, p)


def symmetrization_check(H: KernelTable, P: DiscreteDistribution, p: float, constants: BoundConstants = BoundConstants(),
                         cap: int = DEFAULT_SYMMETRIZATION_CAP, degeneracy_tol: float = 1e-9) -> BoundReport:
    """C (E||sum eps eps H(X1, X2)||^p)^{1/p} against (E||U_n||^p)^{1/p} with C = symmetrization_c"""
    p = validate_moment_order(p, "p")
    require_degenerate(H, P, degeneracy_tol, "symmetrization_check")
    symmetrized = symmetrized_U_moment(H, P, p, cap=cap)
    c = constants.symmetrization_c
    report = BoundReport(
        bound_name="symmetrization", q_or_t=p, value=c * symmetrized.value,
        constituent_terms={"symmetrized_moment": symmetrized.value},
        constants={"symmetrization_c": c}, inputs_digest=inputs_digest(H.values, P.probs, p=p),
    )
    return report.with_oracle(coupled_norm_moment(H, P, p, cap=cap))


def block_matrix_check(M: np.ndarray, d1: int, p: float = math.inf) -> BoundReport:
    """|||M||| <= |||A||| + |||B||| for PSD M = [[A, X], [X*, B]] in the Schatten-p norm"""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"block lemma needs a square matrix, got shape {M.shape}")
    if not 0 < d1 < M.shape[0]:
        raise InvalidInputError(f"split index d1 must lie in (0, {M.shape[0]}), got {d1}")
    if asymmetry(M) > HERMITIAN_TOL or not is_psd(M):
        raise InvalidInputError("block lemma needs a nonnegative definite matrix")
    a = schatten_norm(M[:d1, :d1], p)
    b = schatten_norm(M[d1:, d1:], p)
    report = BoundReport(
        bound_name="block_matrix", q_or_t=float(p), value=a + b,
        constituent_terms={"top_left": a, "bottom_right": b},
        inputs_digest=inputs_digest(M, d1=d1, p=p),
    )
    return report.with_oracle(schatten_norm(M, p))


def useful_bound_check(A: CoefficientsLike) -> BoundReport:
    """sum_{i1} ||sum_{i2} A^2_{i1,i2}|| as an upper bound on ||GG*||"""
    coefficients = as_coefficients(A)
    proxies = variance_proxies(coefficients)
    report = BoundReport(
        bound_name="useful_bound", q_or_t=1.0, value=proxies.row_sum_total,
        constituent_terms={f"row_{i + 1}": v for i, v in enumerate(proxies.row_sq_norms)},
        inputs_digest=inputs_digest(coefficients.blocks),
    )
    return report.with_oracle(proxies.gg_star_norm)


def e2_bound_check(H: KernelTable, P: DiscreteDistribution, x1: Sequence[int]) -> BoundReport:
    """sum_{i1} ||sum_{i2} E_2 H^2_{i1,i2}(x1_{i1}, .)|| as an upper bound on ||E_2 G~G~*(x1)||"""
    idx = validate_indices(x1, H.s, "x1")
    if len(idx) != H.n:
        raise InvalidInputError(f"sample has length {len(idx)}, kernel has n = {H.n}")
    rows = KernelExpectations(H, P).row_norms()[np.arange(H.n), idx]
    oracle = float(np.max(np.abs(e2_gg_star(H, P, idx).eigenvalues())))
    report = BoundReport(
        bound_name="e2_bound", q_or_t=1.0, value=float(rows.sum()),
        constituent_terms={f"row_{i + 1}": float(v) for i, v in enumerate(rows)},
        inputs_digest=inputs_digest(H.values, P.probs, idx),
    )
    return report.with_oracle(oracle)
