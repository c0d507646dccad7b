#!/usr/bin/env python3
"""
Matrix Rademacher chaos of order 2.

X = sum_{i1 != i2} A_{i1,i2} eps1_{i1} eps2_{i2} with independent sign vectors.
This module holds the moment oracles for (E||X||^{2q})^{1/2q} (exhaustive
enumeration and seeded Monte Carlo) and the two-sided Khintchine estimate
driven by the variance proxies ||GG*|| and ||sum A^2||.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass
from functools import partial
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from core.errors import InvalidInputError
from core.linalg import (
    ChaosCoefficients,
    CoefficientsLike,
    RectMatrix,
    as_coefficients,
    batched_spectral_norm,
    conjugate_transpose,
    variance_proxies,
)
from utils.helpers import (
    DEFAULT_BLOCK_SIZE,
    block_rng,
    check_capacity,
    chunked,
    jackknife_power_mean,
    replica_blocks,
    run_blocks,
    sign_patterns,
)
from utils.validators import validate_moment_order, validate_positive_int

logger = logging.getLogger(__name__)

EXACT = "exact-enumeration"
MONTE_CARLO = "monte-carlo"
DEFAULT_N_CAP = 7
KHINTCHINE_CONSTANT = 4.0 / math.sqrt(math.e)
_ENUMERATION_CHUNK = 4096

__all__ = [
    "ChaosCoefficients", "MomentEstimate", "KhintchineBounds", "EigenComparison",
    "sample_chaos_norm", "chaos_norms", "exact_chaos_moment", "mc_chaos_moment",
    "khintchine_bounds", "column_blocks", "eigen_compare_check",
]


@dataclass(frozen=True)
class MomentEstimate:
    """(E||X||^{2q})^{1/2q} together with how it was obtained"""
    q: float
    value: float
    method: str
    stderr: float = 0.0
    replicas: int = 0

    def __post_init__(self):
        if self.method not in (EXACT, MONTE_CARLO):
            raise InvalidInputError(f"unknown estimation method {self.method!r}")
        if self.value < 0 or self.stderr < 0:
            raise InvalidInputError("moment estimates and their errors are nonnegative")
        if self.method == EXACT and self.stderr != 0:
            raise InvalidInputError("exact enumeration carries no standard error")

    @property
    def is_exact(self) -> bool:
        return self.method == EXACT

    def to_record(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


class KhintchineBounds(NamedTuple):
    lower: float
    upper: float
    naive_upper: float


class EigenComparison(NamedTuple):
    trace_gap: float
    condition_met: bool
    schatten_ok: bool
    p: int


def chaos_norms(blocks: np.ndarray, eps1: np.ndarray, eps2: np.ndarray) -> np.ndarray:
    """||X|| for each row pair of sign arrays eps1, eps2 of shape (B, n)"""
    X = np.einsum("bi,bj,ijkl->bkl", eps1, eps2, blocks, optimize=True)
    return batched_spectral_norm(X)


def sample_chaos_norm(A: CoefficientsLike, seed: int) -> float:
    """One draw of ||X||; deterministic in seed"""
    coefficients = as_coefficients(A)
    rng = block_rng(seed, 0)
    signs = 2.0 * rng.integers(0, 2, size=(1, 2 * coefficients.n)) - 1.0
    n = coefficients.n
    return float(chaos_norms(coefficients.blocks, signs[:, :n], signs[:, n:])[0])


def exact_chaos_moment(A: CoefficientsLike, q: float, n_cap: int = DEFAULT_N_CAP) -> MomentEstimate:
    """Average ||X||^{2q} over all 4^n sign assignments"""
    coefficients = as_coefficients(A)
    q = validate_moment_order(q)
    n = coefficients.n
    check_capacity("chaos sign enumeration", 4 ** n, 4 ** n_cap)

    patterns = sign_patterns(2 * n)
    powers = np.empty(len(patterns))
    for start, chunk in zip(range(0, len(patterns), _ENUMERATION_CHUNK), chunked(patterns, _ENUMERATION_CHUNK)):
        norms = chaos_norms(coefficients.blocks, chunk[:, :n], chunk[:, n:])
        powers[start:start + len(chunk)] = norms ** (2 * q)

    value = float(np.mean(powers)) ** (1.0 / (2 * q))
    logger.debug("exact chaos moment n=%d d=%d q=%g over %d patterns: %.12g", n, coefficients.d, q, len(patterns), value)
    return MomentEstimate(q=q, value=value, method=EXACT, stderr=0.0, replicas=len(patterns))


def _chaos_block(blocks: np.ndarray, q: float, seed: int, task: Tuple[int, int]) -> np.ndarray:
    block_index, count = task
    n = blocks.shape[0]
    rng = block_rng(seed, block_index)
    signs = 2.0 * rng.integers(0, 2, size=(count, 2 * n)) - 1.0
    return chaos_norms(blocks, signs[:, :n], signs[:, n:]) ** (2 * q)


def mc_chaos_moment(A: CoefficientsLike, q: float, replicas: int, seed: int,
                    block_size: int = DEFAULT_BLOCK_SIZE, threads: int = None) -> MomentEstimate:
    """Monte Carlo (E||X||^{2q})^{1/2q} with jackknife error; replica blocks are seeded by index"""
    coefficients = as_coefficients(A)
    q = validate_moment_order(q)
    replicas = validate_positive_int(replicas, "replicas")

    worker = partial(_chaos_block, np.asarray(coefficients.blocks), q, seed)
    powers = np.concatenate(run_blocks(worker, replica_blocks(replicas, block_size), threads))
    value, stderr = jackknife_power_mean(powers, 2 * q)
    logger.info("Monte Carlo chaos moment n=%d q=%g replicas=%d: %.6g +/- %.2g",
                coefficients.n, q, replicas, value, stderr)
    return MomentEstimate(q=q, value=value, method=MONTE_CARLO, stderr=stderr, replicas=replicas)


def khintchine_bounds(A: CoefficientsLike, q: float) -> KhintchineBounds:
    """lower = max(||GG*||, ||sum A^2||)^{1/2}, upper = 4/sqrt(e) * max(q, log d) * lower.

    naive_upper swaps the log d for log(nd) with the same constant.
    """
    coefficients = as_coefficients(A)
    q = validate_moment_order(q)
    proxies = variance_proxies(coefficients)
    lower = math.sqrt(max(proxies.gg_star_norm, proxies.sum_sq_norm))
    r = max(q, math.log(coefficients.d))
    r_naive = max(q, math.log(coefficients.n * coefficients.d))
    return KhintchineBounds(
        lower=lower,
        upper=KHINTCHINE_CONSTANT * r * lower,
        naive_upper=KHINTCHINE_CONSTANT * r_naive * lower,
    )


def column_blocks(A: CoefficientsLike) -> List[RectMatrix]:
    """B_{i2} = [A_{1,i2}, ..., A_{n,i2}] (d x nd) so that GG* = sum B*B and sum A^2 = sum BB*"""
    coefficients = as_coefficients(A)
    n, d = coefficients.n, coefficients.d
    out = []
    for i2 in range(n):
        column = coefficients.blocks[:, i2]
        out.append(RectMatrix(conjugate_transpose(column).transpose(1, 0, 2).reshape(d, n * d)))
    return out


def eigen_compare_check(M: Sequence[RectMatrix], p: int = 2, tol: float = 1e-12) -> EigenComparison:
    """Trace identity and conditional Schatten dominance between sum M*M and sum MM*"""
    if not M:
        raise InvalidInputError("eigen comparison needs at least one matrix")
    arrays = [m.entries if isinstance(m, RectMatrix) else RectMatrix(m).entries for m in M]
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise InvalidInputError(f"all matrices must share a shape, got {sorted(shapes)}")
    p = validate_positive_int(p, "p", minimum=2)

    stack = np.stack(arrays)
    d = stack.shape[1]
    left = np.sum(conjugate_transpose(stack) @ stack, axis=0)
    right = np.sum(stack @ conjugate_transpose(stack), axis=0)
    lam = np.clip(np.linalg.eigvalsh(left), 0.0, None)
    nu = np.clip(np.linalg.eigvalsh(right), 0.0, None)

    total = float(nu.sum())
    slack = tol * max(1.0, total)
    lam_power = float(np.sum(lam ** p))
    nu_power = float(np.sum(nu ** p))
    return EigenComparison(
        trace_gap=abs(float(lam.sum()) - total),
        condition_met=bool(lam.max() <= total / d + slack),
        schatten_ok=bool(nu_power >= lam_power - tol * max(1.0, lam_power)),
        p=p,
    )
