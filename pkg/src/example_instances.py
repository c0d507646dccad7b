#!/usr/bin/env python3
"""
Closed-form chaos and U-statistic instances used as regression fixtures.

example1          A_{i1,i2} = a_{i1} a_{i2}^T + a_{i2} a_{i1}^T, where ||sum A^2|| < ||GG*||
example2          the same blocks weighted by an orthogonal zero-diagonal C (pair swap),
                  where the row-sum relaxation of ||GG*|| loses a factor n
polynomial-chaos  Y = sum A_{i1,i2} X_{i1} X_{i2} for a centered unit-variance law
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from core.errors import InvalidInputError
from core.linalg import ChaosCoefficients, assemble_block_G, batched_spectral_norm, spectral_norm
from core.matrix_io import write_coefficients
from ustat import DiscreteDistribution, KernelTable, product_kernel
from utils.helpers import expected_max_power
from utils.validators import validate_moment_order, validate_positive_int

logger = logging.getLogger(__name__)

EXAMPLE1 = "example1"
EXAMPLE2 = "example2"
POLYNOMIAL_CHAOS = "polynomial-chaos"
EXAMPLE_NAMES = (EXAMPLE1, EXAMPLE2, POLYNOMIAL_CHAOS)
LAW_TOL = 1e-12


@dataclass(frozen=True)
class ExampleInstance:
    name: str
    n: int
    d: int
    coefficients: Union[ChaosCoefficients, KernelTable]
    expected: Dict[str, float] = field(default_factory=dict)
    law: Optional[DiscreteDistribution] = None

    def __post_init__(self):
        if self.name not in EXAMPLE_NAMES:
            raise InvalidInputError(f"unknown example {self.name!r}; choose from {EXAMPLE_NAMES}")

    def kernel(self) -> KernelTable:
        """The U-statistic kernel: the stored table, or x y A_{i1,i2} under Rademacher signs"""
        if isinstance(self.coefficients, KernelTable):
            return self.coefficients
        return product_kernel(self.coefficients, self.distribution())

    def distribution(self) -> DiscreteDistribution:
        return self.law if self.law is not None else DiscreteDistribution.rademacher()

    def export(self, directory: Union[str, Path]) -> Path:
        """Write coefficients as A_i1_i2.mat records, kernels as a kernel directory"""
        if isinstance(self.coefficients, KernelTable):
            return self.coefficients.to_directory(self.distribution(), directory)
        return write_coefficients(np.asarray(self.coefficients.blocks), directory)


def _basis(d: int, basis: Optional[np.ndarray]) -> np.ndarray:
    if basis is None:
        return np.eye(d)
    basis = np.asarray(basis, dtype=np.float64)
    if basis.shape != (d, d):
        raise InvalidInputError(f"basis must be {d} x {d}, got {basis.shape}")
    if np.max(np.abs(basis @ basis.T - np.eye(d))) > 1e-10:
        raise InvalidInputError("basis rows must be orthonormal")
    return basis


def _check_sizes(n: int, d: int) -> None:
    validate_positive_int(n, "n", minimum=2)
    validate_positive_int(d, "d")
    if d < n:
        raise InvalidInputError(f"the construction needs d >= n, got n={n} d={d}")


def _rank_two_blocks(a: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """weights[i, j] (a_i a_j^T + a_j a_i^T) for i != j, zero diagonal"""
    outer = np.einsum("ia,jb->ijab", a, a)
    blocks = weights[:, :, None, None] * (outer + outer.transpose(1, 0, 2, 3))
    n = a.shape[0]
    blocks[np.arange(n), np.arange(n)] = 0.0
    return blocks


def build_example1(n: int, d: int, basis: np.ndarray = None) -> ExampleInstance:
    _check_sizes(n, d)
    a = _basis(d, basis)[:n]
    coefficients = ChaosCoefficients(_rank_two_blocks(a, np.ones((n, n))))
    expected = {"gg_star_norm_lower": float((n - 2) * n), "sum_sq_norm": float(2 * (n - 1))}
    return ExampleInstance(name=EXAMPLE1, n=n, d=d, coefficients=coefficients, expected=expected)


def pair_swap_matrix(n: int) -> np.ndarray:
    """Orthogonal permutation with 2 x 2 blocks [[0, 1], [1, 0]] on the diagonal"""
    if n % 2:
        raise InvalidInputError(f"the pair-swap matrix needs even n, got {n}")
    C = np.zeros((n, n))
    for k in range(0, n, 2):
        C[k, k + 1] = C[k + 1, k] = 1.0
    return C


def build_example2(n: int, d: int, basis: np.ndarray = None) -> ExampleInstance:
    if n % 2:
        raise InvalidInputError(f"example2 needs even n, got {n}")
    _check_sizes(n, d)
    a = _basis(d, basis)[:n]
    coefficients = ChaosCoefficients(_rank_two_blocks(a, pair_swap_matrix(n)))
    expected = {"gg_star_norm": 1.0, "sum_sq_norm": 2.0, "row_sum_total": float(n),
                "separation": math.sqrt(n)}
    return ExampleInstance(name=EXAMPLE2, n=n, d=d, coefficients=coefficients, expected=expected)


def _check_standardized(law: DiscreteDistribution) -> None:
    if abs(law.mean()) > LAW_TOL:
        raise InvalidInputError(f"polynomial chaos needs a centered law, mean is {law.mean():.3e}")
    if abs(law.moment(2) - 1.0) > LAW_TOL:
        raise InvalidInputError(f"polynomial chaos needs unit variance, got {law.moment(2):.15g}")


def build_polynomial_chaos(A: Union[ChaosCoefficients, np.ndarray], X_law: DiscreteDistribution,
                           q: float = 1.0) -> ExampleInstance:
    """Kernel H_{i1,i2}(x, y) = x y A_{i1,i2} and the three terms of the polynomial-chaos moment bound.

    With m_q = E max_i |X_i|^{2q} (exact over the n independent copies) and r = max(q, log(ed)):
        var_term = ||sum A^2||^{1/2}
        gg_term  = m_q^{1/2q} ||GG*||^{1/2}
        max_term = max_i ||sum_j A^2_{i,j}||^{1/2} m_q^{1/q}
    """
    q = validate_moment_order(q)
    coefficients = A if isinstance(A, ChaosCoefficients) else ChaosCoefficients(np.asarray(A))
    _check_standardized(X_law)
    kernel = product_kernel(coefficients, X_law)
    n, d = coefficients.n, coefficients.d

    magnitudes = np.tile(np.abs(X_law.payload_array()), (n, 1))
    m_q = expected_max_power(magnitudes, X_law.probs, 2 * q)
    squares = np.matmul(coefficients.blocks, coefficients.blocks)
    sum_sq = float(batched_spectral_norm(squares.sum(axis=(0, 1))))
    row_max = float(batched_spectral_norm(squares.sum(axis=1)).max())
    gg = spectral_norm(assemble_block_G(coefficients).gram())
    r = max(q, math.log(math.e * d))

    expected = {
        "q": q, "r": r, "max_power_moment": m_q,
        "var_term": math.sqrt(sum_sq),
        "gg_term": m_q ** (1.0 / (2 * q)) * math.sqrt(gg),
        "max_term": math.sqrt(row_max) * m_q ** (1.0 / q),
    }
    expected["bound_at_unit_constant"] = (r * (expected["var_term"] + expected["gg_term"])
                                          + r ** 1.5 * expected["max_term"])
    logger.debug("polynomial chaos n=%d d=%d q=%g: %s", n, d, q, expected)
    return ExampleInstance(name=POLYNOMIAL_CHAOS, n=n, d=d, coefficients=kernel, expected=expected, law=X_law)


def build_example(name: str, n: int, d: int) -> ExampleInstance:
    """CLI entry point; polynomial-chaos uses example1 coefficients under Rademacher signs"""
    if name == EXAMPLE1:
        return build_example1(n, d)
    if name == EXAMPLE2:
        return build_example2(n, d)
    if name == POLYNOMIAL_CHAOS:
        return build_polynomial_chaos(build_example1(n, d).coefficients, DiscreteDistribution.rademacher())
    raise InvalidInputError(f"unknown example {name!r}; choose from {EXAMPLE_NAMES}")
