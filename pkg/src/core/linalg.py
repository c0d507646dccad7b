"""
Dense Hermitian / rectangular matrix primitives.

Every bound in the package consumes the quantities computed here: spectral and
Schatten norms, the Hermitian dilation, the block matrix G built from chaos
coefficients and the variance proxies ||GG*||, ||sum A^2|| and the row sums.

Norms always go through a Hermitian eigendecomposition; rectangular inputs are
first dilated, so there is a single numerical kernel (``numpy.linalg.eigvalsh``).
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Tuple, Union

import numpy as np

from .errors import InvalidInputError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12


def _finite_array(values, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype == object:
        raise InvalidInputError(f"{name} must be numeric")
    if not np.iscomplexobj(arr):
        arr = arr.astype(np.float64)
    else:
        arr = arr.astype(np.complex128)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def conjugate_transpose(arr: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes"""
    return np.conj(np.swapaxes(arr, -1, -2))


def symmetrize(arr: np.ndarray) -> np.ndarray:
    """(M + M*)/2 over the last two axes, keeping real arrays real"""
    return 0.5 * (arr + conjugate_transpose(arr))


def asymmetry(arr: np.ndarray) -> float:
    """Largest entrywise deviation from self-adjointness, relative to max(1, max|M|)"""
    if arr.size == 0:
        return 0.0
    scale = max(1.0, float(np.max(np.abs(arr))))
    return float(np.max(np.abs(arr - conjugate_transpose(arr)))) / scale


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HermMatrix:
    """Dense d x d self-adjoint matrix.

    Input within ``HERMITIAN_TOL`` of self-adjoint is symmetrized as (M + M*)/2;
    larger asymmetry is treated as a caller bug and rejected.
    """
    entries: np.ndarray

    def __post_init__(self):
        arr = _finite_array(self.entries, "HermMatrix")
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise InvalidInputError(f"HermMatrix needs a non-empty square array, got shape {arr.shape}")
        gap = asymmetry(arr)
        if gap > HERMITIAN_TOL:
            raise InvalidInputError(f"matrix is not self-adjoint (relative asymmetry {gap:.3e})")
        object.__setattr__(self, "entries", _readonly(symmetrize(arr)))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def zeros(cls, d: int) -> "HermMatrix":
        return cls(np.zeros((d, d)))

    @classmethod
    def identity(cls, d: int) -> "HermMatrix":
        return cls(np.eye(d))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def scaled(self, c: float) -> "HermMatrix":
        return HermMatrix(c * self.entries)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True)
class RectMatrix:
    """Dense d1 x d2 complex (or real) matrix"""
    entries: np.ndarray

    def __post_init__(self):
        arr = _finite_array(self.entries, "RectMatrix")
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidInputError(f"RectMatrix needs positive dimensions, got shape {arr.shape}")
        object.__setattr__(self, "entries", _readonly(arr))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def adjoint(self) -> "RectMatrix":
        return RectMatrix(conjugate_transpose(self.entries))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True)
class BlockHermMatrix:
    """n x n array of d x d blocks stored as an (n, n, d, d) array.

    The flat (nd) x (nd) matrix is self-adjoint exactly when
    blocks[i][j] = blocks[j][i]* blockwise; that is checked, not enforced,
    since G-tilde built from a decoupled sample is generally not self-adjoint.
    """
    blocks: np.ndarray

    def __post_init__(self):
        arr = _finite_array(self.blocks, "block matrix")
        if arr.ndim != 4 or arr.shape[0] != arr.shape[1] or arr.shape[2] != arr.shape[3]:
            raise InvalidInputError(f"block array must have shape (n, n, d, d), got {arr.shape}")
        if arr.shape[0] < 2 or arr.shape[2] < 1:
            raise InvalidInputError("block matrix needs n >= 2 and d >= 1")
        object.__setattr__(self, "blocks", _readonly(arr))

    @property
    def n(self) -> int:
        return self.blocks.shape[0]

    @property
    def d(self) -> int:
        return self.blocks.shape[2]

    def flat(self) -> np.ndarray:
        n, d = self.n, self.d
        return self.blocks.transpose(0, 2, 1, 3).reshape(n * d, n * d)

    def block(self, i: int, j: int) -> np.ndarray:
        return self.blocks[i, j]

    def is_self_adjoint(self, tol: float = HERMITIAN_TOL) -> bool:
        return asymmetry(self.flat()) <= tol

    def gram(self) -> HermMatrix:
        """M M* of the flat matrix"""
        flat = self.flat()
        return HermMatrix(symmetrize(flat @ conjugate_transpose(flat)))


def blocks_from_flat(flat: np.ndarray, n: int) -> np.ndarray:
    """Inverse of BlockHermMatrix.flat for an (nd) x (nd) array"""
    nd = flat.shape[-1]
    d = nd // n
    return flat.reshape(n, d, n, d).transpose(0, 2, 1, 3)


@dataclass(frozen=True)
class ChaosCoefficients:
    """A_{i1,i2}: n x n array of self-adjoint d x d blocks with zero diagonal"""
    blocks: np.ndarray

    def __post_init__(self):
        arr = _finite_array(self.blocks, "chaos coefficients")
        if arr.ndim != 4 or arr.shape[0] != arr.shape[1] or arr.shape[2] != arr.shape[3]:
            raise InvalidInputError(f"coefficients must have shape (n, n, d, d), got {arr.shape}")
        n, d = arr.shape[0], arr.shape[2]
        if n < 2:
            raise InvalidInputError(f"chaos coefficients need n >= 2, got n = {n}")
        if d < 1:
            raise InvalidInputError("chaos coefficients need d >= 1")
        gap = asymmetry(arr)
        if gap > HERMITIAN_TOL:
            raise InvalidInputError(f"coefficient blocks are not self-adjoint (relative asymmetry {gap:.3e})")
        scale = max(1.0, float(np.max(np.abs(arr))))
        diagonal = arr[np.arange(n), np.arange(n)]
        if np.max(np.abs(diagonal)) > HERMITIAN_TOL * scale:
            raise InvalidInputError("diagonal blocks A[i][i] must vanish")
        arr = symmetrize(arr)
        arr[np.arange(n), np.arange(n)] = 0.0
        object.__setattr__(self, "blocks", _readonly(arr))

    @property
    def n(self) -> int:
        return self.blocks.shape[0]

    @property
    def d(self) -> int:
        return self.blocks.shape[2]

    def block(self, i1: int, i2: int) -> HermMatrix:
        return HermMatrix(self.blocks[i1, i2])

    def scaled(self, c: float) -> "ChaosCoefficients":
        return ChaosCoefficients(c * self.blocks)

    def is_index_symmetric(self, tol: float = HERMITIAN_TOL) -> bool:
        """True when A_{i1,i2} = A_{i2,i1} for every pair"""
        swapped = self.blocks.transpose(1, 0, 2, 3)
        scale = max(1.0, float(np.max(np.abs(self.blocks))))
        return float(np.max(np.abs(self.blocks - swapped))) <= tol * scale

    @classmethod
    def zeros(cls, n: int, d: int) -> "ChaosCoefficients":
        return cls(np.zeros((n, n, d, d)))


CoefficientsLike = Union[ChaosCoefficients, np.ndarray]


def as_coefficients(A: CoefficientsLike) -> ChaosCoefficients:
    return A if isinstance(A, ChaosCoefficients) else ChaosCoefficients(np.asarray(A))


@dataclass(frozen=True)
class VarianceProxies:
    """The competing variance quantities of a matrix chaos"""
    gg_star_norm: float
    sum_sq_norm: float
    row_sq_norms: Tuple[float, ...] = field(default_factory=tuple)
    row_sum_total: float = 0.0

    def check_invariants(self, tol: float = 1e-9) -> bool:
        """useful-bound ordering and max row <= full sum, with relative slack tol"""
        scale = max(1.0, self.row_sum_total, self.sum_sq_norm)
        useful = self.gg_star_norm <= self.row_sum_total + tol * scale
        rows = (max(self.row_sq_norms) if self.row_sq_norms else 0.0) <= self.sum_sq_norm + tol * scale
        return useful and rows


def batched_spectral_norm(stack: np.ndarray) -> np.ndarray:
    """Spectral norms of a stack (..., d, d) of self-adjoint matrices"""
    stack = np.asarray(stack)
    if stack.shape[-1] == 0:
        return np.zeros(stack.shape[:-2])
    if stack.size == 0:
        return np.zeros(stack.shape[:-2])
    eig = np.linalg.eigvalsh(stack)
    return np.max(np.abs(eig), axis=-1)


def batched_eigenvalues(stack: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(np.asarray(stack))


MatrixLike = Union[HermMatrix, RectMatrix, np.ndarray]


def _dilate(arr: np.ndarray) -> np.ndarray:
    d1, d2 = arr.shape
    dtype = np.complex128 if np.iscomplexobj(arr) else np.float64
    out = np.zeros((d1 + d2, d1 + d2), dtype=dtype)
    out[:d1, d1:] = arr
    out[d1:, :d1] = conjugate_transpose(arr)
    return out


def hermitian_dilation(A: Union[RectMatrix, np.ndarray]) -> HermMatrix:
    """D(A) = [[0, A], [A*, 0]]; ||D(A)|| = ||A|| and D(A)^2 = diag(AA*, A*A)"""
    rect = A if isinstance(A, RectMatrix) else RectMatrix(A)
    return HermMatrix(_dilate(rect.entries))


def _is_hermitian_array(arr: np.ndarray) -> bool:
    return arr.ndim == 2 and arr.shape[0] == arr.shape[1] and asymmetry(arr) <= HERMITIAN_TOL


def spectral_norm(M: MatrixLike) -> float:
    """sqrt(lambda_max(M*M)); max |eigenvalue| for self-adjoint input"""
    if isinstance(M, HermMatrix):
        return float(np.max(np.abs(M.eigenvalues())))
    if isinstance(M, RectMatrix):
        return spectral_norm(hermitian_dilation(M))
    arr = _finite_array(M)
    if arr.ndim != 2 or min(arr.shape) < 1:
        raise InvalidInputError(f"expected a non-empty 2-D array, got shape {arr.shape}")
    if _is_hermitian_array(arr):
        return spectral_norm(HermMatrix(arr))
    return spectral_norm(RectMatrix(arr))


def singular_values(M: MatrixLike) -> np.ndarray:
    """Singular values in descending order, read off the dilation spectrum"""
    if isinstance(M, HermMatrix):
        return np.sort(np.abs(M.eigenvalues()))[::-1]
    arr = M.entries if isinstance(M, RectMatrix) else _finite_array(M)
    if _is_hermitian_array(arr):
        return singular_values(HermMatrix(arr))
    k = min(arr.shape)
    eig = np.linalg.eigvalsh(_dilate(arr))
    return np.clip(np.sort(eig)[::-1][:k], 0.0, None)


def schatten_norm(M: MatrixLike, p: float) -> float:
    """Schatten-p norm (p = inf gives the spectral norm, p = 1 the nuclear norm)"""
    if p < 1:
        raise InvalidInputError(f"Schatten index must be >= 1, got {p}")
    s = singular_values(M)
    if np.isinf(p):
        return float(s.max()) if s.size else 0.0
    return float(np.sum(s ** p) ** (1.0 / p))


def is_psd(M: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    eig = np.linalg.eigvalsh(np.asarray(M))
    scale = max(1.0, float(np.max(np.abs(eig))) if eig.size else 1.0)
    return bool(np.min(eig) >= -tol * scale)


def assemble_block_G(A: CoefficientsLike) -> BlockHermMatrix:
    """G with off-diagonal blocks A_{i1,i2} and zero diagonal blocks"""
    coefficients = as_coefficients(A)
    return BlockHermMatrix(coefficients.blocks)


def squared_blocks(blocks: np.ndarray) -> np.ndarray:
    """Blockwise A_{i1,i2}^2 for self-adjoint blocks"""
    return np.matmul(blocks, blocks)


def variance_proxies(A: CoefficientsLike) -> VarianceProxies:
    """||GG*||, ||sum A^2||, the per-row norms ||sum_{i2} A^2_{i1,i2}|| and their sum"""
    coefficients = as_coefficients(A)
    gram = assemble_block_G(coefficients).gram()
    squares = squared_blocks(coefficients.blocks)
    rows = batched_spectral_norm(squares.sum(axis=1))
    proxies = VarianceProxies(
        gg_star_norm=spectral_norm(gram),
        sum_sq_norm=float(batched_spectral_norm(squares.sum(axis=(0, 1)))),
        row_sq_norms=tuple(float(v) for v in rows),
        row_sum_total=float(rows.sum()),
    )
    logger.debug("variance proxies n=%d d=%d: %s", coefficients.n, coefficients.d, proxies)
    return proxies


def gram_trace_gap(A: CoefficientsLike) -> float:
    """|tr(GG*) - tr(sum A^2)| relative to max(1, tr(sum A^2))"""
    coefficients = as_coefficients(A)
    gram_trace = float(np.real(np.trace(assemble_block_G(coefficients).gram().entries)))
    square_trace = float(np.real(np.trace(squared_blocks(coefficients.blocks).sum(axis=(0, 1)))))
    return abs(gram_trace - square_trace) / max(1.0, abs(square_trace))


def stack_hermitian(matrices: Iterable[MatrixLike]) -> np.ndarray:
    return np.stack([np.asarray(m.entries if isinstance(m, (HermMatrix, RectMatrix)) else m) for m in matrices])
