#!/usr/bin/env python3
"""
Matrix-valued U-statistics of order 2 over finite sample spaces.

Kernels are tables: H[i1, i2, x, y] is the d x d self-adjoint value of
H_{i1,i2} at support points (x, y).  Because the law P has finite support every
expectation is a weighted sum, so the moment oracles below are exact whenever
the configuration count fits under the enumeration cap; above it the same
quantities are estimated by seeded Monte Carlo and flagged as such.
"""

import logging
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from chaos import EXACT, MONTE_CARLO, MomentEstimate
from core.errors import InvalidInputError
from core.linalg import (
    HERMITIAN_TOL,
    BlockHermMatrix,
    ChaosCoefficients,
    HermMatrix,
    asymmetry,
    batched_spectral_norm,
    symmetrize,
)
from core.matrix_io import read_kernel, write_kernel
from utils.helpers import (
    DEFAULT_BLOCK_SIZE,
    block_rng,
    check_capacity,
    configuration_weights,
    expected_max_power,
    jackknife_power_mean,
    mixed_radix_configurations,
    replica_blocks,
    run_blocks,
    sign_patterns,
)
from utils.validators import validate_indices, validate_moment_order, validate_positive_int, validate_probabilities

logger = logging.getLogger(__name__)

COUPLED = "coupled"
DECOUPLED = "decoupled"
DEFAULT_CONFIGURATION_CAP = 65536
DEFAULT_SYMMETRIZATION_CAP = 262144
DEGENERACY_TOL = 1e-9
_CHUNK_ENTRIES = 1 << 22


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite-support law: opaque labels, numeric payloads for kernels that need them, probabilities"""
    labels: Tuple[str, ...]
    probs: np.ndarray
    payloads: Tuple = ()

    def __post_init__(self):
        probs = validate_probabilities(self.probs)
        labels = tuple(str(label) for label in self.labels)
        if len(labels) != len(probs):
            raise InvalidInputError(f"{len(labels)} labels for {len(probs)} probabilities")
        if len(set(labels)) != len(labels):
            raise InvalidInputError("support labels must be distinct")
        payloads = tuple(self.payloads) if self.payloads else tuple(range(len(labels)))
        if len(payloads) != len(labels):
            raise InvalidInputError(f"{len(payloads)} payloads for {len(labels)} support points")
        probs = probs.copy()
        probs.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "payloads", payloads)

    @property
    def size(self) -> int:
        return len(self.labels)

    def payload_array(self) -> np.ndarray:
        return np.asarray(self.payloads, dtype=np.float64)

    def mean(self) -> float:
        return float(np.dot(self.probs, self.payload_array()))

    def moment(self, p: float) -> float:
        return float(np.dot(self.probs, np.abs(self.payload_array()) ** p))

    def to_manifest(self) -> List[Dict]:
        return [{"label": label, "payload": payload, "prob": float(prob)}
                for label, payload, prob in zip(self.labels, self.payloads, self.probs)]

    @classmethod
    def from_manifest(cls, support: Sequence[Dict]) -> "DiscreteDistribution":
        return cls(
            labels=tuple(str(p["label"]) for p in support),
            probs=np.array([float(p["prob"]) for p in support]),
            payloads=tuple(p.get("payload") for p in support),
        )

    @classmethod
    def from_values(cls, values: Sequence[float], probs: Sequence[float]) -> "DiscreteDistribution":
        return cls(labels=tuple(f"{v:g}" for v in values), probs=np.asarray(probs, dtype=np.float64),
                   payloads=tuple(float(v) for v in values))

    @classmethod
    def rademacher(cls) -> "DiscreteDistribution":
        return cls.from_values([-1.0, 1.0], [0.5, 0.5])


@dataclass(frozen=True)
class KernelTable:
    """values[i1, i2, x, y] = H_{i1,i2}(x, y); shape (n, n, s, s, d, d).

    Permutation symmetry H_{i1,i2}(x, y) = H_{i2,i1}(y, x) is validated, not
    imposed.  Diagonal index pairs are not part of the U-statistic and are zeroed.
    """
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values)
        arr = arr.astype(np.complex128 if np.iscomplexobj(arr) else np.float64)
        if arr.ndim != 6 or arr.shape[0] != arr.shape[1] or arr.shape[2] != arr.shape[3] or arr.shape[4] != arr.shape[5]:
            raise InvalidInputError(f"kernel table must have shape (n, n, s, s, d, d), got {arr.shape}")
        n, _, s, _, d, _ = arr.shape
        if n < 2 or s < 1 or d < 1:
            raise InvalidInputError(f"kernel table needs n >= 2, s >= 1 and d >= 1, got n={n} s={s} d={d}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("kernel table has non-finite entries")
        arr = arr.copy()
        arr[np.arange(n), np.arange(n)] = 0.0

        gap = asymmetry(arr)
        if gap > HERMITIAN_TOL:
            raise InvalidInputError(f"kernel values are not self-adjoint (relative asymmetry {gap:.3e})")
        scale = max(1.0, float(np.max(np.abs(arr))))
        swapped = arr.transpose(1, 0, 3, 2, 4, 5)
        if float(np.max(np.abs(arr - swapped))) > HERMITIAN_TOL * scale:
            raise InvalidInputError("kernel is not permutation-symmetric: H_{i1,i2}(x,y) != H_{i2,i1}(y,x)")
        arr = symmetrize(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def s(self) -> int:
        return self.values.shape[2]

    @property
    def d(self) -> int:
        return self.values.shape[4]

    def value(self, i1: int, i2: int, x: int, y: int) -> HermMatrix:
        return HermMatrix(self.values[i1, i2, x, y])

    def scaled(self, c: float) -> "KernelTable":
        return KernelTable(c * self.values)

    def max_norm(self) -> float:
        return float(batched_spectral_norm(self.values).max())

    def squares(self) -> np.ndarray:
        """H^2 entrywise in (i1, i2, x, y)"""
        return np.matmul(self.values, self.values)

    def is_identical_across_pairs(self, tol: float = HERMITIAN_TOL) -> bool:
        """True when every off-diagonal H_{i1,i2} is the same table"""
        n = self.n
        reference = self.values[0, 1]
        scale = max(1.0, float(np.max(np.abs(reference))))
        return all(float(np.max(np.abs(self.values[i, j] - reference))) <= tol * scale
                   for i in range(n) for j in range(n) if i != j)

    def to_directory(self, P: DiscreteDistribution, directory: Union[str, Path]) -> Path:
        return write_kernel(np.asarray(self.values), P.to_manifest(), directory)

    @classmethod
    def from_directory(cls, directory: Union[str, Path]) -> Tuple["KernelTable", DiscreteDistribution]:
        values, support = read_kernel(directory)
        return cls(values), DiscreteDistribution.from_manifest(support)


@dataclass(frozen=True)
class SampleConfig:
    """Support indices of the first sample and, for decoupled evaluation, of the second"""
    x1: Tuple[int, ...]
    x2: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "x1", tuple(int(v) for v in self.x1))
        if self.x2 is not None:
            object.__setattr__(self, "x2", tuple(int(v) for v in self.x2))
            if len(self.x2) != len(self.x1):
                raise InvalidInputError("both samples must have length n")

    @property
    def is_decoupled(self) -> bool:
        return self.x2 is not None


@dataclass(frozen=True)
class HoeffdingDecomposition:
    """H(x, y) = mean + pi1[i1, i2, x] + pi1[i2, i1, y] + pi2(x, y) on every pair.

    pi1[i1, i2, x] = E H_{i1,i2}(x, Y) - mean[i1, i2]; by permutation symmetry the
    projection onto the second argument of H_{i1,i2} is pi1[i2, i1, .].
    """
    mean: np.ndarray
    pi1: np.ndarray
    pi2: KernelTable

    def reconstruct(self) -> np.ndarray:
        first = self.pi1[:, :, :, None]
        second = self.pi1.transpose(1, 0, 2, 3, 4)[:, :, None, :]
        full = self.mean[:, :, None, None] + first + second + self.pi2.values
        n = self.mean.shape[0]
        full[np.arange(n), np.arange(n)] = 0.0
        return full


def pi_project(H: KernelTable, P: DiscreteDistribution) -> HoeffdingDecomposition:
    """Exact Hoeffding decomposition by weighted summation over the support"""
    p = P.probs
    if P.size != H.s:
        raise InvalidInputError(f"law has {P.size} support points, kernel has {H.s}")
    values = np.asarray(H.values)
    conditional = np.einsum("ijxyab,y->ijxab", values, p)
    mean = np.einsum("ijxab,x->ijab", conditional, p)
    pi1 = conditional - mean[:, :, None]
    pi2 = values - mean[:, :, None, None] - pi1[:, :, :, None] - pi1.transpose(1, 0, 2, 3, 4)[:, :, None, :]
    n = H.n
    pi1[np.arange(n), np.arange(n)] = 0.0
    pi2[np.arange(n), np.arange(n)] = 0.0
    return HoeffdingDecomposition(mean=mean, pi1=pi1, pi2=KernelTable(pi2))


def conditional_expectation_norm(H: KernelTable, P: DiscreteDistribution) -> float:
    """max over (i1, i2, x) of ||sum_y p_y H_{i1,i2}(x, y)||"""
    conditional = np.einsum("ijxyab,y->ijxab", np.asarray(H.values), P.probs)
    return float(batched_spectral_norm(conditional).max())


def degeneracy_check(H: KernelTable, P: DiscreteDistribution, tol: float = DEGENERACY_TOL) -> bool:
    """Complete degeneracy, measured after scaling the kernel to unit max norm"""
    scale = H.max_norm()
    if scale == 0.0:
        return True
    return conditional_expectation_norm(H, P) / scale <= tol


def _pairs(n: int) -> List[Tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(n) if i != j]


def u_matrices(values: np.ndarray, X1: np.ndarray, X2: np.ndarray) -> np.ndarray:
    """sum_{i1 != i2} H_{i1,i2}(X1[:, i1], X2[:, i2]) for a batch of configurations"""
    n, d = values.shape[0], values.shape[4]
    out = np.zeros((X1.shape[0], d, d), dtype=values.dtype)
    for i, j in _pairs(n):
        out += values[i, j][X1[:, i], X2[:, j]]
    return out


def evaluate_U(H: KernelTable, cfg: SampleConfig) -> HermMatrix:
    """Coupled U_n when cfg.x2 is absent, decoupled U'_n otherwise"""
    x1 = validate_indices(cfg.x1, H.s, "x1")
    if len(x1) != H.n:
        raise InvalidInputError(f"sample has length {len(x1)}, kernel has n = {H.n}")
    x2 = x1 if cfg.x2 is None else validate_indices(cfg.x2, H.s, "x2")
    return HermMatrix(symmetrize(u_matrices(np.asarray(H.values), x1[None, :], x2[None, :])[0]))


def _batch_size(per_item: int) -> int:
    return max(1, _CHUNK_ENTRIES // max(1, per_item))


def _check_mode(mode: str) -> str:
    if mode not in (COUPLED, DECOUPLED):
        raise InvalidInputError(f"mode must be '{COUPLED}' or '{DECOUPLED}', got {mode!r}")
    return mode


def _split(configs: np.ndarray, n: int, mode: str) -> Tuple[np.ndarray, np.ndarray]:
    if mode == COUPLED:
        return configs, configs
    return configs[:, :n], configs[:, n:]


def exact_U_moment(H: KernelTable, P: DiscreteDistribution, q: float, mode: str = DECOUPLED,
                   cap: int = DEFAULT_CONFIGURATION_CAP) -> MomentEstimate:
    """(E||U||^{2q})^{1/2q} by probability-weighted enumeration in mixed-radix order"""
    q = validate_moment_order(q)
    mode = _check_mode(mode)
    n, s = H.n, H.s
    length = n if mode == COUPLED else 2 * n
    check_capacity(f"{mode} U-statistic enumeration", s ** length, cap)

    configs = mixed_radix_configurations(s, length)
    weights = configuration_weights(configs, P.probs)
    powers = np.empty(len(configs))
    step = _batch_size(n * n * H.d * H.d)
    values = np.asarray(H.values)
    for start in range(0, len(configs), step):
        X1, X2 = _split(configs[start:start + step], n, mode)
        powers[start:start + step] = batched_spectral_norm(u_matrices(values, X1, X2)) ** (2 * q)

    value = max(float(np.dot(weights, powers)), 0.0) ** (1.0 / (2 * q))
    logger.debug("exact %s U moment n=%d s=%d q=%g: %.12g", mode, n, s, q, value)
    return MomentEstimate(q=q, value=value, method=EXACT, stderr=0.0, replicas=len(configs))


def sample_configurations(probs: np.ndarray, count: int, length: int, rng: np.random.Generator) -> np.ndarray:
    return rng.choice(len(probs), size=(count, length), p=probs)


def _u_block(values: np.ndarray, probs: np.ndarray, q: float, mode: str, seed: int, task: Tuple[int, int]) -> np.ndarray:
    block_index, count = task
    n = values.shape[0]
    rng = block_rng(seed, block_index)
    configs = sample_configurations(probs, count, n if mode == COUPLED else 2 * n, rng)
    X1, X2 = _split(configs, n, mode)
    return batched_spectral_norm(u_matrices(values, X1, X2)) ** (2 * q)


def mc_U_moment(H: KernelTable, P: DiscreteDistribution, q: float, mode: str, replicas: int, seed: int,
                block_size: int = DEFAULT_BLOCK_SIZE, threads: int = None) -> MomentEstimate:
    q = validate_moment_order(q)
    mode = _check_mode(mode)
    replicas = validate_positive_int(replicas, "replicas")
    worker = partial(_u_block, np.asarray(H.values), np.asarray(P.probs), q, mode, seed)
    powers = np.concatenate(run_blocks(worker, replica_blocks(replicas, block_size), threads))
    value, stderr = jackknife_power_mean(powers, 2 * q)
    return MomentEstimate(q=q, value=value, method=MONTE_CARLO, stderr=stderr, replicas=replicas)


def symmetrized_U_moment(H: KernelTable, P: DiscreteDistribution, p: float,
                         cap: int = DEFAULT_SYMMETRIZATION_CAP) -> MomentEstimate:
    """(E||sum eps1_{i1} eps2_{i2} H_{i1,i2}(X1_{i1}, X2_{i2})||^p)^{1/p} over samples and signs"""
    p = validate_moment_order(p, "p")
    n, s, d = H.n, H.s, H.d
    check_capacity("symmetrized U-statistic enumeration", s ** (2 * n) * 4 ** n, cap)

    configs = mixed_radix_configurations(s, 2 * n)
    weights = configuration_weights(configs, P.probs)
    signs = sign_patterns(2 * n)
    values = np.asarray(H.values)
    pairs = _pairs(n)
    sample_powers = np.empty(len(configs))
    step = _batch_size(len(signs) * d * d + n * n * d * d)
    for start in range(0, len(configs), step):
        X1, X2 = _split(configs[start:start + step], n, DECOUPLED)
        coefficients = np.zeros((len(X1), n, n, d, d), dtype=values.dtype)
        for i, j in pairs:
            coefficients[:, i, j] = values[i, j][X1[:, i], X2[:, j]]
        X = np.einsum("ei,ej,bijkl->bekl", signs[:, :n], signs[:, n:], coefficients, optimize=True)
        sample_powers[start:start + step] = np.mean(batched_spectral_norm(X) ** p, axis=1)

    value = max(float(np.dot(weights, sample_powers)), 0.0) ** (1.0 / p)
    return MomentEstimate(q=p / 2.0, value=value, method=EXACT, stderr=0.0, replicas=len(configs) * len(signs))


def assemble_Gtilde(H: KernelTable, cfg: SampleConfig) -> BlockHermMatrix:
    """Block matrix with (i, j) block H_{i,j}(x1_i, x2_j) and zero diagonal"""
    if not cfg.is_decoupled:
        raise InvalidInputError("G-tilde needs a decoupled sample configuration")
    x1 = validate_indices(cfg.x1, H.s, "x1")
    x2 = validate_indices(cfg.x2, H.s, "x2")
    n = H.n
    blocks = np.zeros((n, n, H.d, H.d), dtype=np.asarray(H.values).dtype)
    for i, j in _pairs(n):
        blocks[i, j] = H.values[i, j, x1[i], x2[j]]
    return BlockHermMatrix(blocks)


def e2_gg_star_batch(values: np.ndarray, probs: np.ndarray, X1: np.ndarray) -> np.ndarray:
    """Flat E_2[G G*] for each first-sample row of X1, shape (B, nd, nd)"""
    n, s, d = values.shape[0], values.shape[2], values.shape[4]
    rows = np.arange(n)
    # selected[b, i, k, y] = H_{i,k}(X1[b, i], y); the k = i term is zero
    selected = values[rows[None, :], :, X1]
    blocks = np.einsum("bikyac,y,bjkycf->bijaf", selected, probs, selected, optimize=True)
    return blocks.transpose(0, 1, 3, 2, 4).reshape(len(X1), n * d, n * d)


def e2_gg_star(H: KernelTable, P: DiscreteDistribution, x1: Sequence[int]) -> HermMatrix:
    """(E_2 G~G~*)_{i,j} = sum_{k != i,j} sum_y p_y H_{i,k}(x1_i, y) H_{j,k}(x1_j, y)"""
    idx = validate_indices(x1, H.s, "x1")
    if len(idx) != H.n:
        raise InvalidInputError(f"sample has length {len(idx)}, kernel has n = {H.n}")
    return HermMatrix(symmetrize(e2_gg_star_batch(np.asarray(H.values), P.probs, idx[None, :])[0]))


class Expectation(NamedTuple):
    value: float
    stderr: float
    exact: bool


class KernelExpectations:
    """Exact expectation engine for one (kernel, law) pair.

    Quantities that depend on a single first-sample coordinate are summed in
    closed form.  Functions of a whole first sample (s^n points) or of both
    samples (s^{2n} points) are enumerated when under the cap and otherwise
    estimated from seeded Monte Carlo, with ``exact`` False on the result.
    """

    def __init__(self, H: KernelTable, P: DiscreteDistribution, cap: int = DEFAULT_CONFIGURATION_CAP,
                 replicas: int = 100000, seed: int = 0, block_size: int = DEFAULT_BLOCK_SIZE):
        if P.size != H.s:
            raise InvalidInputError(f"law has {P.size} support points, kernel has {H.s}")
        self.H = H
        self.P = P
        self.cap = cap
        self.replicas = replicas
        self.seed = seed
        self.block_size = block_size
        self.values = np.asarray(H.values)
        self.probs = np.asarray(P.probs)
        self._squares = None
        self._rows = None

    @property
    def squares(self) -> np.ndarray:
        if self._squares is None:
            self._squares = self.H.squares()
        return self._squares

    def pair_second_moments(self) -> np.ndarray:
        """E H^2_{i1,i2}(X, Y) per pair"""
        return np.einsum("ijxyab,x,y->ijab", self.squares, self.probs, self.probs)

    def conditional_square_rows(self) -> np.ndarray:
        """R[i1, x] = sum_{i2 != i1} E_2 H^2_{i1,i2}(x, Y)"""
        return np.einsum("ijxyab,y->ixab", self.squares, self.probs)

    def row_norms(self) -> np.ndarray:
        if self._rows is None:
            self._rows = batched_spectral_norm(self.conditional_square_rows())
        return self._rows

    def square_norms(self) -> np.ndarray:
        """||H^2_{i1,i2}(x, y)|| on the full table"""
        return batched_spectral_norm(self.squares)

    def _sample_space(self, length: int, label: str):
        size = self.H.s ** length
        if size <= self.cap:
            configs = mixed_radix_configurations(self.H.s, length)
            return configs, configuration_weights(configs, self.probs), True
        logger.warning("%s: %d configurations exceed the cap %d; using %d Monte Carlo replicas",
                       label, size, self.cap, self.replicas)
        chunks = []
        for block_index, count in replica_blocks(self.replicas, self.block_size):
            chunks.append(sample_configurations(self.probs, count, length, block_rng(self.seed, block_index)))
        configs = np.concatenate(chunks)
        return configs, np.full(len(configs), 1.0 / len(configs)), False

    def _reduce(self, values: np.ndarray, weights: np.ndarray, exact: bool, power: float) -> Expectation:
        if exact:
            return Expectation(max(float(np.dot(weights, values)), 0.0) ** (1.0 / power), 0.0, True)
        value, stderr = jackknife_power_mean(values, power)
        return Expectation(value, stderr, False)

    def over_first_sample(self, fn: Callable[[np.ndarray], np.ndarray], power: float, per_item: int = 1,
                          label: str = "first-sample expectation") -> Expectation:
        """(E fn(X1))^{1/power} for fn mapping a (B, n) index batch to B nonnegative values"""
        configs, weights, exact = self._sample_space(self.H.n, label)
        return self._reduce(self._apply(fn, configs, per_item), weights, exact, power)

    def over_joint_sample(self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray], power: float, per_item: int = 1,
                          label: str = "joint expectation") -> Expectation:
        configs, weights, exact = self._sample_space(2 * self.H.n, label)
        n = self.H.n
        return self._reduce(self._apply(lambda c: fn(c[:, :n], c[:, n:]), configs, per_item), weights, exact, power)

    @staticmethod
    def _apply(fn, configs: np.ndarray, per_item: int) -> np.ndarray:
        step = _batch_size(per_item)
        return np.concatenate([np.asarray(fn(configs[start:start + step]), dtype=np.float64)
                               for start in range(0, len(configs), step)])

    def e2_gg_star_norms(self, X1: np.ndarray) -> np.ndarray:
        return batched_spectral_norm(e2_gg_star_batch(self.values, self.probs, X1))

    def max_row_square_norms(self, X1: np.ndarray, X2: np.ndarray) -> np.ndarray:
        """max_{i1} ||sum_{i2 != i1} H^2_{i1,i2}(X1_{i1}, X2_{i2})|| per configuration"""
        n = self.H.n
        rows = np.zeros((len(X1), n, self.H.d, self.H.d), dtype=self.squares.dtype)
        for i, j in _pairs(n):
            rows[:, i] += self.squares[i, j][X1[:, i], X2[:, j]]
        return batched_spectral_norm(rows).max(axis=1)

    def e2_sum_norms(self, X1: np.ndarray) -> np.ndarray:
        """||sum_{i1} R[i1, X1_{i1}]|| per first sample"""
        rows = self.conditional_square_rows()
        total = rows[np.arange(self.H.n)[None, :], X1].sum(axis=1)
        return batched_spectral_norm(total)

    def per_item_cost(self, scope: str) -> int:
        n, s, d = self.H.n, self.H.s, self.H.d
        if scope == "gg":
            return n * n * s * d * d + (n * d) ** 2
        return n * d * d

    # closed-form terms

    def row_max_power(self, q: float) -> float:
        """E max_{i1} ||R[i1, X_{i1}]||^q, exact over independent coordinates"""
        return expected_max_power(self.row_norms(), self.probs, q)

    def row_sum(self) -> float:
        """sum_{i1} E ||R[i1, X_{i1}]||"""
        return float(np.sum(self.row_norms() @ self.probs))

    def row_power_sum(self, q: float) -> float:
        """sum_{i1} E ||R[i1, X_{i1}]||^q"""
        return float(np.sum((self.row_norms() ** q) @ self.probs))

    def column_power_sum(self, q: float) -> float:
        """sum_{i2} E_2 ||sum_{i1 != i2} E_1 H^2_{i1,i2}(X, x2_{i2})||^q"""
        columns = np.einsum("ijxyab,x->jyab", self.squares, self.probs)
        return float(np.sum((batched_spectral_norm(columns) ** q) @ self.probs))

    def pair_power_sum(self, q: float) -> float:
        """sum_{(i1,i2)} E ||H^2_{i1,i2}||^q"""
        powers = self.square_norms() ** q
        return float(np.einsum("ijxy,x,y->", powers, self.probs, self.probs))

    def row_pair_max_power(self, q: float) -> float:
        """sum_{i1} E max_{i2 != i1} ||H^2_{i1,i2}(X1_{i1}, X2_{i2})||^q"""
        norms = self.square_norms()
        n = self.H.n
        total = 0.0
        for i in range(n):
            others = [j for j in range(n) if j != i]
            for x in range(self.H.s):
                total += self.probs[x] * expected_max_power(norms[i, others, x], self.probs, q)
        return total


def product_kernel(A: Union[ChaosCoefficients, np.ndarray], P: DiscreteDistribution) -> KernelTable:
    """H_{i1,i2}(x, y) = x y A_{i1,i2} from scalar payloads"""
    blocks = np.asarray(A.blocks if isinstance(A, ChaosCoefficients) else ChaosCoefficients(A).blocks)
    n = blocks.shape[0]
    swapped = blocks.transpose(1, 0, 2, 3)
    if float(np.max(np.abs(blocks - swapped))) > HERMITIAN_TOL * max(1.0, float(np.max(np.abs(blocks)))):
        raise InvalidInputError("a product kernel needs index-symmetric coefficients A_{i1,i2} = A_{i2,i1}")
    payload = P.payload_array()
    outer = np.outer(payload, payload)
    values = blocks[:, :, None, None] * outer[None, None, :, :, None, None]
    logger.debug("product kernel n=%d s=%d d=%d", n, P.size, blocks.shape[2])
    return KernelTable(values)


def random_symmetric_kernel(n: int, d: int, s: int, rng: np.random.Generator, complex_valued: bool = False) -> KernelTable:
    shape = (n, n, s, s, d, d)
    base = rng.standard_normal(shape)
    if complex_valued:
        base = base + 1j * rng.standard_normal(shape)
    base = symmetrize(base)
    return KernelTable(0.5 * (base + base.transpose(1, 0, 3, 2, 4, 5)))


def random_distribution(s: int, rng: np.random.Generator) -> DiscreteDistribution:
    probs = rng.dirichlet(np.ones(s))
    probs = probs / probs.sum()
    probs[-1] = 1.0 - probs[:-1].sum()
    return DiscreteDistribution.from_values(np.arange(s, dtype=float), np.clip(probs, 0.0, None))


def random_degenerate_kernel(n: int, d: int, s: int, rng: np.random.Generator,
                             P: DiscreteDistribution = None, complex_valued: bool = False
                             ) -> Tuple[KernelTable, DiscreteDistribution]:
    """Completely degenerate part of a random permutation-symmetric kernel"""
    n = validate_positive_int(n, "n", minimum=2)
    P = P if P is not None else random_distribution(s, rng)
    H = random_symmetric_kernel(n, d, P.size, rng, complex_valued)
    return pi_project(H, P).pi2, P
