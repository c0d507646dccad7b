"""
Shared machinery for the oracles: counter-based seeding, mixed-radix enumeration,
the block runner used for Monte Carlo / enumeration work, and the jackknife error
of a power mean.
"""

import hashlib
import logging
import os
from multiprocessing import Pool
from typing import Callable, Iterable, List, Sequence, Tuple, TypeVar

import numpy as np

from core.errors import CapacityError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

DEFAULT_BLOCK_SIZE = 4096
THREADS_ENV = "MATCONC_THREADS"


def block_rng(master_seed: int, block_index: int) -> np.random.Generator:
    """Generator for one replica block; depends only on (master_seed, block_index)"""
    seq = np.random.SeedSequence(entropy=int(master_seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(int(block_index),))
    return np.random.default_rng(seq)


def replica_blocks(replicas: int, block_size: int = DEFAULT_BLOCK_SIZE) -> List[Tuple[int, int]]:
    """Split replicas into (block_index, count) tasks of fixed size, the last one possibly short"""
    if replicas < 1:
        return []
    full, rest = divmod(int(replicas), int(block_size))
    tasks = [(i, block_size) for i in range(full)]
    if rest:
        tasks.append((full, rest))
    return tasks


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("ignoring non-integer %s=%r", THREADS_ENV, raw)
        return 1


def run_blocks(worker: Callable[[T], R], tasks: Sequence[T], threads: int = None) -> List[R]:
    """Map worker over tasks, in-process or on a Pool; results keep task order"""
    threads = worker_count() if threads is None else max(1, threads)
    if threads == 1 or len(tasks) < 2:
        return [worker(task) for task in tasks]
    with Pool(processes=min(threads, len(tasks))) as pool:
        return pool.map(worker, tasks)


def check_capacity(what: str, size: int, cap: int) -> None:
    if size > cap:
        raise CapacityError(what, size, cap)


def mixed_radix_configurations(radix: int, length: int) -> np.ndarray:
    """All radix**length digit tuples in lexicographic order, last position fastest"""
    if length == 0:
        return np.zeros((1, 0), dtype=np.int64)
    count = radix ** length
    powers = radix ** np.arange(length - 1, -1, -1, dtype=np.int64)
    return (np.arange(count, dtype=np.int64)[:, None] // powers) % radix


def sign_patterns(n: int) -> np.ndarray:
    """All 2**n vectors in {-1, +1}^n, lexicographic with -1 first"""
    return 2.0 * mixed_radix_configurations(2, n) - 1.0


def configuration_weights(configs: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """Product-measure probability of each configuration row"""
    if configs.shape[1] == 0:
        return np.ones(configs.shape[0])
    return np.prod(np.asarray(probs)[configs], axis=1)


def chunked(seq: Sequence[T], size: int) -> Iterable[Sequence[T]]:
    for start in range(0, len(seq), size):
        yield seq[start:start + size]


def jackknife_power_mean(values: np.ndarray, power: float) -> Tuple[float, float]:
    """(mean(values))**(1/power) with the jackknife standard error of that function of the mean"""
    x = np.asarray(values, dtype=np.float64)
    N = len(x)
    mean = float(np.mean(x))
    estimate = mean ** (1.0 / power)
    if N < 2:
        return estimate, 0.0
    leave_one_out = np.clip((N * mean - x) / (N - 1), 0.0, None)
    variance = np.mean((leave_one_out ** (1.0 / power) - estimate) ** 2) * (N - 1)
    return estimate, float(np.sqrt(variance))


def expected_max_power(values: np.ndarray, probs: np.ndarray, power: float) -> float:
    """E max_i V_i**power for independent V_i taking values[i, x] with probability probs[x] (or probs[i, x])"""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return 0.0
    probs = np.broadcast_to(np.asarray(probs, dtype=np.float64), values.shape)
    levels = np.unique(values)
    cdf = np.stack([np.array([row_p[row <= v].sum() for v in levels]) for row, row_p in zip(values, probs)])
    joint = np.clip(np.prod(cdf, axis=0), 0.0, 1.0)
    mass = np.clip(np.diff(np.concatenate([[0.0], joint])), 0.0, None)
    return float(np.dot(mass, levels ** power))


def product_support(radices: Sequence[int]) -> np.ndarray:
    """Mixed-radix enumeration with per-position radices, last position fastest"""
    radices = tuple(int(r) for r in radices)
    total = int(np.prod(radices, dtype=np.int64)) if radices else 1
    if not radices:
        return np.zeros((1, 0), dtype=np.int64)
    return np.stack(np.unravel_index(np.arange(total), radices), axis=1)


def inputs_digest(*arrays, **scalars) -> str:
    """Short content hash of the numeric inputs of an evaluation"""
    h = hashlib.sha256()
    for arr in arrays:
        a = np.ascontiguousarray(np.asarray(arr))
        h.update(str(a.dtype).encode())
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    for key in sorted(scalars):
        h.update(f"{key}={scalars[key]!r}".encode())
    return h.hexdigest()[:16]


def power_mean(values: np.ndarray, weights: np.ndarray, power: float) -> float:
    """(sum w * values**power)**(1/power) for nonnegative values and probability weights"""
    total = float(np.dot(weights, np.asarray(values, dtype=np.float64) ** power))
    return max(total, 0.0) ** (1.0 / power)
