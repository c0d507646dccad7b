"""Argument checks shared by the bound evaluators and oracles."""

import math
from typing import Sequence

import numpy as np

from core.errors import InvalidInputError

PROBABILITY_TOL = 1e-12


def validate_moment_order(q: float, name: str = "q", integer: bool = False) -> float:
    """q must be a finite real >= 1 (and an integer when integer=True)"""
    try:
        q = float(q)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{name} must be a real number, got {q!r}")
    if not math.isfinite(q) or q < 1:
        raise InvalidInputError(f"{name} must be a finite real >= 1, got {q}")
    if integer and not q.is_integer():
        raise InvalidInputError(f"{name} must be an integer, got {q}")
    return q


def validate_nonnegative(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise InvalidInputError(f"{name} must be a finite nonnegative real, got {value}")
    return value


def validate_positive_int(value: int, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise InvalidInputError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def validate_probabilities(probs: Sequence[float]) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.size < 1:
        raise InvalidInputError("a distribution needs at least one support point")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise InvalidInputError(f"probabilities must be finite and nonnegative, got {p.tolist()}")
    if abs(p.sum() - 1.0) > PROBABILITY_TOL:
        raise InvalidInputError(f"probabilities sum to {p.sum():.15g}, not 1")
    return p


def validate_indices(indices: Sequence[int], upper: int, name: str) -> np.ndarray:
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 1:
        raise InvalidInputError(f"{name} must be a flat list of indices")
    if idx.size and (idx.min() < 0 or idx.max() >= upper):
        raise InvalidInputError(f"{name} has indices outside [0, {upper})")
    return idx


def is_integer_order(q: float) -> bool:
    return float(q).is_integer()
