"""
Record and directory I/O for matrices, coefficient arrays and kernel tables.

Layouts (indices are 1-based on disk):
    coefficients/          A_<i1>_<i2>.mat          one record per off-diagonal pair
    kernel/                manifest.yaml            n, d and the support (label, payload, prob)
                           kernel_<i1>_<i2>/<x>_<y>.mat
"""

import logging
import re
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import numpy as np
import yaml

from .errors import ReportFormatError
from .format_parser import MatrixFormatParser

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_parser = MatrixFormatParser()
_COEFFICIENT_NAME = re.compile(r'^A_(\d+)_(\d+)\.mat$')
_KERNEL_DIR = re.compile(r'^kernel_(\d+)_(\d+)$')
_KERNEL_ENTRY = re.compile(r'^(\d+)_(\d+)\.mat$')
MANIFEST_NAME = "manifest.yaml"


def write_matrix(matrix: np.ndarray, path: PathLike) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(_parser.format_record(matrix))
    except OSError as e:
        raise ReportFormatError(f"cannot write matrix to {path}: {e}") from e
    return path


def read_matrix(path: PathLike) -> np.ndarray:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ReportFormatError(f"cannot read matrix file {path}: {e}") from e
    return _parser.parse_record(text)


def write_coefficients(blocks: np.ndarray, directory: PathLike) -> Path:
    """Write every off-diagonal block of an (n, n, d, d) array as A_i1_i2.mat"""
    directory = Path(directory)
    n = blocks.shape[0]
    for i1 in range(n):
        for i2 in range(n):
            if i1 != i2:
                write_matrix(blocks[i1, i2], directory / f"A_{i1 + 1}_{i2 + 1}.mat")
    logger.info("wrote %d coefficient blocks to %s", n * (n - 1), directory)
    return directory


def read_coefficients(directory: PathLike) -> np.ndarray:
    """Read a coefficient directory back into an (n, n, d, d) array; missing pairs are zero"""
    directory = Path(directory)
    if not directory.is_dir():
        raise ReportFormatError(f"coefficient directory {directory} does not exist")

    records: Dict[Tuple[int, int], np.ndarray] = {}
    for path in sorted(directory.iterdir()):
        match = _COEFFICIENT_NAME.match(path.name)
        if match:
            records[(int(match.group(1)) - 1, int(match.group(2)) - 1)] = read_matrix(path)
    if not records:
        raise ReportFormatError(f"no A_i1_i2.mat records in {directory}")

    n = max(max(key) for key in records) + 1
    shapes = {m.shape for m in records.values()}
    if len(shapes) != 1:
        raise ReportFormatError(f"coefficient blocks have mixed shapes {sorted(shapes)}")
    d = shapes.pop()[0]
    dtype = np.complex128 if any(np.iscomplexobj(m) for m in records.values()) else np.float64
    blocks = np.zeros((n, n, d, d), dtype=dtype)
    for (i1, i2), matrix in records.items():
        blocks[i1, i2] = matrix
    return blocks


def write_kernel(values: np.ndarray, support: List[Dict[str, Any]], directory: PathLike) -> Path:
    """Write an (n, n, s, s, d, d) kernel table and its manifest.

    ``support`` is a list of {label, payload, prob} mappings, one per point.
    """
    directory = Path(directory)
    n, _, s, _, d, _ = values.shape
    manifest = {"n": int(n), "d": int(d), "support": [
        {"label": str(p["label"]), "payload": _plain(p.get("payload")), "prob": float(p["prob"])} for p in support
    ]}
    if len(manifest["support"]) != s:
        raise ReportFormatError(f"manifest lists {len(support)} support points, kernel has {s}")
    try:
        directory.mkdir(parents=True, exist_ok=True)
        with open(directory / MANIFEST_NAME, "w") as f:
            yaml.safe_dump(manifest, f, sort_keys=False)
    except OSError as e:
        raise ReportFormatError(f"cannot write kernel manifest to {directory}: {e}") from e

    for i1 in range(n):
        for i2 in range(n):
            if i1 == i2:
                continue
            for x in range(s):
                for y in range(s):
                    write_matrix(values[i1, i2, x, y], directory / f"kernel_{i1 + 1}_{i2 + 1}" / f"{x + 1}_{y + 1}.mat")
    logger.info("wrote kernel table n=%d s=%d d=%d to %s", n, s, d, directory)
    return directory


def read_kernel(directory: PathLike) -> Tuple[np.ndarray, List[Dict[str, Any]]]:
    """Read a kernel directory; returns the (n, n, s, s, d, d) values and the support list"""
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    try:
        with open(manifest_path) as f:
            manifest = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise ReportFormatError(f"cannot read kernel manifest {manifest_path}: {e}") from e
    if not isinstance(manifest, dict) or not {"n", "d", "support"} <= set(manifest):
        raise ReportFormatError(f"{manifest_path} must define n, d and support")

    n, d, support = int(manifest["n"]), int(manifest["d"]), list(manifest["support"])
    s = len(support)
    entries: Dict[Tuple[int, int, int, int], np.ndarray] = {}
    for sub in sorted(p for p in directory.iterdir() if p.is_dir()):
        dir_match = _KERNEL_DIR.match(sub.name)
        if not dir_match:
            continue
        i1, i2 = int(dir_match.group(1)) - 1, int(dir_match.group(2)) - 1
        for path in sorted(sub.iterdir()):
            entry_match = _KERNEL_ENTRY.match(path.name)
            if entry_match:
                entries[(i1, i2, int(entry_match.group(1)) - 1, int(entry_match.group(2)) - 1)] = read_matrix(path)

    dtype = np.complex128 if any(np.iscomplexobj(m) for m in entries.values()) else np.float64
    values = np.zeros((n, n, s, s, d, d), dtype=dtype)
    for (i1, i2, x, y), matrix in entries.items():
        if max(i1, i2) >= n or max(x, y) >= s:
            raise ReportFormatError(f"kernel entry {(i1 + 1, i2 + 1, x + 1, y + 1)} is outside the manifest ranges")
        if matrix.shape != (d, d):
            raise ReportFormatError(f"kernel entry has shape {matrix.shape}, manifest says d = {d}")
        values[i1, i2, x, y] = matrix
    return values, support


def _plain(value):
    """Payloads go through YAML; numpy scalars and arrays become plain Python"""
    if value is None:
        return None
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value
