import re
from typing import List, Optional, Tuple

import numpy as np

from .errors import ReportFormatError


class MatrixFormatParser:
    """Parser for the plain-text matrix record format.

    A record is a header line ``d1 d2`` followed by d1*d2 whitespace separated
    entries in row-major order.  Each entry is either a real number ``re`` or a
    complex number written ``re+imI`` / ``re-imI``.
    """

    def __init__(self):
        number = r'[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf|nan'
        self.entry_patterns = {
            "Complex": re.compile(rf'^(?P<re>{number})(?P<im>[-+](?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)I$'),
            "PureImaginary": re.compile(rf'^(?P<im>{number})I$'),
            "Real": re.compile(rf'^(?P<re>{number})$'),
        }
        self.header_pattern = re.compile(r'^\s*(\d+)\s+(\d+)\s*$')

    def parse_entry(self, token: str) -> Optional[complex]:
        """Parse a single entry token; None when the token matches no format"""
        token = token.strip()
        for kind, pattern in self.entry_patterns.items():
            match = pattern.match(token)
            if not match:
                continue
            if kind == "Complex":
                return complex(float(match.group('re')), float(match.group('im')))
            if kind == "PureImaginary":
                return complex(0.0, float(match.group('im')))
            return complex(float(match.group('re')), 0.0)
        return None

    def format_entry(self, value: complex, is_complex: bool) -> str:
        if not is_complex:
            return f"{value.real:.17g}"
        imag = f"{value.imag:.17g}"
        sign = '' if imag.startswith('-') else '+'
        return f"{value.real:.17g}{sign}{imag}I"

    def parse_header(self, line: str) -> Tuple[int, int]:
        match = self.header_pattern.match(line)
        if not match:
            raise ReportFormatError(f"bad matrix header {line!r}; expected 'd1 d2'")
        rows, cols = int(match.group(1)), int(match.group(2))
        if rows < 1 or cols < 1:
            raise ReportFormatError(f"matrix dimensions must be positive, got {rows} x {cols}")
        return rows, cols

    def parse_record(self, text: str) -> np.ndarray:
        """Parse one record; real arrays come back as float64, anything with an imaginary part as complex128"""
        lines = [line for line in text.splitlines() if line.strip() and not line.lstrip().startswith('#')]
        if not lines:
            raise ReportFormatError("empty matrix record")
        rows, cols = self.parse_header(lines[0])
        tokens: List[str] = " ".join(lines[1:]).split()
        if len(tokens) != rows * cols:
            raise ReportFormatError(f"expected {rows * cols} entries for a {rows} x {cols} matrix, found {len(tokens)}")

        values = []
        for token in tokens:
            value = self.parse_entry(token)
            if value is None:
                raise ReportFormatError(f"unparseable matrix entry {token!r}")
            values.append(value)

        arr = np.array(values, dtype=np.complex128).reshape(rows, cols)
        if not any('I' in token for token in tokens):
            return arr.real.copy()
        return arr

    def format_record(self, matrix: np.ndarray) -> str:
        arr = np.atleast_2d(np.asarray(matrix))
        if arr.ndim != 2:
            raise ReportFormatError(f"only 2-D arrays can be written, got shape {arr.shape}")
        is_complex = bool(np.iscomplexobj(arr))
        lines = [f"{arr.shape[0]} {arr.shape[1]}"]
        for row in arr:
            lines.append(" ".join(self.format_entry(complex(v), is_complex) for v in row))
        return "\n".join(lines) + "\n"
