"""Exception hierarchy shared by every matconc module."""


class MatConcError(Exception):
    """Base class for all library errors"""


class InvalidInputError(MatConcError, ValueError):
    """Raised when an argument violates a documented precondition"""


class CapacityError(MatConcError):
    """Raised when exact enumeration would exceed the configured cap"""

    def __init__(self, what: str, size: int, cap: int):
        self.what = what
        self.size = size
        self.cap = cap
        super().__init__(
            f"{what}: {size} configurations exceed the enumeration cap {cap}; "
            f"use the Monte Carlo estimator instead"
        )


class ContractError(MatConcError):
    """Raised when the hypothesis of a bound does not hold for the given input"""


class ConfigError(MatConcError, ValueError):
    """Raised for invalid suite configuration or unknown override keys"""


class ReportFormatError(MatConcError):
    """Raised when a report or matrix file cannot be read or written"""
