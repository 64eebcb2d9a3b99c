"""Exception hierarchy shared by every analysis module.

Each error carries the name of the module that raised it and an optional
remediation hint so the CLI can report failures uniformly and pick an exit
status (2 for data problems, 3 for numerical failures).
"""

from __future__ import annotations


class PricedynError(Exception):
    """Base class for all package errors."""

    module = "pricedyn"
    exit_code = 1

    def __init__(self, message: str, *, hint: str | None = None):
        super().__init__(message)
        self.hint = hint


class DataError(PricedynError, ValueError):
    """Input data is unreadable, malformed or violates a series invariant."""

    module = "timeseries-core"
    exit_code = 2


class UnparsableRow(DataError):
    def __init__(self, row: int, detail: str):
        super().__init__(f"row {row}: {detail}", hint="fix or drop the offending row")
        self.row = row


class DuplicateTimestamp(DataError):
    def __init__(self, row: int, timestamp):
        super().__init__(
            f"row {row}: duplicate timestamp {timestamp}",
            hint="deduplicate the input before loading",
        )
        self.row = row


class CadenceError(DataError):
    pass


class GapError(DataError):
    """A gap cannot be filled under the active policy."""


class BoundaryGap(GapError):
    pass


class NumericalError(PricedynError, ValueError):
    """An estimator cannot be evaluated on the given input."""

    exit_code = 3

    def __init__(self, message: str, *, module: str, hint: str | None = None):
        super().__init__(message, hint=hint)
        self.module = module


class ConfigError(PricedynError, ValueError):
    """Invalid configuration or generator specification."""

    module = "cli"
    exit_code = 1
