"""Exception hierarchy shared by every mufno module.

Library code raises these; only the CLI turns them into exit codes.
"""
from __future__ import annotations

from typing import Optional

from pydantic import ValidationError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_DIVERGENCE = 4
EXIT_INTERNAL = 5


class MufnoError(Exception):
    """Base class for all errors raised by the library."""

    exit_code = EXIT_INTERNAL


class ConfigError(MufnoError):
    """Raised when an experiment configuration or override is invalid."""

    exit_code = EXIT_CONFIG


class SizeError(MufnoError):
    """Raised when an array length or shape does not match the contract."""


class TruncationError(SizeError):
    """Raised when more Fourier modes are requested than the grid holds."""


class DomainError(MufnoError):
    """Raised when a scaling rule is evaluated outside its domain (log K = 0)."""


class NumericDivergenceError(MufnoError):
    """Raised when a NaN or Inf shows up in a forward or backward pass."""

    def __init__(self, message: str, tensor: Optional[str] = None) -> None:
        super().__init__(message)
        self.tensor = tensor


class DegenerateTargetError(MufnoError):
    """Raised when a relative loss is asked for a zero-norm target sample."""


class ConvergenceError(MufnoError):
    """Raised when an iterative method stops before reaching its tolerance."""

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(message)
        self.residual = residual


class SolverDivergenceError(MufnoError):
    """Raised when the Burgers solver blows up."""

    exit_code = EXIT_DATA

    def __init__(self, message: str, sample_index: Optional[int] = None) -> None:
        super().__init__(message)
        self.sample_index = sample_index


class DatasetFormatError(MufnoError):
    """Raised when a binary artifact is truncated, corrupt or foreign."""

    exit_code = EXIT_DATA

    def __init__(self, message: str, offset: int = 0) -> None:
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class UnsupportedVersionError(DatasetFormatError):
    """Raised when a binary artifact declares a version we cannot read."""


class CheckpointFormatError(DatasetFormatError):
    """Raised when a parameter checkpoint cannot be decoded."""


class DataMissingError(MufnoError):
    """Raised when a dataset file a command needs is not present."""

    exit_code = EXIT_DATA


class SweepFailureError(MufnoError):
    """Raised when every cell of a sweep column diverged."""

    exit_code = EXIT_DIVERGENCE

    def __init__(self, message: str, K: Optional[int] = None) -> None:
        super().__init__(message)
        self.K = K


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit-code contract."""
    if isinstance(exc, MufnoError):
        return exc.exit_code
    if isinstance(exc, ValidationError):
        return EXIT_CONFIG
    return EXIT_INTERNAL
