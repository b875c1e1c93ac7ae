"""Exception types shared across the package.

The CLI maps these onto process exit codes (config -> 2, data -> 3,
solver -> 4), so library code should raise the most specific type that
applies rather than a bare ``ValueError``.
"""

from __future__ import annotations


class SegregError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SegregError):
    """Invalid or inconsistent configuration (bad keys, out-of-range values)."""


class DataError(SegregError):
    """Malformed or unusable input data (parse failures, shape mismatches)."""


class SolverError(SegregError):
    """An estimation routine could not produce a valid result."""
