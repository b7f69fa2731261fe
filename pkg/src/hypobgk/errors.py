"""Exception hierarchy shared by all hypobgk modules.

Every error raised on purpose by this package derives from HypoBGKError,
so callers can catch one type at the API boundary.  The subclasses map
onto the distinct failure categories the command line reports: bad user
input, models that cannot be certified, ill-formed state data, and
numerical breakdown inside a solver.
"""

from __future__ import annotations

__all__ = [
    "HypoBGKError",
    "UsageError",
    "DomainError",
    "InvalidModelError",
    "NotCertifiableError",
    "CertificateError",
    "DataError",
    "NumericError",
    "ConfigError",
]


class HypoBGKError(Exception):
    """Base class for all errors raised by hypobgk."""


class UsageError(HypoBGKError):
    """An operation was called with arguments outside its contract."""


class DomainError(HypoBGKError):
    """A point lies outside the domain a model or grid is defined on."""


class InvalidModelError(HypoBGKError):
    """A collision-frequency model violates its validity constraints."""


class NotCertifiableError(HypoBGKError):
    """No finite certificate constant exists for the requested model."""


class CertificateError(HypoBGKError):
    """Certificate construction failed or was given inadmissible inputs."""


class DataError(HypoBGKError):
    """State data violates a structural requirement (e.g. normalization)."""


class NumericError(HypoBGKError):
    """A numerical kernel failed to converge or produced non-finite output."""


class ConfigError(HypoBGKError):
    """A run configuration failed validation; message aggregates all issues."""
