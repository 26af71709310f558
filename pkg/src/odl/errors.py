"""Exception taxonomy shared by all modules.

Budget-type errors (too much work requested, not wrong input) are grouped in
BUDGET_ERRORS so the CLI can map them to a dedicated exit code.
"""

import os


class OdlError(Exception):
    """Base class for all library errors."""


class EmptySetError(OdlError):
    """An operation that needs a nonempty point set got an empty one."""


class ResolutionTooLargeError(OdlError):
    """Grid resolution G^n exceeds the configured cell budget."""


class SizeBudgetExceededError(OdlError):
    """An orbit union would exceed the configured size budget."""


class BudgetExceededError(OdlError):
    """Generic enumeration budget exhausted."""


class OracleBudgetExceededError(OdlError):
    """A calibration oracle run exceeded its budget."""


class RequiresExactError(OdlError):
    """Operation is only defined for exact rational inputs."""


class DepthPrecisionExceededError(OdlError):
    """Float continued-fraction expansion requested beyond the precision wall."""


class DepthUnreachableError(OdlError):
    """A growth rule cannot be satisfied within the index cap."""


class OutOfDomainError(OdlError):
    """Point outside the map's domain."""


class NonReturnError(OdlError):
    """First-return iteration failed to return; indicates an arithmetic bug."""


class DimensionMismatchError(OdlError):
    """Matrix and point dimensions disagree."""


class NotCommutingError(OdlError):
    """Generators of an abelian action do not commute."""


class NotErgodicError(OdlError):
    """A toral automorphism has an eigenvalue too close to a root of unity."""


class LeafMismatchError(OdlError):
    """A point set is not contained in a single Lyapunov leaf line."""


class ZeroFrequencyError(OdlError):
    """The multiplicative Ramanujan-sum formula needs a nonzero frequency."""


class GridTooCoarseError(OdlError):
    """Bump sampling grid too coarse to resolve the support."""


class AliasingRiskError(OdlError):
    """Requested Fourier frequency too high for the sampling grid."""


class InadmissibleSequenceError(OdlError):
    """A sequence violates the partial-sum caps of the tail-bound lemma."""


class ConfigError(OdlError):
    """Invalid experiment configuration (unknown key, bad value, ...)."""


BUDGET_ERRORS = (
    ResolutionTooLargeError,
    SizeBudgetExceededError,
    BudgetExceededError,
    OracleBudgetExceededError,
    DepthUnreachableError,
)

_DEFAULT_BUDGET_MB = 512


def budget_bytes() -> int:
    """Memory budget for orbit unions and grid scans, from ODL_BUDGET_MB."""
    raw = os.environ.get("ODL_BUDGET_MB", "")
    try:
        mb = int(raw) if raw else _DEFAULT_BUDGET_MB
    except ValueError:
        mb = _DEFAULT_BUDGET_MB
    return mb * 1_000_000
