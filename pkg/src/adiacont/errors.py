"""Exception types shared across the package.

Each class maps to one CLI exit code so failures are machine-distinguishable:
config errors (2), violated model assumptions (3), numerical non-convergence
(4), and dense-window size caps (5).
"""


class AdiacontError(Exception):
    """Base class for package errors."""

    exit_code = 1


class ConfigError(AdiacontError):
    """Invalid or inconsistent run configuration."""

    exit_code = 2


class LatticeMismatchError(AdiacontError):
    """Operands built on different lattices."""

    exit_code = 2


class GapAssumptionError(AdiacontError):
    """Spectral gap fell below the configured lower bound."""

    exit_code = 3


class DegenerateGroundStateError(AdiacontError):
    """Ground state not unique within the degeneracy threshold."""

    exit_code = 3


class QuadratureError(AdiacontError):
    """Quadrature failed its node-doubling convergence certificate."""

    exit_code = 4


class OdeConvergenceError(AdiacontError):
    """Propagator integration failed its step-halving certificate."""

    exit_code = 4


class UnitarityError(AdiacontError):
    """Propagator unitarity defect left the repairable band."""

    exit_code = 4


class WindowCapError(AdiacontError):
    """Requested dense window exceeds the supported site count."""

    exit_code = 5
