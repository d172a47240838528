"""Error taxonomy.

Domain errors are rejected inputs; numeric failures are computations that
started from valid inputs but could not finish reliably. The CLI maps the
former to exit code 2 and the latter to exit code 3.
"""


class DomainError(ValueError):
    """An argument is outside the model's domain."""


class DegenerateRadiusError(DomainError):
    """r = 0 was passed to an operation that integrates over the window."""


class SignalOutsideSupportError(DomainError):
    """The signal lies outside the sampling window of a finite-radius policy."""


class UndefinedOddsError(DomainError):
    """Source-quality odds are undefined when only one type exists (h in {0, 1})."""


class NumericFailure(RuntimeError):
    """A numerical routine could not meet its reliability contract."""


class QuadratureError(NumericFailure):
    """Nested quadrature failed its self-consistency tolerance."""


class ScanBoundError(NumericFailure):
    """The objective is still rising above the no-restriction benchmark at the
    scan boundary; re-run with a larger search bound."""


class RejectionStallError(NumericFailure):
    """Rejection sampling acceptance rate fell below the stall threshold."""


class ConfigError(ValueError):
    """Invalid run configuration (CLI flags, config file, or parameter keys)."""
