"""Exception types shared across the package.

ConfigError signals bad user input at the CLI boundary (exit code 2);
every other subclass of MorandimError is a numeric failure (exit code 3).
"""


class MorandimError(Exception):
    """Base class for all package-specific failures."""


class InvalidInput(MorandimError):
    """An argument violates a documented precondition."""


class ConfigError(MorandimError):
    """A run configuration file is malformed or inconsistent."""


class PrecisionExhausted(MorandimError):
    """Interval digit extraction could not certify a floor even after
    doubling the working precision up to the configured cap."""


class Divergent(MorandimError):
    """A contraction series or pressure value was requested at or below
    its convergence abscissa."""


class TailNotCertifiable(MorandimError):
    """A digit-driven series prefix is too short to bound the omitted
    tail at the requested tolerance."""


class InsufficientDepth(MorandimError):
    """Digit statistics do not cover enough of the sequence (frequencies
    not yet stabilized, or fewer digits than requested)."""


class NoZero(MorandimError):
    """The pressure function has no sign change on the searchable range;
    the summability assumptions behind the dimension formula are violated."""


class UnboundedLogBound(MorandimError):
    """No uniform bound on |log S_i(t)| is certifiable for a countable
    frequency vector, so the truncation error cannot be controlled."""


class EntropyDiverges(MorandimError):
    """The entropy sum of a countable frequency vector has no certified
    finite value."""


class NonConvergent(MorandimError):
    """Power iteration failed to reach the requested residual (possible
    violation of the expansiveness conditions on the map)."""


class TreeOverflow(MorandimError):
    """Realizing an interval tree would exceed the node cap."""


class InfeasibleGeometry(MorandimError):
    """Per-level child lengths exceed the parent and rescaling is disabled."""
