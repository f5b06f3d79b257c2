"""Exception types shared across the package."""


class ConekitError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(ConekitError, ValueError):
    """Inputs violate a shape or size precondition."""


class ArgumentError(ConekitError, ValueError):
    """An argument lies outside its documented domain (zero vector, bad range)."""


class NumericError(ConekitError, RuntimeError):
    """A numerical backend failed to converge or produced non-finite output."""


class FrameIntegrityError(ConekitError, RuntimeError):
    """A constructed frame violates one of its structural guarantees."""


class AdmissibilityError(ConekitError, RuntimeError):
    """No block passes the two-sided projection window.

    Carries the measured squared projection norms so experiments can report
    the failure rate instead of silently dropping the seed.
    """

    def __init__(self, message, m_par_sq):
        super().__init__(message)
        self.m_par_sq = [float(v) for v in m_par_sq]


class DegenerateInputError(ConekitError, ValueError):
    """A random draw or input is degenerate (zero residual, rank collapse)."""


class CertificateIntegrityError(ConekitError, RuntimeError):
    """A certificate invariant failed after construction."""


class ConfigError(ConekitError, ValueError):
    """Solver or experiment configuration violates its invariants."""
