"""Exception hierarchy shared across the toolkit."""


class SonohbtError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(SonohbtError):
    """Malformed or contradictory run configuration."""


class DomainError(SonohbtError):
    """Input outside the physically or numerically valid domain."""


class DegenerateGeometryError(DomainError):
    """Pair geometry with no well-defined longitudinal direction (|k_a + k_b| = 0
    or an opening angle at/beyond pi)."""


class InsufficientMarginError(DomainError):
    """Evaluation point too close to a spectrum domain edge for the requested
    finite-difference stencil."""


class UnsupportedConfigurationError(DomainError):
    """Parameter combination outside the supported contract (e.g. band-pass
    filters with unequal widths)."""


class NumericalError(SonohbtError):
    """Quadrature or iteration failed to converge; carries diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class ApproximationBreakdownError(SonohbtError):
    """Spectrum-derivative corrections overwhelm the geometric variances, or a
    fit returned a negative squared radius: outside the Gaussian formalism's
    validity range."""


class UnfittableError(SonohbtError):
    """Scan carries no significant correlation structure to fit."""


class ChaoticityViolationError(SonohbtError):
    """Measured intercept at or below 1: inconsistent with chaotic emission
    (partial coherence or systematics, outside this model)."""
