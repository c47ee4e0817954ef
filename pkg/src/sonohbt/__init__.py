"""sonohbt: two-photon intensity-interferometry toolkit for small,
short-lived chaotic light sources.

Simulates transverse and longitudinal photon-pair correlation measurements of
a Gaussian emission region (closed form, quadrature, and Monte Carlo routes),
models Gaussian band-pass filter optics including the band-width-diluted
effective intercept, and extracts source size and flash duration by fitting.
"""

from .correlator import (
    LAMBDA_MAX_CHAOTIC,
    CorrelatorPoint,
    ScanResult,
    gaussian_correlator,
    mc_correlator,
    numeric_correlator,
    scan,
    scan_from_csv,
    scan_to_csv,
)
from .errors import (
    ApproximationBreakdownError,
    ChaoticityViolationError,
    ConfigError,
    DegenerateGeometryError,
    DomainError,
    InsufficientMarginError,
    NumericalError,
    SonohbtError,
    UnfittableError,
    UnsupportedConfigurationError,
)
from .extraction import (
    FitResult,
    Instrument,
    ResolvabilityReport,
    ResolvabilityThresholds,
    fit_scan,
    pulse_length_from_intercept,
    resolvability,
)
from .filters import (
    FilterSpec,
    InterceptCurve,
    averaged_correlator,
    averaged_transverse_scan,
    effective_intercept,
    filter_product_identity_check,
    intercept_curve,
    pair_acceptance,
)
from .kinematics import (
    PairKinematics,
    PhotonMomentum,
    max_accessible_xi,
    opening_angle_for_xi,
    pair_from_detector,
    pair_from_vectors,
    q0_qpar_gap,
    xi_variable,
)
from .moments import (
    HbtRadii,
    SpaceTimeVariances,
    compose_radii,
    correction_terms,
    variances,
)
from .source import (
    BlackbodySpectrum,
    ExponentialSpectrum,
    FlowBoost,
    GaussianSource,
    NO_FLOW,
    PowerLawSpectrum,
    Spectrum,
    TabulatedSpectrum,
    evaluate,
    spectrum_log_derivs,
)
from .units import (
    C_NM_PER_FS,
    DEFAULT_WINDOW,
    HBAR_C_EV_NM,
    TransparencyWindow,
    photon_energy_ev,
    photon_wavelength_nm,
)

__version__ = "0.1.0"
