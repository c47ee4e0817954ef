"""Two-photon correlation functions, computed three independent ways.

For a chaotic source the correlator is C = 1 + lambda * |FT of the emission
density|^2 evaluated at the pair's relative four-momentum, with lambda = 1/2
for unpolarized light (only equal-helicity photon pairs Bose-symmetrize).
The three routes:

  * gaussian_correlator  - closed form from composed radii,
  * numeric_correlator   - Gauss-Hermite quadrature of the Fourier integral,
  * mc_correlator        - Monte Carlo pair sampling with cosine weights,

plus scan() to produce transverse (q0 = 0, varying phi) and longitudinal
(phi = 0, varying q0) curves, and a deterministic CSV round-trip format.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import DomainError, NumericalError
from .kinematics import (
    PairKinematics,
    PhotonMomentum,
    detector_pair_vectors,
    max_accessible_xi,
    opening_angle_for_xi,
    pair_from_vectors,
)
from .moments import (
    HbtRadii,
    SpaceTimeVariances,
    compose_radii,
    correction_terms,
    variances,
)
from .source import FlowBoost, GaussianSource, NO_FLOW, Spectrum, flow_shift_nm
from .units import C_NM_PER_FS, HBAR_C_EV_NM, TransparencyWindow

# Equal-helicity fraction for unpolarized chaotic light; override for
# sensitivity studies (1.0 = fully correlated helicities, or a free
# chaoticity parameter).
LAMBDA_MAX_CHAOTIC = 0.5

_GH_LADDER = (16, 24, 32, 48, 64)
_QUAD_RTOL = 1e-7
_QUAD_ATOL = 1e-10  # |FT|^2 below this moves C by < 1e-10: converged for any use
_PHASE_SAFEGUARD = 50.0  # beyond this q.R/(hbar c) the quadrature defers to closed form

SCAN_KINDS = ("transverse", "longitudinal")


@dataclass(frozen=True)
class CorrelatorPoint:
    """One correlator sample: kinematics, value, and the statistical error of
    the estimate (0 for deterministic paths)."""

    kinematics: PairKinematics
    value: float
    stat_error: float = 0.0


@dataclass
class ScanResult:
    """Ordered correlator curve along one scan direction.

    Transverse scans hold q0 = 0 and vary the opening angle (abscissa phi,
    with xi = 2 E tan(phi/2) carried alongside); longitudinal scans hold
    phi = 0 and vary q0 (abscissa q0 in eV).
    """

    scan_kind: str
    e: float
    points: list[CorrelatorPoint]
    source_label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scan_kind not in SCAN_KINDS:
            raise DomainError(f"unknown scan kind {self.scan_kind!r}")
        if not self.points:
            raise DomainError("scan has no points")
        for p in self.points:
            if self.scan_kind == "transverse" and p.kinematics.q0 != 0.0:
                raise DomainError("transverse scans require q0 = 0 at every point")
            if self.scan_kind == "longitudinal" and p.kinematics.phi != 0.0:
                raise DomainError("longitudinal scans require phi = 0 at every point")
        a = self.abscissae
        if len(a) > 1 and np.any(np.diff(a) <= 0):
            raise DomainError("scan abscissae must be strictly increasing")

    @property
    def abscissae(self) -> np.ndarray:
        if self.scan_kind == "transverse":
            return np.array([p.kinematics.phi for p in self.points])
        return np.array([p.kinematics.q0 for p in self.points])

    @property
    def xi_values(self) -> np.ndarray:
        """Transverse abscissa in momentum units, xi = q_perp at q0 = 0."""
        return np.array([p.kinematics.q_perp for p in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points])

    @property
    def stat_errors(self) -> np.ndarray:
        return np.array([p.stat_error for p in self.points])


def gaussian_correlator(
    radii: HbtRadii, k: PairKinematics, lambda_max: float = LAMBDA_MAX_CHAOTIC
) -> CorrelatorPoint:
    """Closed-form Gaussian correlator
    C = 1 + lambda * exp(-(R_perp^2 q_perp^2 + R_par^2 q_par^2)/(hbar c)^2)."""
    expo = (radii.r_perp_sq * k.q_perp**2 + radii.r_par_sq * k.q_par**2) / HBAR_C_EV_NM**2
    return CorrelatorPoint(kinematics=k, value=1.0 + lambda_max * math.exp(-expo))


def _spectral_denominator_ratio(
    spectrum: Spectrum, mode: str, e: float, omega_a: float, omega_b: float
) -> float:
    """Factor multiplying |FT|^2 from the single-photon spectra.

    on_shell_approx evaluates both denominator spectra at the on-shell pair
    energy E, so they cancel against the numerator exactly (factor 1).
    exact_energies keeps the true photon energies in the denominator:
    s(E)^2 / (s(omega_a) s(omega_b)).
    """
    if mode == "on_shell_approx":
        return 1.0
    if mode == "exact_energies":
        return float(
            spectrum.value(e) ** 2 / (spectrum.value(omega_a) * spectrum.value(omega_b))
        )
    raise DomainError(f"unknown correlator mode {mode!r}")


def _gh_phase_factor(order: int, b: float) -> complex:
    """GH estimate of the unit-normalized Gaussian Fourier factor
    int N(0,1)(u) e^{i b' u} du with b' folded into b = sqrt(2) sigma q."""
    if b == 0.0:
        return 1.0 + 0.0j
    u, w = np.polynomial.hermite.hermgauss(order)
    return complex(np.sum(w * np.exp(1j * b * u)) / math.sqrt(math.pi))


def _ratio_quadrature(
    source: GaussianSource,
    spectrum: Spectrum,
    flow: FlowBoost,
    kin: PairKinematics,
    order: int,
) -> float:
    """|FT of the (flow-weighted, normalized) density|^2 at the pair's
    relative momentum, by tensor-product Gauss-Hermite of the given order."""
    sig = source.sigma_r
    # temporal factor: phase q0 * c * t / hbar c
    bt = math.sqrt(2.0) * (C_NM_PER_FS * source.delta_tau) * kin.q0 / HBAR_C_EV_NM
    ft = abs(_gh_phase_factor(order, bt)) ** 2

    if sig == 0.0:
        return ft
    if not flow.active:
        bpar = math.sqrt(2.0) * sig * kin.q_par / HBAR_C_EV_NM
        bperp = math.sqrt(2.0) * sig * kin.q_perp / HBAR_C_EV_NM
        fsp = (
            abs(_gh_phase_factor(order, bpar)) ** 2
            * abs(_gh_phase_factor(order, bperp)) ** 2
        )
        return ft * fsp
    # flow-weighted: full 3-d tensor quadrature with the boost weight
    u, w = np.polynomial.hermite.hermgauss(order)
    x = math.sqrt(2.0) * sig * u
    kappa = flow.v_over_c * kin.e / (sig * flow.temperature)
    wpar = w * np.exp(kappa * x)  # weight along the pair direction
    phase_par = np.exp(-1j * kin.q_par * x / HBAR_C_EV_NM)
    phase_perp = np.exp(-1j * kin.q_perp * x / HBAR_C_EV_NM)
    # tensor product factorizes: the flow weight depends on x_par only
    s_par = np.sum(wpar * phase_par)
    n_par = np.sum(wpar)
    s_perp = np.sum(w * phase_perp)
    n_perp = np.sum(w)
    fsp = abs(s_par / n_par) ** 2 * abs(s_perp / n_perp) ** 2
    return ft * fsp


def _analytic_ratio(source: GaussianSource, kin: PairKinematics) -> float:
    """Exact |FT|^2 for the Gaussian profile (flow shifts only add a phase,
    leaving the modulus untouched)."""
    expo = (
        (kin.q_perp**2 + kin.q_par**2) * source.sigma_r**2
        + kin.q0**2 * (C_NM_PER_FS * source.delta_tau) ** 2
    ) / HBAR_C_EV_NM**2
    return math.exp(-expo)


def numeric_correlator(
    source: GaussianSource,
    spectrum: Spectrum,
    flow: FlowBoost,
    k_a: PhotonMomentum,
    k_b: PhotonMomentum,
    mode: str = "on_shell_approx",
    lambda_max: float = LAMBDA_MAX_CHAOTIC,
) -> CorrelatorPoint:
    """Correlator by direct numerical integration of the emission density's
    Fourier transform.

    mode 'on_shell_approx' evaluates all spectra at the on-shell pair energy
    E = |k_a + k_b|/2 (they cancel); 'exact_energies' keeps the true photon
    energies omega_a, omega_b in the denominator spectra. Quadrature runs a
    Gauss-Hermite order ladder to relative accuracy 1e-7; when the phase
    q.R/(hbar c) exceeds 50 the oscillatory integral is refused and the exact
    Gaussian closed form is used instead.
    """
    kin = pair_from_vectors(k_a, k_b)
    spectrum.check_domain(np.array([k_a.omega, k_b.omega, kin.e]))
    sratio = _spectral_denominator_ratio(spectrum, mode, kin.e, k_a.omega, k_b.omega)

    phase_scale = (
        math.sqrt(
            (kin.q_perp**2 + kin.q_par**2) * source.sigma_r**2
            + kin.q0**2 * (C_NM_PER_FS * source.delta_tau) ** 2
        )
        / HBAR_C_EV_NM
    )
    if phase_scale > _PHASE_SAFEGUARD:
        ratio = _analytic_ratio(source, kin)
        return CorrelatorPoint(kinematics=kin, value=1.0 + lambda_max * sratio * ratio)

    prev = None
    diagnostics = []
    for order in _GH_LADDER:
        ratio = _ratio_quadrature(source, spectrum, flow, kin, order)
        diagnostics.append((order, ratio))
        if prev is not None and abs(ratio - prev) <= _QUAD_RTOL * abs(ratio) + _QUAD_ATOL:
            return CorrelatorPoint(
                kinematics=kin, value=1.0 + lambda_max * sratio * ratio
            )
        prev = ratio
    # ladder exhausted: when the Gaussian suppression bound already puts the
    # integral below double-precision quadrature resolution, the oscillatory
    # integral is refused in favor of the closed form (its contribution to C
    # is < 1e-12 either way); otherwise this is a genuine failure
    if math.exp(-(phase_scale**2)) < 1e-12:
        ratio = _analytic_ratio(source, kin)
        return CorrelatorPoint(kinematics=kin, value=1.0 + lambda_max * sratio * ratio)
    raise NumericalError(
        "correlator quadrature did not converge to 1e-7", diagnostics=diagnostics
    )


def pair_for_scan_point(kind: str, e: float, abscissa: float):
    """Photon pair realizing one scan point.

    Transverse: equal energies omega = sqrt(E^2 + xi^2/4) at opening angle
    phi = 2 atan(xi/2E). Longitudinal: collinear photons E +- q0/2.
    """
    if kind == "transverse":
        xi = abscissa
        phi = opening_angle_for_xi(xi, e)
        omega = math.sqrt(e**2 + 0.25 * xi**2)
        return detector_pair_vectors(omega, omega, phi)
    if kind == "longitudinal":
        q0 = abscissa
        if q0 < 0:
            raise DomainError("longitudinal scans use q0 >= 0")
        if q0 >= 2.0 * e:
            raise DomainError(f"q0 = {q0} eV needs omega_b = E - q0/2 > 0")
        return detector_pair_vectors(e + 0.5 * q0, e - 0.5 * q0, 0.0)
    raise DomainError(f"unknown scan kind {kind!r}")


def _scan_point_kinematics(kind: str, e: float, abscissa: float) -> PairKinematics:
    if kind == "transverse":
        xi = abscissa
        return PairKinematics(
            e=e, q0=0.0, q_perp=xi, q_par=0.0, phi=opening_angle_for_xi(xi, e)
        )
    q0 = abscissa
    return PairKinematics(e=e, q0=q0, q_perp=0.0, q_par=abs(q0), phi=0.0)


def clip_grid_to_window(
    kind: str, e: float, grid: np.ndarray, window: TransparencyWindow
) -> np.ndarray:
    """Restrict a scan grid to detector-accessible kinematics: every photon
    energy inside the transparency window."""
    grid = np.asarray(grid, dtype=float)
    if kind == "transverse":
        xi_max = max_accessible_xi(e, window)
        return grid[grid <= xi_max]
    if not (window.min_ev < e < window.max_ev):
        raise DomainError(f"pair energy {e} eV outside the transparency window")
    q0_max = 2.0 * min(window.max_ev - e, e - window.min_ev)
    return grid[grid <= q0_max]


def _mc_point(
    source: GaussianSource,
    flow_shift: float,
    kin: PairKinematics,
    n_pairs: int,
    seed_seq: np.random.SeedSequence,
    lambda_max: float,
) -> tuple[float, float]:
    """Monte Carlo estimate of one scan point: sample emission points x, y
    from the (flow-weighted) profile and average 1 + lambda cos(q.(x-y))."""
    rng = np.random.default_rng(seed_seq)
    sig = source.sigma_r
    dtau = source.delta_tau
    # only coordinates entering the phase are drawn
    d_par = rng.normal(flow_shift, sig, n_pairs) - rng.normal(flow_shift, sig, n_pairs)
    d_perp = rng.normal(0.0, sig, n_pairs) - rng.normal(0.0, sig, n_pairs)
    d_t = rng.normal(0.0, dtau, n_pairs) - rng.normal(0.0, dtau, n_pairs)
    phase = (
        kin.q0 * C_NM_PER_FS * d_t - kin.q_par * d_par - kin.q_perp * d_perp
    ) / HBAR_C_EV_NM
    weights = 1.0 + lambda_max * np.cos(phase)
    value = float(weights.mean())
    stat = float(weights.std(ddof=1) / math.sqrt(n_pairs))
    return value, stat


def mc_correlator(
    source: GaussianSource,
    spectrum: Spectrum,
    flow: FlowBoost,
    kind: str,
    e: float,
    grid,
    n_pairs: int,
    seed: int,
    lambda_max: float = LAMBDA_MAX_CHAOTIC,
    n_workers: int = 1,
) -> ScanResult:
    """Monte Carlo scan: independent stochastic oracle for the deterministic
    correlator paths.

    Each grid point gets its own child stream spawned from the master seed, so
    results are bitwise reproducible for a fixed seed regardless of worker
    count. stat_error is the standard error of the pair weights.
    """
    if n_pairs < 10_000:
        raise DomainError("n_pairs must be >= 1e4 for a usable standard error")
    grid = np.asarray(grid, dtype=float)
    spectrum.check_domain(e)
    kins = [_scan_point_kinematics(kind, e, a) for a in grid]
    shift = flow_shift_nm(source, flow, e)
    seqs = np.random.SeedSequence(seed).spawn(len(kins))

    def job(i):
        return _mc_point(source, shift, kins[i], n_pairs, seqs[i], lambda_max)

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(job, range(len(kins))))
    else:
        results = [job(i) for i in range(len(kins))]

    points = [
        CorrelatorPoint(kinematics=k, value=v, stat_error=s)
        for k, (v, s) in zip(kins, results)
    ]
    return ScanResult(
        scan_kind=kind,
        e=e,
        points=points,
        source_label=source.label,
        meta={
            "engine": "mc",
            "seed": seed,
            "n_pairs": n_pairs,
            "n_workers": n_workers,
            "lambda_max": lambda_max,
            "spectrum": spectrum.label,
            "flow": f"{flow.profile} v/c={flow.v_over_c:g}",
        },
    )


def scan(
    kind: str,
    e: float,
    grid,
    *,
    radii: HbtRadii | None = None,
    source: GaussianSource | None = None,
    spectrum: Spectrum | None = None,
    flow: FlowBoost = NO_FLOW,
    engine: str = "analytic",
    mode: str = "on_shell_approx",
    apply_corrections: bool = False,
    lambda_max: float = LAMBDA_MAX_CHAOTIC,
    n_pairs: int = 100_000,
    seed: int = 12345,
    n_workers: int = 1,
    window: TransparencyWindow | None = None,
    source_label: str | None = None,
) -> ScanResult:
    """Produce a transverse or longitudinal correlator curve.

    The transverse grid is xi = 2 E tan(phi/2) in eV; the longitudinal grid is
    q0 in eV. Supply either composed radii (analytic engine) or a source
    (any engine). When a window is given the grid is clipped to accessible
    kinematics first; an empty accessible grid is a domain error.
    """
    if kind not in SCAN_KINDS:
        raise DomainError(f"unknown scan kind {kind!r}")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("scan grid must be a non-empty 1-d array")
    if window is not None:
        grid = clip_grid_to_window(kind, e, grid, window)
        if grid.size == 0:
            raise DomainError("no grid point is detector-accessible inside the window")

    label = source_label or (source.label if source is not None else "radii")
    meta = {"engine": engine, "mode": mode, "lambda_max": lambda_max}

    if engine == "mc":
        if source is None or spectrum is None:
            raise DomainError("mc engine needs a source and a spectrum")
        return mc_correlator(
            source, spectrum, flow, kind, e, grid, n_pairs, seed, lambda_max, n_workers
        )

    if engine == "analytic":
        if radii is None:
            if source is None:
                raise DomainError("analytic engine needs radii or a source")
            if spectrum is None:
                if apply_corrections or flow.active:
                    raise DomainError("corrections and flow need a spectrum")
                v = SpaceTimeVariances(
                    source.sigma_r**2, source.sigma_r**2, source.delta_tau**2
                )
            else:
                v = variances(source, spectrum, flow, e)
            corr = correction_terms(spectrum, e) if apply_corrections else (0.0, 0.0)
            radii = compose_radii(v, corr)
        points = [
            gaussian_correlator(radii, _scan_point_kinematics(kind, e, a), lambda_max)
            for a in grid
        ]
        meta["radii"] = f"R_perp={radii.r_perp:g}nm R_par={radii.r_par:g}nm"
        return ScanResult(kind, e, points, source_label=label, meta=meta)

    if engine == "quadrature":
        if source is None or spectrum is None:
            raise DomainError("quadrature engine needs a source and a spectrum")
        points = []
        for a in grid:
            ka, kb = pair_for_scan_point(kind, e, a)
            points.append(
                numeric_correlator(source, spectrum, flow, ka, kb, mode, lambda_max)
            )
        # replace the reconstructed kinematics with the canonical grid form so
        # transverse points carry exact q0 = 0 (vector recovery is exact here,
        # but keep the scan contract explicit)
        points = [
            CorrelatorPoint(
                kinematics=_scan_point_kinematics(kind, e, a),
                value=p.value,
                stat_error=p.stat_error,
            )
            for a, p in zip(grid, points)
        ]
        return ScanResult(kind, e, points, source_label=label, meta=meta)

    raise DomainError(f"unknown engine {engine!r}")


# ---------------------------------------------------------------------------
# CSV round trip
# ---------------------------------------------------------------------------

def scan_to_csv(
    result: ScanResult,
    path=None,
    deterministic: bool = False,
    config_echo: list[str] | None = None,
) -> str:
    """Serialize a scan to the toolkit CSV format.

    Header comments carry provenance as '# key = value' lines (plus optional
    resolved-config echo lines), then a fixed 'abscissa,value,stat_error'
    column header. Transverse abscissae are opening angles in rad with the
    xi grid [eV] reported alongside; longitudinal abscissae are q0 in eV.
    Floats are written with repr for a bit-exact round trip.
    """
    buf = io.StringIO()
    buf.write("# sonohbt scan v1\n")
    if not deterministic:
        buf.write(f"# created = {datetime.now(timezone.utc).isoformat()}\n")
    buf.write(f"# scan_kind = {result.scan_kind}\n")
    buf.write(f"# e_ev = {result.e!r}\n")
    buf.write(f"# source_label = {result.source_label}\n")
    for key, val in result.meta.items():
        buf.write(f"# {key} = {val}\n")
    for line in config_echo or []:
        buf.write(line.rstrip("\n") + "\n")
    unit = "rad" if result.scan_kind == "transverse" else "eV"
    buf.write(f"# abscissa_unit = {unit}\n")
    if result.scan_kind == "transverse":
        buf.write("# xi_ev = " + " ".join(repr(float(x)) for x in result.xi_values) + "\n")
    buf.write("abscissa,value,stat_error\n")
    for p, a in zip(result.points, result.abscissae):
        buf.write(f"{float(a)!r},{float(p.value)!r},{float(p.stat_error)!r}\n")
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def scan_from_csv(path_or_text) -> ScanResult:
    """Parse a scan CSV produced by scan_to_csv (or externally, in the same
    format) back into a ScanResult."""
    if isinstance(path_or_text, (str, Path)) and "\n" not in str(path_or_text):
        text = Path(path_or_text).read_text()
    else:
        text = str(path_or_text)
    header: dict[str, str] = {}
    xi_list: list[float] | None = None
    rows: list[tuple[float, float, float]] = []
    in_body = False
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, val = body.partition("=")
                key = key.strip()
                val = val.strip()
                if key == "xi_ev":
                    xi_list = [float(v) for v in val.split()]
                else:
                    header[key] = val
            continue
        if line.startswith("abscissa"):
            in_body = True
            continue
        if in_body:
            parts = line.split(",")
            if len(parts) != 3:
                raise DomainError(f"malformed scan CSV row: {line!r}")
            rows.append((float(parts[0]), float(parts[1]), float(parts[2])))
    if "scan_kind" not in header or "e_ev" not in header:
        raise DomainError("scan CSV missing scan_kind or e_ev header")
    kind = header["scan_kind"]
    e = float(header["e_ev"])
    points = []
    for i, (a, v, s) in enumerate(rows):
        if kind == "transverse":
            xi = xi_list[i] if xi_list is not None else 2.0 * e * math.tan(0.5 * a)
            kin = PairKinematics(e=e, q0=0.0, q_perp=xi, q_par=0.0, phi=a)
        else:
            kin = PairKinematics(e=e, q0=a, q_perp=0.0, q_par=abs(a), phi=0.0)
        points.append(CorrelatorPoint(kinematics=kin, value=v, stat_error=s))
    meta = {
        k: v
        for k, v in header.items()
        if k not in ("scan_kind", "e_ev", "source_label", "abscissa_unit", "created")
        and not k.startswith("cfg ")
    }
    return ScanResult(
        scan_kind=kind,
        e=e,
        points=points,
        source_label=header.get("source_label", ""),
        meta=meta,
    )
