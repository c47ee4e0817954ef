"""Command-line front end.

Subcommands: scan (correlator curves, with fig1/fig2 presets), intercept
(effective-intercept curve, fig3 preset), fit (extract radius/intercept from
a scan CSV), resolve (resolvability report). Exit codes: 0 success, 2 config
error, 3 domain error, 4 numerical error, 5 unfittable.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import correlator as corr
from . import extraction, filters
from .config import RunConfig
from .errors import (
    ApproximationBreakdownError,
    ChaoticityViolationError,
    ConfigError,
    DomainError,
    NumericalError,
    SonohbtError,
    UnfittableError,
)
from .kinematics import max_accessible_xi
from .moments import HbtRadii
from .source import (
    BlackbodySpectrum,
    ExponentialSpectrum,
    FlowBoost,
    GaussianSource,
    PowerLawSpectrum,
    TabulatedSpectrum,
)
from .units import C_NM_PER_FS, TransparencyWindow

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_NUMERICAL = 4
EXIT_UNFITTABLE = 5

FIG2_PULSE_PS = (0.1, 1.0, 10.0)
FIG1_RPERP_NM = (10.0, 100.0, 1000.0, 3000.0)


def _build_source(cfg: RunConfig) -> GaussianSource:
    s = cfg.source
    return GaussianSource(
        sigma_r=s.sigma_r_nm, delta_tau=s.delta_tau_fs, center_t=s.center_t_fs
    )


def _build_flow(cfg: RunConfig) -> FlowBoost:
    s = cfg.source
    return FlowBoost(
        v_over_c=s.flow_v_over_c, profile=s.flow_profile, temperature=s.flow_t_ev
    )


def _build_spectrum(cfg: RunConfig):
    sp = cfg.spectrum
    if sp.kind == "exponential":
        return ExponentialSpectrum(temperature=sp.t_ev)
    if sp.kind == "power_law":
        return PowerLawSpectrum(alpha=sp.alpha)
    if sp.kind == "blackbody":
        return BlackbodySpectrum(temperature=sp.t_ev)
    if sp.kind == "tabulated":
        if not sp.table_path:
            raise ConfigError("spectrum.kind = tabulated needs spectrum.table_path")
        return TabulatedSpectrum.from_file(sp.table_path)
    raise ConfigError(f"unknown spectrum kind {sp.kind!r}")


def _build_window(cfg: RunConfig) -> TransparencyWindow:
    return TransparencyWindow(cfg.detector.window_min_ev, cfg.detector.window_max_ev)


def _filter_delta_omega(cfg: RunConfig) -> float:
    d = cfg.detector
    if d.filter_width_ev > 0:
        return d.filter_width_ev
    if d.filter_lambda_nm > 0 and d.filter_dlambda_nm > 0:
        dw = filters.delta_omega_for_dlambda(d.filter_lambda_nm, d.filter_dlambda_nm)
        if d.filter_convention == "fwhm":
            dw /= filters.FWHM_OVER_RMS
        return dw
    return 1e-3  # default 1 meV rms


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(path)


def _direct_radii(cfg: RunConfig) -> HbtRadii | None:
    sc = cfg.scan
    rpar_nm = sc.rpar_nm if sc.rpar_nm > 0 else sc.rpar_ps * 1000.0 * C_NM_PER_FS
    if sc.rperp_nm > 0 or rpar_nm > 0:
        return HbtRadii.from_radii(r_perp_nm=sc.rperp_nm, r_par_nm=rpar_nm)
    return None


def _scan_grid(cfg: RunConfig, window: TransparencyWindow) -> np.ndarray:
    sc = cfg.scan
    e = cfg.detector.e_ev
    if sc.kind == "transverse":
        hi = sc.xi_max_ev if sc.xi_max_ev > 0 else max_accessible_xi(e, window)
        return np.linspace(sc.xi_min_ev, hi, sc.points)
    return np.linspace(sc.q0_min_mev, sc.q0_max_mev, sc.points) * 1e-3


def _run_one_scan(cfg: RunConfig, radii, out_path: Path) -> None:
    window = _build_window(cfg)
    grid = _scan_grid(cfg, window)
    kwargs = dict(
        engine=cfg.engine.path,
        mode=cfg.engine.mode,
        n_pairs=cfg.engine.n_pairs,
        seed=cfg.engine.seed,
        n_workers=cfg.engine.n_workers,
        window=window,
    )
    if radii is not None and cfg.engine.path == "analytic":
        result = corr.scan(
            cfg.scan.kind, cfg.detector.e_ev, grid, radii=radii, **kwargs
        )
    else:
        result = corr.scan(
            cfg.scan.kind,
            cfg.detector.e_ev,
            grid,
            source=_build_source(cfg),
            spectrum=_build_spectrum(cfg),
            flow=_build_flow(cfg),
            **kwargs,
        )
    text = corr.scan_to_csv(
        result,
        deterministic=cfg.output.deterministic,
        config_echo=cfg.echo_lines(),
    )
    _write(out_path, text)


def cmd_scan(cfg: RunConfig, figure: str | None) -> int:
    out_dir = cfg.resolved_out_dir()
    if figure == "fig1":
        cfg.detector.e_ev = 3.0
        cfg.scan.kind = "transverse"
        cfg.engine.path = "analytic"
        for r in FIG1_RPERP_NM:
            cfg.scan.rperp_nm = r
            cfg.scan.rpar_nm = 0.0
            cfg.scan.rpar_ps = 0.0
            _run_one_scan(
                cfg,
                HbtRadii.from_radii(r_perp_nm=r),
                out_dir / f"fig1_rperp_{r:g}nm.csv",
            )
        return EXIT_OK
    if figure == "fig2":
        cfg.detector.e_ev = 3.0
        cfg.scan.kind = "longitudinal"
        cfg.scan.q0_min_mev = 0.0
        cfg.scan.q0_max_mev = 10.0
        cfg.engine.path = "analytic"
        for tau_ps in FIG2_PULSE_PS:
            cfg.scan.rpar_ps = tau_ps
            cfg.scan.rperp_nm = 0.0
            rpar_nm = tau_ps * 1000.0 * C_NM_PER_FS
            _run_one_scan(
                cfg,
                HbtRadii.from_radii(r_par_nm=rpar_nm),
                out_dir / f"fig2_rpar_{tau_ps:g}ps.csv",
            )
        return EXIT_OK
    if figure is not None:
        raise ConfigError(f"unknown figure preset {figure!r} for scan")
    _run_one_scan(
        cfg, _direct_radii(cfg), out_dir / f"scan_{cfg.scan.kind}.csv"
    )
    return EXIT_OK


def cmd_intercept(cfg: RunConfig, args) -> int:
    out_dir = cfg.resolved_out_dir()
    if args.figure == "fig3":
        lambda_nm, dlambda_nm = 413.28, 1.0
        dtau_lo, dtau_hi, points = 1.0, 1e5, 181
    else:
        if args.lambda_nm is not None:
            cfg.detector.filter_lambda_nm = args.lambda_nm
        if args.dlambda_nm is not None:
            cfg.detector.filter_dlambda_nm = args.dlambda_nm
        lambda_nm = cfg.detector.filter_lambda_nm
        dlambda_nm = cfg.detector.filter_dlambda_nm
        if lambda_nm <= 0:
            raise ConfigError("intercept needs detector.filter_lambda_nm > 0")
        dtau_lo, dtau_hi, points = args.dtau_min_fs, args.dtau_max_fs, cfg.scan.points
    dtau = np.geomspace(dtau_lo, dtau_hi, points)
    curve = filters.intercept_curve(dlambda_nm, lambda_nm, dtau * C_NM_PER_FS)

    lines = ["# sonohbt intercept-curve v1"]
    lines += [f"# lambda_nm = {lambda_nm!r}", f"# dlambda_nm = {dlambda_nm!r}"]
    lines += [f"# delta_omega_ev = {curve.delta_omega!r}"]
    lines += [f"# knee_dtau_fs = {curve.knee_dtau_fs!r}"]
    lines += cfg.echo_lines()
    lines.append("dtau_fs,r_par_nm,intercept")
    for t, r, c in zip(curve.dtau_fs, curve.r_par_nm, curve.intercept):
        lines.append(f"{float(t)!r},{float(r)!r},{float(c)!r}")
    _write(out_dir / "intercept_curve.csv", "\n".join(lines) + "\n")

    report = {
        "lambda_nm": lambda_nm,
        "dlambda_nm": dlambda_nm,
        "delta_omega_ev": curve.delta_omega,
        "knee_dtau_fs": None if math.isinf(curve.knee_dtau_fs) else curve.knee_dtau_fs,
        "intercept_at_knee": None
        if math.isinf(curve.knee_dtau_fs)
        else filters.effective_intercept(
            curve.delta_omega, curve.knee_dtau_fs * C_NM_PER_FS
        ),
    }
    _write(out_dir / "intercept_report.json", json.dumps(report, indent=2) + "\n")
    return EXIT_OK


def cmd_fit(cfg: RunConfig, args) -> int:
    result = extraction.fit_scan(corr.scan_from_csv(args.scan_csv), args.method)
    out_dir = cfg.resolved_out_dir()
    stem = Path(args.scan_csv).stem
    _write(out_dir / f"fit_{stem}.txt", result.to_text())
    _write(out_dir / f"fit_{stem}.json", result.to_json() + "\n")
    sys.stdout.write(result.to_text())
    return EXIT_OK


def cmd_resolve(cfg: RunConfig, args) -> int:
    if args.rperp_nm is not None:
        cfg.source.sigma_r_nm = args.rperp_nm
    if args.dtau_fs is not None:
        cfg.source.delta_tau_fs = args.dtau_fs
    if args.domega_mev is not None:
        cfg.detector.filter_width_ev = args.domega_mev * 1e-3
    instrument = extraction.Instrument(
        min_opening_deg=cfg.detector.min_opening_deg,
        aperture_deg=cfg.detector.aperture_deg,
        delta_omega_ev=_filter_delta_omega(cfg),
    )
    reports = extraction.resolvability(
        sigma_r=cfg.source.sigma_r_nm,
        delta_tau=cfg.source.delta_tau_fs,
        e=cfg.detector.e_ev,
        window=_build_window(cfg),
        instrument=instrument,
    )
    out_dir = cfg.resolved_out_dir()
    text = "\n".join(r.to_text() for r in reports)
    _write(out_dir / "resolvability.txt", text)
    _write(
        out_dir / "resolvability.json",
        json.dumps([r.to_dict() for r in reports], indent=2) + "\n",
    )
    sys.stdout.write(text)
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file or emitted file with '# cfg' lines")
    p.add_argument("--out-dir", help="output directory (overrides config)")
    p.add_argument(
        "--deterministic",
        action="store_true",
        help="suppress the timestamp header for byte-identical reruns",
    )
    p.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="BLOCK.KEY=VALUE",
        help="override any config key",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sonohbt",
        description="Two-photon intensity-interferometry toolkit for small, "
        "short-lived chaotic light sources.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_scan = sub.add_parser("scan", help="emit correlator scan CSV(s)")
    _add_common(p_scan)
    p_scan.add_argument("--figure", choices=["fig1", "fig2"])
    p_scan.add_argument("--kind", choices=["transverse", "longitudinal"])
    p_scan.add_argument("--e-ev", type=float, dest="e_ev")
    p_scan.add_argument("--rperp-nm", type=float)
    p_scan.add_argument("--rpar-nm", type=float)
    p_scan.add_argument("--rpar-ps", type=float)
    p_scan.add_argument("--xi-min-ev", type=float)
    p_scan.add_argument("--xi-max-ev", type=float)
    p_scan.add_argument("--q0-min-mev", type=float)
    p_scan.add_argument("--q0-max-mev", type=float)
    p_scan.add_argument("--points", type=int)
    p_scan.add_argument("--engine", choices=["analytic", "quadrature", "mc"])
    p_scan.add_argument("--n-pairs", type=int)
    p_scan.add_argument("--seed", type=int)

    p_int = sub.add_parser("intercept", help="effective-intercept curve vs flash duration")
    _add_common(p_int)
    p_int.add_argument("--figure", choices=["fig3"])
    p_int.add_argument("--lambda-nm", type=float, dest="lambda_nm")
    p_int.add_argument("--dlambda-nm", type=float, dest="dlambda_nm")
    p_int.add_argument("--dtau-min-fs", type=float, default=1.0)
    p_int.add_argument("--dtau-max-fs", type=float, default=1e5)

    p_fit = sub.add_parser("fit", help="fit a scan CSV")
    _add_common(p_fit)
    p_fit.add_argument("scan_csv")
    p_fit.add_argument(
        "--method",
        choices=["linearized_log", "nonlinear_ls"],
        default="linearized_log",
    )

    p_res = sub.add_parser("resolve", help="resolvability report")
    _add_common(p_res)
    p_res.add_argument("--rperp-nm", type=float)
    p_res.add_argument("--dtau-fs", type=float)
    p_res.add_argument("--domega-mev", type=float)

    return parser


_SCAN_FLAG_MAP = {
    "kind": ("scan", "kind"),
    "e_ev": ("detector", "e_ev"),
    "rperp_nm": ("scan", "rperp_nm"),
    "rpar_nm": ("scan", "rpar_nm"),
    "rpar_ps": ("scan", "rpar_ps"),
    "xi_min_ev": ("scan", "xi_min_ev"),
    "xi_max_ev": ("scan", "xi_max_ev"),
    "q0_min_mev": ("scan", "q0_min_mev"),
    "q0_max_mev": ("scan", "q0_max_mev"),
    "points": ("scan", "points"),
    "engine": ("engine", "path"),
    "n_pairs": ("engine", "n_pairs"),
    "seed": ("engine", "seed"),
}


def _resolve_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    for item in args.set:
        dotted, _, raw = item.partition("=")
        if not _ or "." not in dotted:
            raise ConfigError(f"--set expects BLOCK.KEY=VALUE, got {item!r}")
        block, _, key = dotted.strip().partition(".")
        cfg.set_value(block, key, raw.strip())
    for flag, (block, key) in _SCAN_FLAG_MAP.items():
        val = getattr(args, flag, None)
        if val is not None:
            setattr(getattr(cfg, block), key, val)
    if args.out_dir:
        cfg.output.out_dir = args.out_dir
    if args.deterministic:
        cfg.output.deterministic = True
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        if args.command == "scan":
            return cmd_scan(cfg, args.figure)
        if args.command == "intercept":
            return cmd_intercept(cfg, args)
        if args.command == "fit":
            return cmd_fit(cfg, args)
        if args.command == "resolve":
            return cmd_resolve(cfg, args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, ChaoticityViolationError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (NumericalError, ApproximationBreakdownError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except UnfittableError as exc:
        print(f"unfittable: {exc}", file=sys.stderr)
        return EXIT_UNFITTABLE
    except SonohbtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    raise SystemExit(main())
