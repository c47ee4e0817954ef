"""Run configuration: flat key = value blocks, file- and flag-overridable.

A run is fully reproducible from its RunConfig plus seed; every emitted file
embeds the resolved config as '# cfg <block>.<key> = <value>' lines, and the
loader accepts either an INI-style file or any emitted file carrying such
lines.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ConfigError

ENV_OUT_DIR = "SONOHBT_OUT_DIR"  # the only environment override: output directory


@dataclass
class SourceConfig:
    sigma_r_nm: float = 500.0
    delta_tau_fs: float = 0.0
    center_t_fs: float = 0.0
    flow_v_over_c: float = 0.0
    flow_profile: str = "none"
    flow_t_ev: float = 1.0


@dataclass
class SpectrumConfig:
    kind: str = "exponential"
    t_ev: float = 1.0
    alpha: float = 2.0
    table_path: str = ""


@dataclass
class DetectorConfig:
    e_ev: float = 3.0
    window_min_ev: float = 1.5
    window_max_ev: float = 6.0
    filter_lambda_nm: float = 0.0
    filter_dlambda_nm: float = 0.0
    filter_center_ev: float = 0.0
    filter_width_ev: float = 0.0
    filter_convention: str = "rms"
    min_opening_deg: float = 0.5
    aperture_deg: float = 0.5


@dataclass
class ScanConfig:
    kind: str = "transverse"
    xi_min_ev: float = 0.0
    xi_max_ev: float = 0.0   # 0 = use the accessible window edge
    q0_min_mev: float = 0.0
    q0_max_mev: float = 5.0
    points: int = 50
    rperp_nm: float = 0.0    # direct radii (0 = derive from the source)
    rpar_nm: float = 0.0
    rpar_ps: float = 0.0


@dataclass
class EngineConfig:
    path: str = "analytic"   # analytic | quadrature | mc
    mode: str = "on_shell_approx"
    n_pairs: int = 100_000
    seed: int = 12345
    n_workers: int = 1


@dataclass
class OutputConfig:
    out_dir: str = "."
    format: str = "csv"
    deterministic: bool = False


@dataclass
class RunConfig:
    source: SourceConfig = field(default_factory=SourceConfig)
    spectrum: SpectrumConfig = field(default_factory=SpectrumConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    engine: EngineConfig = field(default_factory=EngineConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    _BLOCKS = ("source", "spectrum", "detector", "scan", "engine", "output")

    def items(self):
        """(block, key, value) triples in declaration order."""
        for block in self._BLOCKS:
            section = getattr(self, block)
            for f in fields(section):
                yield block, f.name, getattr(section, f.name)

    def echo_lines(self) -> list[str]:
        return [f"# cfg {b}.{k} = {v}" for b, k, v in self.items()]

    def set_value(self, block: str, key: str, raw: str) -> None:
        if block not in self._BLOCKS:
            raise ConfigError(f"unknown config block [{block}]")
        section = getattr(self, block)
        for f in fields(section):
            if f.name == key:
                try:
                    if f.type in ("float", float):
                        value = float(raw)
                    elif f.type in ("int", int):
                        value = int(raw)
                    elif f.type in ("bool", bool):
                        value = str(raw).strip().lower() in ("1", "true", "yes", "on")
                    else:
                        value = str(raw)
                except ValueError as exc:
                    raise ConfigError(
                        f"bad value for {block}.{key}: {raw!r} ({exc})"
                    ) from exc
                setattr(section, key, value)
                return
        raise ConfigError(f"unknown config key {block}.{key}")

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        """Load from an INI-style config or from any emitted file that embeds
        '# cfg block.key = value' lines."""
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        text = path.read_text()
        if "# cfg " in text:
            return cls.from_embedded(text)
        cfg = cls()
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            parser.read_string(text, source=str(path))
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        for block in parser.sections():
            for key, raw in parser.items(block):
                cfg.set_value(block, key, raw)
        return cfg

    @classmethod
    def from_embedded(cls, text: str) -> "RunConfig":
        cfg = cls()
        found = False
        for line in text.splitlines():
            line = line.strip()
            if not line.startswith("# cfg "):
                continue
            body = line[len("# cfg "):]
            dotted, _, raw = body.partition("=")
            block, _, key = dotted.strip().partition(".")
            cfg.set_value(block, key.strip(), raw.strip())
            found = True
        if not found:
            raise ConfigError("no embedded '# cfg' lines found")
        return cfg

    def resolved_out_dir(self) -> Path:
        return Path(os.environ.get(ENV_OUT_DIR, self.output.out_dir))
