"""Run configuration: INI-style file with one section per concern.

Example::

    [potential]
    name = sine_gordon

    [wave]
    c = 1.45
    E = 6.0
    nodes = 1024

    [hill]
    nu_min = auto          ; -(40/T)^2 once T is known
    scan_step = auto       ; (pi/T)/16 in sqrt(-nu)

    [hh]
    scan_step = auto
    c4_depth = 0.0

    [spectrum]
    re_min = -1.0
    re_max = 1.0
    im_min = 0.0
    im_max = auto          ; covers all axis bands with nu >= nu_min
    nx = 512
    ny = 512

    [curve]
    samples = 2000

    [output]
    directory = .
    format = json

Polynomial potentials take ``name = polynomial`` and a ``coefficients`` key
with whitespace-separated values c0 c1 c2 ...
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from .errors import ConfigError
from .potentials import Potential, polynomial, sine_gordon

__all__ = ["RunConfig", "load_config", "default_config"]

_AUTO = "auto"


@dataclass
class RunConfig:
    """Validated run configuration with 'auto' defaults left unresolved.

    ``nu_min``, scan steps and the spectrum window depend on the wave period
    T and are resolved by the commands once T is known (``resolve_*``
    helpers)."""

    potential_name: str = "sine_gordon"
    potential_coefficients: Tuple[float, ...] = ()
    c: float = 1.45
    e: float = 6.0
    nodes: int = 1024
    nu_min: Optional[float] = None
    hill_scan_step: Optional[float] = None
    hh_scan_step: Optional[float] = None
    c4_depth: float = 0.0
    re_min: float = -1.0
    re_max: float = 1.0
    im_min: float = 0.0
    im_max: Optional[float] = None
    nx: int = 512
    ny: int = 512
    curve_samples: int = 2000
    out_dir: str = "."
    out_format: str = "json"
    threads: int = 1

    def validate(self):
        if self.c * self.c == 1.0 or abs(self.c * self.c - 1.0) <= 1e-12:
            raise ConfigError("wave speed c too close to +-1")
        for name in ("c", "e", "re_min", "re_max", "im_min", "c4_depth"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        if self.nodes < 256:
            raise ConfigError("wave.nodes must be at least 256")
        if self.nx < 64 or self.ny < 64:
            raise ConfigError("spectrum grid must be at least 64x64")
        if self.out_format not in ("csv", "json"):
            raise ConfigError(f"unknown output format {self.out_format!r}")
        if self.nu_min is not None and self.nu_min >= 0:
            raise ConfigError("hill.nu_min must be negative")
        if self.curve_samples < 16:
            raise ConfigError("curve.samples must be at least 16")
        return self

    def build_potential(self) -> Potential:
        if self.potential_name == "sine_gordon":
            return sine_gordon()
        if self.potential_name == "polynomial":
            if not self.potential_coefficients:
                raise ConfigError("polynomial potential needs coefficients")
            return polynomial(self.potential_coefficients)
        raise ConfigError(f"unknown potential {self.potential_name!r}")

    def resolve_nu_min(self, T: float) -> float:
        return self.nu_min if self.nu_min is not None else -((40.0 / T) ** 2)

    def resolve_im_max(self, T: float) -> float:
        if self.im_max is not None:
            return self.im_max
        nu_min = self.resolve_nu_min(T)
        return abs(self.c * self.c - 1.0) * math.sqrt(-nu_min)

    def echo(self) -> Dict[str, Dict[str, str]]:
        """Exact-rerun record of the configuration (auto fields as 'auto')."""

        def fmt(x):
            return _AUTO if x is None else repr(x)

        pot = {"name": self.potential_name}
        if self.potential_coefficients:
            pot["coefficients"] = " ".join(repr(v) for v
                                           in self.potential_coefficients)
        return {
            "potential": pot,
            "wave": {"c": repr(self.c), "E": repr(self.e),
                     "nodes": str(self.nodes)},
            "hill": {"nu_min": fmt(self.nu_min),
                     "scan_step": fmt(self.hill_scan_step)},
            "hh": {"scan_step": fmt(self.hh_scan_step),
                   "c4_depth": repr(self.c4_depth)},
            "spectrum": {"re_min": repr(self.re_min),
                         "re_max": repr(self.re_max),
                         "im_min": repr(self.im_min),
                         "im_max": fmt(self.im_max),
                         "nx": str(self.nx), "ny": str(self.ny)},
            "curve": {"samples": str(self.curve_samples)},
            "output": {"directory": self.out_dir, "format": self.out_format},
        }


def default_config() -> RunConfig:
    return RunConfig()


def _get(parser, section, key, conv, default, auto_ok=False):
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key).strip()
    if auto_ok and raw.lower() == _AUTO:
        return None
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc


def load_config(path: str) -> RunConfig:
    """Parse and validate a configuration file."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")

    cfg = RunConfig()
    cfg.potential_name = _get(parser, "potential", "name", str, cfg.potential_name)
    coeffs_raw = _get(parser, "potential", "coefficients", str, "")
    if coeffs_raw:
        try:
            cfg.potential_coefficients = tuple(float(v) for v in coeffs_raw.split())
        except ValueError as exc:
            raise ConfigError(f"bad polynomial coefficients: {exc}") from exc

    cfg.c = _get(parser, "wave", "c", float, cfg.c)
    cfg.e = _get(parser, "wave", "e", float, cfg.e)
    cfg.nodes = _get(parser, "wave", "nodes", int, cfg.nodes)

    cfg.nu_min = _get(parser, "hill", "nu_min", float, cfg.nu_min, auto_ok=True)
    cfg.hill_scan_step = _get(parser, "hill", "scan_step", float,
                              cfg.hill_scan_step, auto_ok=True)
    cfg.hh_scan_step = _get(parser, "hh", "scan_step", float,
                            cfg.hh_scan_step, auto_ok=True)
    cfg.c4_depth = _get(parser, "hh", "c4_depth", float, cfg.c4_depth)

    cfg.re_min = _get(parser, "spectrum", "re_min", float, cfg.re_min)
    cfg.re_max = _get(parser, "spectrum", "re_max", float, cfg.re_max)
    cfg.im_min = _get(parser, "spectrum", "im_min", float, cfg.im_min)
    cfg.im_max = _get(parser, "spectrum", "im_max", float, cfg.im_max,
                      auto_ok=True)
    cfg.nx = _get(parser, "spectrum", "nx", int, cfg.nx)
    cfg.ny = _get(parser, "spectrum", "ny", int, cfg.ny)

    cfg.curve_samples = _get(parser, "curve", "samples", int, cfg.curve_samples)

    cfg.out_dir = _get(parser, "output", "directory", str, cfg.out_dir)
    cfg.out_format = _get(parser, "output", "format", str, cfg.out_format).lower()
    return cfg.validate()
