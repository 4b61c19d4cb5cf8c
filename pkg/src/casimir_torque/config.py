"""Run configuration: flat ``dotted.key = value`` files, nm lengths, SI conversion."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

from .errors import ConfigError
from .lifshitz import IDEAL, Material, PlaneGeometry, PlasmaMaterial
from .numerics import RESPONSE_QUADRATURE, QuadratureSpec
from .response import ResponseBackend

NM = 1e-9
FORMATS = ("csv", "json")


def _parse_bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float_list(text):
    return tuple(float(part) for part in text.split(",") if part.strip())


def _parse_count(text):
    value = float(text)
    if value != int(value):
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


def _parse_optional_str(text):
    text = text.strip()
    return None if text in ("", "-") else text


# dotted key -> (RunConfig attribute, parser)
_KEYS = {
    "material.model": ("material_model", str),
    "material.lambda_p_nm": ("lambda_p_nm", float),
    "geometry.separation_nm": ("separation_nm", float),
    "geometry.lx_nm": ("lx_nm", float),
    "geometry.ly_nm": ("ly_nm", float),
    "corrugation.a1_nm": ("a1_nm", float),
    "corrugation.a2_nm": ("a2_nm", float),
    "corrugation.lambda_c_nm": ("lambda_c_nm", float),
    "orientation.theta_rad": ("theta_rad", float),
    "landscape.b_min": ("landscape_b_min", float),
    "landscape.b_max": ("landscape_b_max", float),
    "landscape.b_points": ("landscape_b_points", _parse_count),
    "landscape.theta_min": ("landscape_theta_min", float),
    "landscape.theta_max": ("landscape_theta_max", float),
    "landscape.theta_points": ("landscape_theta_points", _parse_count),
    "distance.min_nm": ("distance_min_nm", float),
    "distance.max_nm": ("distance_max_nm", float),
    "distance.points": ("distance_points", _parse_count),
    "distance.fixed_lambda_c_nm": ("distance_fixed_lambda_c_nm", _parse_float_list),
    "wavenumber.kl_min": ("k_kl_min", float),
    "wavenumber.kl_max": ("k_kl_max", float),
    "wavenumber.points": ("k_points", _parse_count),
    "rho.kl_min": ("rho_kl_min", float),
    "rho.kl_max": ("rho_kl_max", float),
    "rho.points": ("rho_points", _parse_count),
    "lateral.b_min": ("lateral_b_min", float),
    "lateral.b_max": ("lateral_b_max", float),
    "lateral.b_points": ("lateral_b_points", _parse_count),
    "optimize.tol": ("optimize_tol", float),
    "run.backend": ("backend", str),
    "run.tol": ("tol", float),
    "run.format": ("format", str),
    "run.out": ("out", _parse_optional_str),
    "run.threads": ("threads", _parse_count),
    "run.force": ("force", _parse_bool),
    "run.guard_fraction": ("guard_fraction", float),
}
_ATTR_TO_KEY = {attr: key for key, (attr, _) in _KEYS.items()}

# not part of the data header: the output must not depend on it
_UNRECORDED = {"run.threads", "run.out"}


def default_threads():
    env = os.environ.get("CTL_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"CTL_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError("CTL_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True)
class RunConfig:
    """All run parameters. Lengths are in nm, landscape and lateral ranges are in
    units of lambda_C (b) and lambda_C / Ly (theta)."""

    material_model: str = "plasma"
    lambda_p_nm: float = 137.0
    separation_nm: float = 1000.0
    lx_nm: float = 24000.0
    ly_nm: float = 24000.0
    a1_nm: float = math.sqrt(200.0)
    a2_nm: float = math.sqrt(200.0)
    lambda_c_nm: float = 2400.0
    theta_rad: float = 0.0
    landscape_b_min: float = 0.0
    landscape_b_max: float = 2.0
    landscape_b_points: int = 41
    landscape_theta_min: float = -3.0
    landscape_theta_max: float = 3.0
    landscape_theta_points: int = 601
    distance_min_nm: float = 100.0
    distance_max_nm: float = 2000.0
    distance_points: int = 14
    distance_fixed_lambda_c_nm: tuple = (2400.0, 1200.0)
    k_kl_min: float = 1.0
    k_kl_max: float = 10.0
    k_points: int = 40
    rho_kl_min: float = 0.0
    rho_kl_max: float = 20.0
    rho_points: int = 41
    lateral_b_min: float = 0.0
    lateral_b_max: float = 2.0
    lateral_b_points: int = 81
    optimize_tol: float = 1e-6
    backend: str = "plasma"
    tol: float = RESPONSE_QUADRATURE.relative_tolerance
    format: str = "csv"
    out: str | None = None
    threads: int = field(default_factory=default_threads)
    force: bool = False
    guard_fraction: float = 0.3

    def __post_init__(self):
        positive = ("lambda_p_nm", "separation_nm", "lx_nm", "ly_nm", "a1_nm", "a2_nm", "lambda_c_nm",
                    "distance_min_nm", "distance_max_nm", "guard_fraction", "optimize_tol")
        for name in positive:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{_ATTR_TO_KEY[name]} must be positive, got {value!r}")
        if not self.distance_fixed_lambda_c_nm or min(self.distance_fixed_lambda_c_nm) <= 0:
            raise ConfigError("distance.fixed_lambda_c_nm must list positive wavelengths")
        if self.material_model not in ("plasma", "ideal"):
            raise ConfigError(f"material.model must be 'plasma' or 'ideal', got {self.material_model!r}")
        try:
            ResponseBackend(self.backend)
        except ValueError:
            choices = ", ".join(b.value for b in ResponseBackend)
            raise ConfigError(f"run.backend must be one of {choices}, got {self.backend!r}") from None
        if self.format not in FORMATS:
            raise ConfigError(f"run.format must be csv or json, got {self.format!r}")
        if not 0.0 < self.tol < 1.0:
            raise ConfigError(f"run.tol must lie in (0, 1), got {self.tol!r}")
        if self.threads < 1:
            raise ConfigError("run.threads must be >= 1")
        for prefix in ("landscape_b", "landscape_theta", "lateral_b"):
            self._check_range(getattr(self, prefix + "_min"), getattr(self, prefix + "_max"),
                              getattr(self, prefix + "_points"), prefix)
        self._check_range(self.distance_min_nm, self.distance_max_nm, self.distance_points, "distance")
        self._check_range(self.k_kl_min, self.k_kl_max, self.k_points, "k_kl")
        self._check_range(self.rho_kl_min, self.rho_kl_max, self.rho_points, "rho_kl")
        if self.k_kl_min < 0 or self.rho_kl_min < 0:
            raise ConfigError("wavenumber ranges must be non-negative")

    @staticmethod
    def _check_range(lo, hi, n, name):
        if n < 1:
            raise ConfigError(f"{name} range needs at least one point")
        if n > 1 and not hi > lo:
            raise ConfigError(f"{name} range is empty: max {hi!r} <= min {lo!r}")

    # SI views

    @property
    def material(self) -> Material:
        return IDEAL if self.material_model == "ideal" else PlasmaMaterial(self.lambda_p_nm * NM)

    @property
    def geometry(self) -> PlaneGeometry:
        return PlaneGeometry(self.separation_nm * NM)

    @property
    def response_backend(self) -> ResponseBackend:
        return ResponseBackend(self.backend)

    @property
    def quadrature(self) -> QuadratureSpec:
        return replace(RESPONSE_QUADRATURE, relative_tolerance=self.tol)

    def header_items(self):
        """Resolved ``(dotted key, text)`` pairs in a fixed order."""
        items = []
        for key, (attr, _) in _KEYS.items():
            if key in _UNRECORDED:
                continue
            value = getattr(self, attr)
            if isinstance(value, tuple):
                text = ",".join(format(v, ".9g") for v in value)
            elif isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, float):
                text = format(value, ".9g")
            else:
                text = str(value)
            items.append((key, text))
        return items


def parse_assignments(lines, source="<config>"):
    """Parse ``key = value`` lines into a dict of RunConfig attribute values."""
    values = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, text = (part.strip() for part in line.split("=", 1))
        values.update(_convert(key, text, f"{source}:{lineno}"))
    return values


def _convert(key, text, where):
    if key not in _KEYS:
        raise ConfigError(f"{where}: unknown key {key!r}")
    attr, parser = _KEYS[key]
    try:
        return {attr: parser(text)}
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key}: {exc}") from None


def load_config(path=None, overrides=None) -> RunConfig:
    """Build a RunConfig from an optional file plus ``{dotted key: text}`` overrides."""
    values = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                values.update(parse_assignments(fh, source=str(path)))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    for key, text in (overrides or {}).items():
        values.update(_convert(key, text, "command line"))
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def config_keys():
    return tuple(_KEYS)

