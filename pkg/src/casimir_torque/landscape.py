"""Energy landscape, torque and lateral force between two sinusoidal corrugations.

Plate j carries h_j(r) = a_j cos(k_j . r - k b_j) with |k_1| = |k_2| = k; theta is
the angle between k_1 and k_2 and plate 2 is a rectangle Lx x Ly. To second
order in the amplitudes the angle-dependent energy per unit area is

    dE / (Lx Ly) = (a1 a2 / 2) G(k) cos(k b) sinc(k Ly sin(theta) / 2)
                   * sum_{eps = +-1} sinc(k Lx (1 + eps cos(theta)) / 2),

    b = b2 cos(theta) - b1,

which for long corrugation lines (k Ly >> 1, small theta) reduces to

    dE / (Lx Ly) = (a1 a2 / 2) G(k) cos(k b) sinc(k Ly theta / 2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConsistencyError, OptimizationError, RegimeError
from .lifshitz import Material, PlaneGeometry
from .numerics import RESPONSE_QUADRATURE, QuadratureSpec, find_extremum
from .response import RegimeWarning, ResponseBackend, ResponseSample, response

GUARD_FRACTION = 0.3
LONG_LINE_MIN_KLY = 20.0
SMALL_ANGLE_MAX = 0.3  # rad
_SINC_SERIES_BELOW = 1e-4


def sinc(x):
    """sin(x)/x with a Taylor branch near 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _SINC_SERIES_BELOW
    safe = np.where(small, 1.0, x)
    x2 = x * x
    out = np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)
    return float(out) if out.ndim == 0 else out


def sinc_derivative(x):
    """d sinc / dx = (x cos x - sin x) / x^2."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _SINC_SERIES_BELOW
    safe = np.where(small, 1.0, x)
    out = np.where(small, -x / 3.0 + x ** 3 / 30.0, (safe * np.cos(safe) - np.sin(safe)) / safe ** 2)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=None)
def steepest_sinc_slope():
    """Location and value of the most negative slope of sinc on (0, pi)."""
    return find_extremum(sinc_derivative, (0.5, math.pi), mode="min", tol=1e-12)


@lru_cache(maxsize=None)
def first_sinc_minimum():
    return find_extremum(sinc, (math.pi, 2.0 * math.pi), mode="min", tol=1e-12)


def peak_torque_constants():
    """``(prefactor, angle_factor)`` with |tau|_max / (Lx Ly) = prefactor a1 a2 k |G| Ly
    reached at theta = angle_factor lambda_C / Ly (about 0.109 and 0.66)."""
    x, slope = steepest_sinc_slope()
    return abs(slope) / 4.0, x / math.pi


@dataclass(frozen=True)
class CorrugationPair:
    """Amplitudes a1, a2 (m), common wavenumber k = 2 pi / lambda_C (1/m), offsets b1, b2 (m)."""

    a1: float
    a2: float
    k: float
    b1: float = 0.0
    b2: float = 0.0

    def __post_init__(self):
        if not (self.a1 > 0 and self.a2 > 0):
            raise ValueError("corrugation amplitudes must be positive")
        if not self.k > 0:
            raise ValueError("corrugation wavenumber must be positive")

    @classmethod
    def from_wavelength(cls, a1, a2, lambda_c, b1=0.0, b2=0.0):
        return cls(a1, a2, 2.0 * math.pi / lambda_c, b1, b2)

    @property
    def lambda_c(self) -> float:
        return 2.0 * math.pi / self.k

    @property
    def amplitude_product(self) -> float:
        return self.a1 * self.a2


@dataclass(frozen=True)
class PlateExtent:
    Lx: float
    Ly: float

    def __post_init__(self):
        if not (self.Lx > 0 and self.Ly > 0):
            raise ValueError("plate extents must be positive")


@dataclass(frozen=True)
class Orientation:
    theta: float  # rad, unrestricted


@dataclass(frozen=True)
class TorqueResult:
    """Torque per unit plate area in N/m, the angle it refers to, and its provenance.

    Sign convention: a positive torque turns the plate toward smaller theta, so
    the torque is restoring and positive for small positive misalignments.
    """

    torque_per_area: float
    theta_at: float
    backend: ResponseBackend


def check_perturbative(a1, a2, L, lambda_c, lambda_p=None, guard_fraction=GUARD_FRACTION, force=False):
    """Reject amplitudes above ``guard_fraction`` of the smallest of L, lambda_C, lambda_P."""
    scales = [L, lambda_c] + ([lambda_p] if lambda_p is not None else [])
    limit = guard_fraction * min(scales)
    worst = max(a1, a2)
    if worst > limit:
        msg = (
            f"corrugation amplitude {worst:.4g} m exceeds {guard_fraction:g} x min(L, lambda_C, lambda_P) "
            f"= {limit:.4g} m; second-order perturbation theory does not apply"
        )
        if not force:
            raise RegimeError(msg)
        warnings.warn(msg, RegimeWarning, stacklevel=2)


def _check_sample(pair, G, guard_fraction, force):
    if not math.isclose(pair.k, G.k, rel_tol=1e-12):
        raise ConsistencyError(f"response sampled at k = {G.k!r}, corrugation has k = {pair.k!r}")
    check_perturbative(pair.a1, pair.a2, G.L, pair.lambda_c, G.lambda_p, guard_fraction, force)


def _in_long_line_regime(k, Ly, theta):
    return k * Ly >= LONG_LINE_MIN_KLY and np.all(np.abs(theta) <= SMALL_ANGLE_MAX)


# vectorized cores: b, theta may be arrays


def general_shape(theta, k, Lx, Ly):
    """sinc(k Ly sin(theta)/2) * sum_eps sinc(k Lx (1 + eps cos(theta))/2)."""
    theta = np.asarray(theta, dtype=float)
    cos_t = np.cos(theta)
    return sinc(0.5 * k * Ly * np.sin(theta)) * (
        sinc(0.5 * k * Lx * (1.0 + cos_t)) + sinc(0.5 * k * Lx * (1.0 - cos_t))
    )


def general_shape_derivative(theta, k, Lx, Ly):
    theta = np.asarray(theta, dtype=float)
    alpha, beta = 0.5 * k * Ly, 0.5 * k * Lx
    sin_t, cos_t = np.sin(theta), np.cos(theta)
    lateral_sum = sinc(beta * (1.0 + cos_t)) + sinc(beta * (1.0 - cos_t))
    lateral_sum_d = beta * sin_t * (sinc_derivative(beta * (1.0 - cos_t)) - sinc_derivative(beta * (1.0 + cos_t)))
    return alpha * cos_t * sinc_derivative(alpha * sin_t) * lateral_sum + sinc(alpha * sin_t) * lateral_sum_d


def normalized_landscape(b, theta, k, Ly):
    """Universal surface dE / ((a1 a2 / 2) |G| Lx Ly) for long lines, with G < 0."""
    b = np.asarray(b, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return -np.cos(k * b) * sinc(0.5 * k * Ly * theta)


def energy_general(
    pair: CorrugationPair,
    extent: PlateExtent,
    orient: Orientation,
    G: ResponseSample,
    guard_fraction: float = GUARD_FRACTION,
    force: bool = False,
) -> float:
    """Energy correction per unit area (J/m^2) for arbitrary theta and plate size."""
    _check_sample(pair, G, guard_fraction, force)
    theta = orient.theta
    b = pair.b2 * math.cos(theta) - pair.b1
    amp = 0.5 * pair.amplitude_product * G.G
    return float(amp * math.cos(pair.k * b) * general_shape(theta, pair.k, extent.Lx, extent.Ly))


def energy_long_lines(
    pair: CorrugationPair,
    extent: PlateExtent,
    orient: Orientation,
    G: ResponseSample,
    guard_fraction: float = GUARD_FRACTION,
    force: bool = False,
) -> float:
    """Long-line energy per unit area, J/m^2.

    The relative displacement is taken as b2 - b1: its cos(theta) correction is
    second order in the small angle. Outside k Ly >= 20, |theta| <= 0.3 rad the
    general expression is used instead, with a RegimeWarning.
    """
    if not _in_long_line_regime(pair.k, extent.Ly, orient.theta):
        warnings.warn(
            f"long-line formula outside its regime (k Ly = {pair.k * extent.Ly:.3g}, theta = {orient.theta:.3g}); "
            "using the general expression",
            RegimeWarning,
            stacklevel=2,
        )
        return energy_general(pair, extent, orient, G, guard_fraction, force)
    _check_sample(pair, G, guard_fraction, force)
    b = pair.b2 - pair.b1
    amp = 0.5 * pair.amplitude_product * G.G
    return float(amp * math.cos(pair.k * b) * sinc(0.5 * pair.k * extent.Ly * orient.theta))


def torque(
    pair: CorrugationPair,
    extent: PlateExtent,
    orient: Orientation,
    G: ResponseSample,
    guard_fraction: float = GUARD_FRACTION,
    force: bool = False,
) -> TorqueResult:
    """Torque per area (N/m) at fixed lateral offset.

    This is -d(dE)/d(theta) measured along decreasing theta, i.e. +d(dE)/d(theta),
    so that it is positive when it pulls a positive misalignment back to 0.
    """
    _check_sample(pair, G, guard_fraction, force)
    theta = orient.theta
    amp = 0.5 * pair.amplitude_product * G.G
    if _in_long_line_regime(pair.k, extent.Ly, theta):
        b = pair.b2 - pair.b1
        half = 0.5 * pair.k * extent.Ly
        slope = half * sinc_derivative(half * theta)
    else:
        warnings.warn("torque outside the long-line regime; differentiating the general expression",
                      RegimeWarning, stacklevel=2)
        b = pair.b2 * math.cos(theta) - pair.b1
        slope = general_shape_derivative(theta, pair.k, extent.Lx, extent.Ly)
    return TorqueResult(float(amp * math.cos(pair.k * b) * slope), theta, G.backend)


def lateral_force(
    pair: CorrugationPair,
    extent: PlateExtent,
    orient: Orientation,
    G: ResponseSample,
    formula: str = "general",
    guard_fraction: float = GUARD_FRACTION,
    force: bool = False,
) -> float:
    """Force per unit area along k_1, -d/db of the energy per area (N/m^2)."""
    _check_sample(pair, G, guard_fraction, force)
    theta = orient.theta
    if formula == "general":
        b = pair.b2 * math.cos(theta) - pair.b1
        shape = general_shape(theta, pair.k, extent.Lx, extent.Ly)
    elif formula == "long_lines":
        b = pair.b2 - pair.b1
        shape = sinc(0.5 * pair.k * extent.Ly * theta)
    else:
        raise ValueError(f"unknown energy formula {formula!r}")
    amp = 0.5 * pair.amplitude_product * G.G
    return float(amp * pair.k * math.sin(pair.k * b) * shape)


def _require_long_lines(pair, extent):
    if pair.k * extent.Ly < LONG_LINE_MIN_KLY:
        raise RegimeError(
            f"k Ly = {pair.k * extent.Ly:.3g} is below {LONG_LINE_MIN_KLY:g}; long-line results do not apply"
        )


def stability_threshold(pair: CorrugationPair, extent: PlateExtent) -> float:
    """Misalignment lambda_C / Ly at which the aligned energy well closes (first zero of the sinc)."""
    _require_long_lines(pair, extent)
    return pair.lambda_c / extent.Ly


def max_torque(
    pair: CorrugationPair,
    extent: PlateExtent,
    geom: PlaneGeometry,
    material: Material,
    backend: ResponseBackend = ResponseBackend.SCATTERING_PLASMA,
    spec: QuadratureSpec = RESPONSE_QUADRATURE,
    guard_fraction: float = GUARD_FRACTION,
    force: bool = False,
) -> TorqueResult:
    """Peak restoring torque per area over theta at aligned lateral position b = 0."""
    _require_long_lines(pair, extent)
    G = response(pair.k, geom, material, ResponseBackend(backend), spec)
    _check_sample(pair, G, guard_fraction, force)
    x, slope = steepest_sinc_slope()
    half = 0.5 * pair.k * extent.Ly
    magnitude = 0.5 * pair.amplitude_product * abs(G.G) * half * abs(slope)
    return TorqueResult(magnitude, x / half, G.backend)


def pfa_torque(
    pair: CorrugationPair,
    extent: PlateExtent,
    geom: PlaneGeometry,
    material: Material,
    guard_fraction: float = GUARD_FRACTION,
    force: bool = False,
) -> TorqueResult:
    return max_torque(pair, extent, geom, material, ResponseBackend.PFA,
                      guard_fraction=guard_fraction, force=force)


def optimize_corrugation_wavelength(
    geom: PlaneGeometry,
    material: Material,
    backend: ResponseBackend = ResponseBackend.SCATTERING_PLASMA,
    k_max: float | None = None,
    tol: float = 1e-6,
    spec: QuadratureSpec = RESPONSE_QUADRATURE,
    k_min: float | None = None,
) -> float:
    """Wavenumber (1/m) maximizing k |G(k)|, which the peak torque is proportional to.

    The search bracket defaults to [0.05, 10] / L.
    """
    backend = ResponseBackend(backend)
    if not backend.is_scattering:
        raise OptimizationError(
            f"backend {backend.value!r} has no interior maximum of k |G(k)|; use a scattering backend"
        )
    L = geom.L
    k_lo = 0.05 / L if k_min is None else float(k_min)
    k_hi = 10.0 / L if k_max is None else float(k_max)

    def objective(k):
        return k * abs(response(k, geom, material, backend, spec).G)

    probes = [objective(k) for k in np.linspace(k_lo, k_hi, 5)]
    if max(probes) == 0.0:
        raise OptimizationError("objective k |G(k)| vanishes on the whole bracket")
    return find_extremum(objective, (k_lo, k_hi), mode="max", tol=tol).location
