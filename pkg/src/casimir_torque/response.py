"""Corrugation response function G(k) and the PFA ratio rho(k).

The second-order crossed energy between two corrugated plates is

    dE = int d^2K / (2 pi)^2  G(K) H1(K) H2(-K)

with H_j the Fourier transforms of the height profiles (positive heights
reduce the gap). Expanding the round-trip operator of the scattering formula
to first order in each profile gives

    G(K) = -hbar int_0^inf dxi/2pi int d^2k/(2pi)^2 exp(-(kappa + kappa') L)
           Tr[ D(k) R(k, k') D(k') R(k', k) ],      k' = k - K,

where D_p = 1 / (1 - r_p^2 exp(-2 kappa L)) resums the specular round trips and
R(k, k') is the first-order non-specular reflection matrix of one corrugated
mirror. Polarization bookkeeping lives in ``nonspecular_matrix``, which is the
single place the mirror physics enters.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import ConvergenceError, DomainError
from .lifshitz import (
    IDEAL,
    IdealMirror,
    Material,
    PlaneGeometry,
    PlasmaMaterial,
    epp_second_derivative,
    reflection_amplitudes,
)
from .numerics import C, HBAR, RESPONSE_QUADRATURE, QuadratureSpec, gauss_legendre_panels

# exp(-x) with x above this is below 1e-300 and treated as zero
_UNDERFLOW_EXPONENT = 690.0


class RegimeWarning(UserWarning):
    """An asymptotic formula was evaluated outside the regime where it applies."""


class ResponseBackend(Enum):
    PFA = "pfa"
    SCATTERING_PLASMA = "plasma"
    SCATTERING_IDEAL = "ideal"
    ASYMPTOTIC_IDEAL = "asym-ideal"
    ASYMPTOTIC_PLASMA_HIGHK = "asym-plasma"

    @property
    def is_scattering(self) -> bool:
        return self in (ResponseBackend.SCATTERING_PLASMA, ResponseBackend.SCATTERING_IDEAL)


@dataclass(frozen=True)
class ResponseSample:
    """G(k) in J/m^4 at wavenumber ``k`` (1/m) and separation ``L`` (m).

    ``scaled`` is ``G * exp(k L)``, which stays representable when G itself
    underflows. ``underflow`` marks an exact zero returned for that reason.
    """

    k: float
    G: float
    backend: ResponseBackend
    L: float
    lambda_p: Optional[float] = None
    scaled: Optional[float] = None
    error: float = 0.0
    underflow: bool = False

    def __post_init__(self):
        if not self.k >= 0:
            raise ValueError(f"wavenumber must be non-negative, got {self.k!r}")
        if self.G > 0:
            raise ValueError(f"response function must not be positive, got {self.G!r}")


# ---------------------------------------------------------------------------
# kernel


def _mirror_factors(kappa, q, material):
    """Auxiliary amplitudes used by the non-specular matrix.

    Returns ``(r_te, r_tm, a_te, a_tm, b_tm, c)`` with

        a_te = K_P (1 + r_TE),   a_tm = K_P (1 - r_TM) / q,
        b_tm = 1 + r_TM,         c = K_P^2 / (q^2 + K_P^2),

    written without cancellations and with finite perfect-mirror limits.
    """
    r_te, r_tm = reflection_amplitudes(kappa, q, material)
    if isinstance(material, IdealMirror):
        one = np.ones_like(r_te)
        return r_te, r_tm, 2.0 * kappa * one, 2.0 * q / kappa, 2.0 * one, one
    kp = material.plasma_wavenumber
    kappa_m = np.sqrt(kappa ** 2 + kp ** 2)
    den = kappa_m * q ** 2 + (q ** 2 + kp ** 2) * kappa
    a_te = 2.0 * kappa * kp / (kappa + kappa_m)
    a_tm = 2.0 * kappa_m * q * kp / den
    b_tm = 2.0 * (q ** 2 + kp ** 2) * kappa / den
    c = kp ** 2 / (q ** 2 + kp ** 2)
    return r_te, r_tm, a_te, a_tm, b_tm, c


def specular_matrix(kappa, q, material):
    """Specular reflection in the mirror-symmetric TE/TM basis used by the kernel.

    The TM basis vector of the downgoing wave is the z-mirror image of the
    upgoing one, so the TM entry is ``-r_TM`` of ``reflection_amplitudes`` and a
    perfect mirror has ``diag(-1, -1)``. Both mirrors then share one matrix.
    """
    r_te, r_tm = reflection_amplitudes(kappa, q, material)
    out = np.zeros(np.shape(r_te) + (2, 2))
    out[..., 0, 0] = r_te
    out[..., 1, 1] = -r_tm
    return out


def nonspecular_matrix(k_out, k_in, q, material):
    """First-order non-specular reflection matrix R(k_out, k_in) per unit height amplitude.

    ``k_out`` and ``k_in`` are transverse wavevectors with shape ``(..., 2)``;
    ``q = xi / c``. Row index is the outgoing polarization, column the incoming
    one, TE first. A wave of wavevector ``k_in`` incident on the surface
    ``z = h(r)`` is reflected into ``k_out`` with amplitude
    ``R(k_out, k_in) * H(k_out - k_in)`` to first order in ``h``.

    At ``k_out == k_in`` this reduces to ``2 kappa`` times the specular matrix,
    the change of reflection phase of a mirror shifted toward the cavity.
    """
    k_out = np.asarray(k_out, dtype=float)
    k_in = np.asarray(k_in, dtype=float)
    q = np.asarray(q, dtype=float)
    k1 = np.hypot(k_out[..., 0], k_out[..., 1])
    k2 = np.hypot(k_in[..., 0], k_in[..., 1])
    kappa1 = np.sqrt(k1 ** 2 + q ** 2)
    kappa2 = np.sqrt(k2 ** 2 + q ** 2)
    norm = k1 * k2
    safe = np.where(norm > 0, norm, 1.0)
    cos_phi = np.where(norm > 0, (k_out[..., 0] * k_in[..., 0] + k_out[..., 1] * k_in[..., 1]) / safe, 1.0)
    sin_phi = np.where(norm > 0, (k_out[..., 0] * k_in[..., 1] - k_out[..., 1] * k_in[..., 0]) / safe, 0.0)
    return _nonspecular(kappa1, kappa2, k1, k2, cos_phi, sin_phi, q, material)


def _nonspecular(kappa1, kappa2, k1, k2, cos_phi, sin_phi, q, material):
    return _nonspecular_from_factors(
        _mirror_factors(kappa1, q, material), _mirror_factors(kappa2, q, material),
        kappa1, kappa2, k1, k2, cos_phi, sin_phi,
    )


def _nonspecular_from_factors(f1, f2, kappa1, kappa2, k1, k2, cos_phi, sin_phi):
    _, _, a_te1, a_tm1, b_tm1, c = f1
    _, _, a_te2, a_tm2, b_tm2, _ = f2
    m = np.empty(np.broadcast(kappa1, kappa2, cos_phi).shape + (2, 2))
    m[..., 0, 0] = a_te1 * a_te2 * cos_phi
    m[..., 0, 1] = -kappa2 * a_te1 * a_tm2 * sin_phi
    m[..., 1, 0] = kappa1 * a_tm1 * a_te2 * sin_phi
    m[..., 1, 1] = kappa1 * kappa2 * a_tm1 * a_tm2 * cos_phi + c * k1 * k2 * b_tm1 * b_tm2
    m /= (-2.0 * kappa1)[..., None, None]
    return m


def _resolvent(r_te, r_tm, kappa, L):
    """(D_TE, D_TM) with D_p = 1 / (1 - r_p^2 exp(-2 kappa L))."""
    x = 2.0 * kappa * L
    decay = np.where(x > _UNDERFLOW_EXPONENT, 0.0, np.exp(-np.minimum(x, _UNDERFLOW_EXPONENT)))
    return 1.0 / (1.0 - r_te ** 2 * decay), 1.0 / (1.0 - r_tm ** 2 * decay)


def _trace(k1, k2, cos_phi, sin_phi, q, L, material):
    kappa1 = np.sqrt(k1 ** 2 + q ** 2)
    kappa2 = np.sqrt(k2 ** 2 + q ** 2)
    f1 = _mirror_factors(kappa1, q, material)
    f2 = _mirror_factors(kappa2, q, material)
    forward = _nonspecular_from_factors(f1, f2, kappa1, kappa2, k1, k2, cos_phi, sin_phi)
    backward = _nonspecular_from_factors(f2, f1, kappa2, kappa1, k2, k1, cos_phi, -sin_phi)
    d_te, d_tm = _resolvent(f1[0], f1[1], kappa1, L)
    dp_te, dp_tm = _resolvent(f2[0], f2[1], kappa2, L)
    # sum_{p p'} D_p(k) R_pp'(k, k') D_p'(k') R_p'p(k', k)
    return (
        d_te * dp_te * forward[..., 0, 0] * backward[..., 0, 0]
        + d_te * dp_tm * forward[..., 0, 1] * backward[..., 1, 0]
        + d_tm * dp_te * forward[..., 1, 0] * backward[..., 0, 1]
        + d_tm * dp_tm * forward[..., 1, 1] * backward[..., 1, 1]
    )


def kernel_trace(k_vec, kp_vec, q, L, material):
    """Tr[D(k) R(k, k') D(k') R(k', k)] at transverse wavevectors ``k``, ``k'`` and ``q = xi / c``."""
    k_vec = np.asarray(k_vec, dtype=float)
    kp_vec = np.asarray(kp_vec, dtype=float)
    q = np.asarray(q, dtype=float)
    k1 = np.hypot(k_vec[..., 0], k_vec[..., 1])
    k2 = np.hypot(kp_vec[..., 0], kp_vec[..., 1])
    norm = k1 * k2
    safe = np.where(norm > 0, norm, 1.0)
    cos_phi = np.where(norm > 0, (k_vec[..., 0] * kp_vec[..., 0] + k_vec[..., 1] * kp_vec[..., 1]) / safe, 1.0)
    sin_phi = np.where(norm > 0, (k_vec[..., 0] * kp_vec[..., 1] - k_vec[..., 1] * kp_vec[..., 0]) / safe, 0.0)
    return _trace(k1, k2, cos_phi, sin_phi, q, L, material)


# ---------------------------------------------------------------------------
# quadrature of the kernel
#
# With k = p + K/2 and k' = p - K/2 the decay exp(-(kappa + kappa') L) is constant
# on prolate spheroids in (p_x, p_y, q) space whose foci sit where kappa or kappa'
# vanish. Coordinates: s = (kappa + kappa')/2 in [K/2, inf), c = cos(nu) with
# kappa = s + K c / 2, kappa' = s - K c / 2, and psi the azimuth around the focal
# axis. The volume element is (s^2 - K^2 c^2 / 4) ds dc dpsi, and s = K/2 + t/(2L)
# turns the decay into exp(-K L) exp(-t); the t tail beyond _T_MAX is dropped.


_T_MAX = 64.0  # exp(-64) t^4 is far below double resolution of the integral


def _geometric_edges(first, last):
    edges = [0.0]
    x = first
    while x < last:
        edges.append(x)
        x *= 2.0
    edges.append(last)
    return edges


def _grid(kl, level):
    """Tensor rule for (t, c, psi). Both t and 1 - c are graded geometrically
    toward the focus, where the integrand varies on the scale t ~ kL (1 - c)."""
    n = 8 + 2 * level
    w0 = 1.0 / (8.0 * (kl + 1.0))
    w, w_w = gauss_legendre_panels(_geometric_edges(w0, 1.0), n)
    t0 = min(0.5, 8.0 * max(kl, 1e-3) * w0 * w0)
    t, w_t = gauss_legendre_panels(_geometric_edges(t0, _T_MAX), n)
    w_t = w_t * np.exp(-t)
    psi, w_psi = gauss_legendre_panels(np.linspace(0.0, 0.5 * math.pi, 3), n + 2)
    return (t, w_t), (1.0 - w, w_w), (psi, w_psi)


def _scaled_integral(kl, material_scaled, level):
    """Dimensionless integral I with G = -hbar c / (8 pi^3 L^5) exp(-kL) I, lengths in units of L."""
    (t, w_t), (c, w_c), (psi, w_psi) = _grid(kl, level)
    T = t[:, None, None]
    Cn = c[None, :, None]
    P = psi[None, None, :]
    s = 0.5 * kl + 0.5 * T
    rho_perp = np.sqrt(np.maximum(s ** 2 - 0.25 * kl ** 2, 0.0)) * np.sqrt(1.0 - Cn ** 2)
    px = s * Cn
    py = rho_perp * np.cos(P)
    q = rho_perp * np.sin(P)
    kx1 = px + 0.5 * kl
    kx2 = px - 0.5 * kl
    k1 = np.sqrt(kx1 ** 2 + py ** 2)
    k2 = np.sqrt(kx2 ** 2 + py ** 2)
    norm = np.where(k1 * k2 > 0, k1 * k2, 1.0)
    cos_phi = (kx1 * kx2 + py ** 2) / norm
    sin_phi = (kx1 * py - py * kx2) / norm
    trace = _trace(k1, k2, cos_phi, sin_phi, q, 1.0, material_scaled)
    volume = s ** 2 - 0.25 * kl ** 2 * Cn ** 2
    # factor 4: c in [-1, 0] and psi in [pi/2, pi] mirror the integrated octant
    return 4.0 * 0.5 * np.einsum("i,j,k,ijk->", w_t, w_c, w_psi, trace * volume)


def _material_in_units_of(material, L):
    if isinstance(material, IdealMirror):
        return material
    return PlasmaMaterial(material.lambda_p / L)


@lru_cache(maxsize=8192)
def _cached_scaled_response(k, L, lambda_p, rel_tol, abs_tol, max_levels):
    material = IDEAL if lambda_p is None else PlasmaMaterial(lambda_p)
    scaled_material = _material_in_units_of(material, L)
    kl = k * L
    prev = _scaled_integral(kl, scaled_material, 0)
    for level in range(1, max_levels + 1):
        cur = _scaled_integral(kl, scaled_material, level)
        err = abs(cur - prev)
        if err <= max(rel_tol * abs(cur), abs_tol):
            return float(cur), float(err)
        prev = cur
    raise ConvergenceError(
        f"response integral at kL = {kl!r} did not converge in {max_levels} refinements",
        best=cur,
        error=err,
    )


def clear_cache():
    _cached_scaled_response.cache_clear()


def _prefactor(L):
    return -HBAR * C / (8.0 * math.pi ** 3 * L ** 5)


def g_scattering(
    k: float, geom: PlaneGeometry, material: Material, spec: QuadratureSpec = RESPONSE_QUADRATURE
) -> ResponseSample:
    """Scattering-approach response G(k), J/m^4.

    Accuracy is controlled by refining the tensor-product rule until two
    successive levels agree to ``spec.relative_tolerance``; at most
    ``spec.max_subdivisions`` refinements are tried.
    """
    if not k >= 0:
        raise DomainError(f"wavenumber must be non-negative, got {k!r}")
    L = geom.L
    scaled_integral, err = _cached_scaled_response(
        float(k), float(L), material.lambda_p, spec.relative_tolerance,
        spec.absolute_tolerance, spec.max_subdivisions,
    )
    pref = _prefactor(L)
    scaled = pref * scaled_integral
    kl = k * L
    backend = ResponseBackend.SCATTERING_IDEAL if isinstance(material, IdealMirror) else ResponseBackend.SCATTERING_PLASMA
    if kl > _UNDERFLOW_EXPONENT:
        return ResponseSample(k, 0.0, backend, L, material.lambda_p, scaled, 0.0, underflow=True)
    decay = math.exp(-kl)
    return ResponseSample(k, scaled * decay, backend, L, material.lambda_p, scaled, abs(pref) * err * decay)


def g_pfa(k: float, geom: PlaneGeometry, material: Material) -> ResponseSample:
    """PFA response: the k-independent curvature e_PP''(L)."""
    if not k >= 0:
        raise DomainError(f"wavenumber must be non-negative, got {k!r}")
    g = epp_second_derivative(geom, material)
    kl = k * geom.L
    scaled = g * math.exp(kl) if kl <= _UNDERFLOW_EXPONENT else -math.inf
    return ResponseSample(k, g, ResponseBackend.PFA, geom.L, material.lambda_p, scaled)


def perfect_asymptote_scaled(kl):
    """Perfect-reflector large-k limit of rho exp(kL): (2/pi^4) (kL)^4."""
    return 2.0 / math.pi ** 4 * kl ** 4


def plasma_asymptote_scaled(kl):
    """Plasma limit of rho exp(kL) for k far above 2 pi / lambda_P: (5/2) kL."""
    return 2.5 * kl


def rho_perfect_asymptote(kl):
    return perfect_asymptote_scaled(kl) * math.exp(-kl)


def rho_plasma_asymptote(kl):
    return plasma_asymptote_scaled(kl) * math.exp(-kl)


def g_asymptotic_ideal(k: float, geom: PlaneGeometry) -> ResponseSample:
    kl = k * geom.L
    if kl < 3.0:
        warnings.warn(f"perfect-reflector asymptote used at kL = {kl:.3g} < 3", RegimeWarning, stacklevel=2)
    curvature = epp_second_derivative(geom, IDEAL)
    g = rho_perfect_asymptote(kl) * curvature
    return ResponseSample(k, g, ResponseBackend.ASYMPTOTIC_IDEAL, geom.L, None, perfect_asymptote_scaled(kl) * curvature)


def g_asymptotic_plasma_highk(k: float, geom: PlaneGeometry, material: PlasmaMaterial) -> ResponseSample:
    if not isinstance(material, PlasmaMaterial):
        raise TypeError("the high-k plasma asymptote needs a plasma material")
    if k <= material.plasma_wavenumber:
        warnings.warn(
            f"high-k plasma asymptote used at k = {k:.3g} 1/m <= 2 pi / lambda_P", RegimeWarning, stacklevel=2
        )
    kl = k * geom.L
    curvature = epp_second_derivative(geom, material)
    g = rho_plasma_asymptote(kl) * curvature
    return ResponseSample(k, g, ResponseBackend.ASYMPTOTIC_PLASMA_HIGHK, geom.L, material.lambda_p,
                          plasma_asymptote_scaled(kl) * curvature)


def _backend_material(backend, material):
    if backend in (ResponseBackend.SCATTERING_IDEAL, ResponseBackend.ASYMPTOTIC_IDEAL):
        return IDEAL
    if backend in (ResponseBackend.SCATTERING_PLASMA, ResponseBackend.ASYMPTOTIC_PLASMA_HIGHK):
        if not isinstance(material, PlasmaMaterial):
            raise TypeError(f"backend {backend.value!r} needs a plasma material")
    return material


def response(
    k: float,
    geom: PlaneGeometry,
    material: Material,
    backend: ResponseBackend,
    spec: QuadratureSpec = RESPONSE_QUADRATURE,
) -> ResponseSample:
    """G(k) from the requested backend. Ideal backends ignore ``material``."""
    backend = ResponseBackend(backend)
    material = _backend_material(backend, material)
    if backend is ResponseBackend.PFA:
        return g_pfa(k, geom, material)
    if backend.is_scattering:
        return g_scattering(k, geom, material, spec)
    if backend is ResponseBackend.ASYMPTOTIC_IDEAL:
        return g_asymptotic_ideal(k, geom)
    return g_asymptotic_plasma_highk(k, geom, material)


def rho(
    k: float,
    geom: PlaneGeometry,
    material: Material,
    backend: ResponseBackend,
    spec: QuadratureSpec = RESPONSE_QUADRATURE,
) -> float:
    """rho(k) = G(k) / e_PP''(L) for the backend's material."""
    backend = ResponseBackend(backend)
    sample = response(k, geom, material, backend, spec)
    curvature = epp_second_derivative(geom, _backend_material(backend, material))
    if curvature == 0:
        raise DomainError("plane-plane curvature vanishes")
    return sample.G / curvature


def rho_scaled(
    k: float,
    geom: PlaneGeometry,
    material: Material,
    backend: ResponseBackend,
    spec: QuadratureSpec = RESPONSE_QUADRATURE,
) -> float:
    """rho(k) exp(kL), finite even where rho itself underflows."""
    backend = ResponseBackend(backend)
    sample = response(k, geom, material, backend, spec)
    curvature = epp_second_derivative(geom, _backend_material(backend, material))
    return sample.scaled / curvature
