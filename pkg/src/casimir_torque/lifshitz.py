"""Plane-plane Casimir energy at zero temperature, plasma model and ideal mirrors.

All quantities are SI. Imaginary frequencies ``xi`` enter through ``q = xi / c``
(1/m), so that the vacuum decay constant is ``kappa = sqrt(K**2 + q**2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .errors import DomainError
from .numerics import C, ENERGY_QUADRATURE, HBAR, QuadratureSpec, gauss_legendre_panels, integrate_semi_infinite


@dataclass(frozen=True)
class PlasmaMaterial:
    """Metal with permittivity ``eps(i xi) = 1 + (omega_P / xi)**2``."""

    lambda_p: float  # plasma wavelength, m

    def __post_init__(self):
        if not self.lambda_p > 0:
            raise ValueError(f"plasma wavelength must be positive, got {self.lambda_p!r}")

    @property
    def plasma_wavenumber(self) -> float:
        """``omega_P / c = 2 pi / lambda_P`` in 1/m."""
        return 2.0 * math.pi / self.lambda_p


@dataclass(frozen=True)
class IdealMirror:
    """Perfect reflector. Kept apart from PlasmaMaterial so that lambda_P = 0 is never a sentinel."""

    lambda_p = None
    plasma_wavenumber = math.inf


IDEAL = IdealMirror()
GOLD = PlasmaMaterial(137e-9)

Material = Union[PlasmaMaterial, IdealMirror]


@dataclass(frozen=True)
class PlaneGeometry:
    L: float  # mean separation, m

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"separation must be positive, got {self.L!r}")


class Polarization(str, Enum):
    TE = "TE"
    TM = "TM"


def _is_ideal(material) -> bool:
    return isinstance(material, IdealMirror)


def reflection_amplitudes(kappa, q, material: Material):
    """Specular amplitudes ``(r_TE, r_TM)`` as functions of ``kappa`` and ``q``.

    Conventions: the TE amplitude is the ratio of reflected to incident
    electric field along ``z x K``; the TM amplitude is the ratio of magnetic
    fields. With these, a perfect mirror has ``r_TE = -1`` and ``r_TM = +1``.
    At imaginary frequency both are real with ``-1 <= r_TE <= 0 <= r_TM <= 1``.
    Only the product ``r_p**2`` enters the round trip between two identical
    mirrors, so both polarizations add with the same sign there.
    """
    kappa = np.asarray(kappa, dtype=float)
    q = np.asarray(q, dtype=float)
    if _is_ideal(material):
        shape = np.broadcast(kappa, q).shape
        return -np.ones(shape), np.ones(shape)
    kp2 = material.plasma_wavenumber ** 2
    kappa_m = np.sqrt(kappa ** 2 + kp2)
    r_te = (kappa - kappa_m) / (kappa + kappa_m)
    # eps * kappa written as (q**2 + Kp**2) * kappa / q**2, multiplied through by q**2
    num = (q ** 2 + kp2) * kappa
    r_tm = (num - q ** 2 * kappa_m) / (num + q ** 2 * kappa_m)
    return r_te, r_tm


def fresnel_reflection(K, xi, material: Material, polarization) -> float:
    """Fresnel amplitude at transverse wavenumber ``K`` (1/m) and imaginary frequency ``xi`` (rad/s)."""
    pol = Polarization(polarization)
    K_arr = np.asarray(K, dtype=float)
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(K_arr < 0) or np.any(xi_arr < 0):
        raise DomainError("K and xi must be non-negative")
    if np.any((K_arr == 0) & (xi_arr == 0)):
        raise DomainError("reflection amplitude undefined at K = xi = 0")
    q = xi_arr / C
    kappa = np.sqrt(K_arr ** 2 + q ** 2)
    r_te, r_tm = reflection_amplitudes(kappa, q, material)
    out = r_te if pol is Polarization.TE else r_tm
    return float(out) if out.ndim == 0 else out


# Polar angle theta in the (K, q) quarter plane: K = kappa cos(theta), q = kappa sin(theta).
# Panels are graded toward theta = 0 where the TM amplitude of a plasma varies fastest.
_THETA_NODES, _THETA_WEIGHTS = gauss_legendre_panels(
    0.5 * math.pi * np.array([0.0, 1 / 256, 1 / 64, 1 / 16, 1 / 4, 1.0]), 24
)
_COS_THETA_WEIGHTS = np.cos(_THETA_NODES) * _THETA_WEIGHTS


def _round_trip_factors(x, L, material):
    """``r_p**2 exp(-2 kappa L)`` for both polarizations on the (x = kappa L, theta) grid."""
    x = np.asarray(x, dtype=float)[:, None]
    if _is_ideal(material):
        X = np.exp(-2.0 * x) * np.ones_like(_THETA_NODES)
        return X, X
    kappa = x / L
    q = kappa * np.sin(_THETA_NODES)
    r_te, r_tm = reflection_amplitudes(kappa, q, material)
    decay = np.exp(-2.0 * x)
    return r_te ** 2 * decay, r_tm ** 2 * decay


def _energy_integrand(x, L, material):
    x = np.asarray(x, dtype=float)
    if _is_ideal(material):
        # closed-form angular integral: int_0^{pi/2} cos = 1, two polarizations
        return 2.0 * x ** 2 * np.log(-np.expm1(-2.0 * x))
    X_te, X_tm = _round_trip_factors(x, L, material)
    angular = np.log1p(-X_te) + np.log1p(-X_tm)
    return x ** 2 * (angular @ _COS_THETA_WEIGHTS)


def _curvature_integrand(x, L, material):
    x = np.asarray(x, dtype=float)
    if _is_ideal(material):
        X = np.exp(-2.0 * x)
        return 2.0 * 4.0 * x ** 4 * X / np.expm1(-2.0 * x) ** 2
    X_te, X_tm = _round_trip_factors(x, L, material)
    angular = X_te / (1.0 - X_te) ** 2 + X_tm / (1.0 - X_tm) ** 2
    return 4.0 * x ** 4 * (angular @ _COS_THETA_WEIGHTS)


def epp(geom: PlaneGeometry, material: Material, spec: QuadratureSpec = ENERGY_QUADRATURE) -> float:
    """Casimir energy per unit area between parallel plates, J/m^2.

    e_PP(L) = hbar c / (4 pi^2) int_0^inf dkappa kappa^2 int_0^{pi/2} dtheta cos(theta)
              sum_p ln(1 - r_p^2 exp(-2 kappa L))

    evaluated in the dimensionless variable ``x = kappa L``.
    """
    L = geom.L
    res = integrate_semi_infinite(lambda x: _energy_integrand(x, L, material), spec, scale=0.5)
    value = HBAR * C / (4.0 * math.pi ** 2 * L ** 3) * res.value
    if not value < 0:
        raise DomainError(f"non-negative plane-plane energy {value!r}; integration failed")
    return value


def epp_second_derivative(
    geom: PlaneGeometry, material: Material, spec: QuadratureSpec = ENERGY_QUADRATURE
) -> float:
    """d^2 e_PP / dL^2 in J/m^4, by differentiating the Lifshitz integrand twice in L.

    The reflection amplitudes do not depend on L, so each ln(1 - X) with
    ``X = r^2 exp(-2 kappa L)`` turns into ``-4 kappa^2 X / (1 - X)^2``.
    """
    L = geom.L
    res = integrate_semi_infinite(lambda x: _curvature_integrand(x, L, material), spec, scale=0.5)
    value = -HBAR * C / (4.0 * math.pi ** 2 * L ** 5) * res.value
    if not value < 0:
        raise DomainError(f"non-negative energy curvature {value!r}; integration failed")
    return value


def ideal_epp_closed_form(L: float) -> float:
    return -math.pi ** 2 * HBAR * C / (720.0 * L ** 3)


def ideal_epp_second_derivative_closed_form(L: float) -> float:
    return -math.pi ** 2 * HBAR * C / (60.0 * L ** 5)
