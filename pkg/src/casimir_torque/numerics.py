"""Quadrature, extremum search and physical constants shared by the physics modules."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from numpy.polynomial.laguerre import laggauss
from numpy.polynomial.legendre import leggauss
from scipy import constants as _codata

from .errors import BracketError, ConvergenceError, DomainError


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = _codata.hbar  # J s
    c: float = _codata.c  # m / s

    def __post_init__(self):
        if not (self.hbar > 0 and self.c > 0):
            raise ValueError("physical constants must be positive")


CONSTANTS = PhysicalConstants()
HBAR = CONSTANTS.hbar
C = CONSTANTS.c

# Envelope level below which semi-infinite tails are dropped.
TAIL_CUTOFF = 1e-18


class SemiInfiniteTransform(Enum):
    EXPONENTIAL = "exponential-map"
    RATIONAL = "rational-map"


@dataclass(frozen=True)
class QuadratureSpec:
    relative_tolerance: float = 1e-9
    absolute_tolerance: float = 0.0
    max_subdivisions: int = 200
    semi_infinite_transform: SemiInfiniteTransform = SemiInfiniteTransform.EXPONENTIAL

    def __post_init__(self):
        if not 0.0 < self.relative_tolerance < 1.0:
            raise ValueError(f"relative_tolerance must lie in (0, 1), got {self.relative_tolerance}")
        if self.absolute_tolerance < 0.0:
            raise ValueError("absolute_tolerance must be non-negative")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


ENERGY_QUADRATURE = QuadratureSpec(relative_tolerance=1e-9)
RESPONSE_QUADRATURE = QuadratureSpec(relative_tolerance=1e-7, max_subdivisions=4)


class QuadResult(NamedTuple):
    value: float
    error: float


class Extremum(NamedTuple):
    location: float
    value: float


# 15-point Kronrod rule and its embedded 7-point Gauss rule on [-1, 1].
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS_W = np.zeros(15)
_GAUSS_W[1:7:2] = _WG[:3]
_GAUSS_W[7] = _WG[3]
_GAUSS_W[9:15:2] = _WG[2::-1]


def _gk15(f, a, b):
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _NODES
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    if not np.all(np.isfinite(y)):
        raise DomainError(f"non-finite integrand value on [{a!r}, {b!r}]")
    kronrod = half * float(np.dot(_KRONROD_W, y))
    gauss = half * float(np.dot(_GAUSS_W, y))
    # QUADPACK error heuristic
    mean = kronrod / (2.0 * half) if half else 0.0
    resasc = abs(half) * float(np.dot(_KRONROD_W, np.abs(y - mean)))
    err = abs(kronrod - gauss)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    resabs = abs(half) * float(np.dot(_KRONROD_W, np.abs(y)))
    eps = np.finfo(float).eps
    if resabs > np.finfo(float).tiny / (50 * eps):
        err = max(50 * eps * resabs, err)
    return kronrod, err


def integrate_finite(f: Callable, a: float, b: float, spec: QuadratureSpec = ENERGY_QUADRATURE) -> QuadResult:
    """Globally adaptive Gauss-Kronrod (7/15) quadrature of ``f`` on ``[a, b]``.

    ``f`` is called with a 1-D array of nodes and must return an array of the
    same shape. Interval bookkeeping is deterministic, and the final sum is an
    exactly rounded ``math.fsum``, so repeated calls are bit-identical.
    """
    value, err = _gk15(f, a, b)
    heap = [(-err, 0, a, b, value, err)]
    counter = 1
    tol = max(spec.relative_tolerance * abs(value), spec.absolute_tolerance)
    total_err = err
    while total_err > tol:
        if len(heap) >= spec.max_subdivisions:
            raise ConvergenceError(
                f"adaptive quadrature did not converge in {spec.max_subdivisions} subdivisions "
                f"(estimate {value!r}, error {total_err!r})",
                best=value,
                error=total_err,
            )
        _, _, lo, hi, _, _ = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        for sub_lo, sub_hi in ((lo, mid), (mid, hi)):
            v, e = _gk15(f, sub_lo, sub_hi)
            heapq.heappush(heap, (-e, counter, sub_lo, sub_hi, v, e))
            counter += 1
        value = math.fsum(item[4] for item in heap)
        total_err = math.fsum(item[5] for item in heap)
        tol = max(spec.relative_tolerance * abs(value), spec.absolute_tolerance)
    return QuadResult(value, total_err)


def integrate_semi_infinite(
    f: Callable, spec: QuadratureSpec = ENERGY_QUADRATURE, scale: float = 1.0
) -> QuadResult:
    """Integrate ``f`` over ``[0, inf)``.

    ``scale`` is the caller's decay length of the integrand (it should fall off
    at least like ``exp(-x/scale)``). The half line is mapped onto ``[0, 1)``
    with the transform selected in ``spec`` and truncated where ``exp(-x/scale)``
    drops below ``TAIL_CUTOFF``.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    x_cut = -scale * math.log(TAIL_CUTOFF)
    if spec.semi_infinite_transform is SemiInfiniteTransform.EXPONENTIAL:
        # u = exp(-x/scale): the cutoff is simply u = TAIL_CUTOFF
        def mapped(u):
            return f(-scale * np.log(u)) * scale / u
        return integrate_finite(mapped, TAIL_CUTOFF, 1.0, spec)

    def mapped(u):
        return f(scale * u / (1.0 - u)) * scale / (1.0 - u) ** 2
    return integrate_finite(mapped, 0.0, x_cut / (scale + x_cut), spec)


@lru_cache(maxsize=None)
def _legendre(n):
    return leggauss(n)


@lru_cache(maxsize=None)
def gauss_laguerre(n: int):
    """Nodes and weights for integrals of ``exp(-t) g(t)`` over ``[0, inf)``."""
    x, w = laggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def gauss_legendre_panels(edges, n: int):
    """Composite Gauss-Legendre rule with ``n`` nodes on each panel between consecutive ``edges``."""
    x, w = _legendre(n)
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x
    weights = 0.5 * (hi - lo) * w
    return nodes.ravel(), weights.ravel()


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def find_extremum(f: Callable[[float], float], bracket, mode: str = "max", tol: float = 1e-8) -> Extremum:
    """Golden-section search for the single extremum of ``f`` inside ``bracket``.

    The result lies within ``tol * (hi - lo)`` of the true extremum. If the search
    collapses onto an end of the bracket, the bracket holds no interior extremum
    of the requested kind and ``BracketError`` is raised.
    """
    if mode not in ("min", "max"):
        raise ValueError("mode must be 'min' or 'max'")
    lo, hi = float(bracket[0]), float(bracket[1])
    if not hi > lo:
        raise ValueError("bracket must be an increasing interval")
    sign = -1.0 if mode == "max" else 1.0

    def g(x):
        v = float(f(x))
        if math.isnan(v):
            raise DomainError(f"objective is NaN at {x!r}")
        return sign * v

    width = hi - lo
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = g(c), g(d)
    while (b - a) > tol * width:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = g(d)
    x = 0.5 * (a + b)
    fx = g(x)
    edge = 4.0 * tol * width
    if x - lo <= edge or hi - x <= edge:
        raise BracketError(
            f"no interior {mode}imum in [{lo!r}, {hi!r}]: search converged to the boundary at {x!r}",
            best=x,
        )
    return Extremum(x, sign * fx)
