"""Casimir torque between sinusoidally corrugated metallic plates."""

from .errors import (
    BracketError,
    CasimirError,
    ConfigError,
    ConsistencyError,
    ConvergenceError,
    DomainError,
    OptimizationError,
    RegimeError,
)
from .landscape import (
    CorrugationPair,
    Orientation,
    PlateExtent,
    TorqueResult,
    energy_general,
    energy_long_lines,
    lateral_force,
    max_torque,
    optimize_corrugation_wavelength,
    pfa_torque,
    stability_threshold,
    torque,
)
from .lifshitz import GOLD, IDEAL, IdealMirror, PlaneGeometry, PlasmaMaterial, epp, epp_second_derivative
from .response import ResponseBackend, ResponseSample, response, rho

__all__ = [
    "BracketError", "CasimirError", "ConfigError", "ConsistencyError", "ConvergenceError", "DomainError",
    "OptimizationError", "RegimeError",
    "CorrugationPair", "Orientation", "PlateExtent", "TorqueResult", "energy_general", "energy_long_lines",
    "lateral_force", "max_torque", "optimize_corrugation_wavelength", "pfa_torque", "stability_threshold",
    "torque",
    "GOLD", "IDEAL", "IdealMirror", "PlaneGeometry", "PlasmaMaterial", "epp", "epp_second_derivative",
    "ResponseBackend", "ResponseSample", "response", "rho",
]
