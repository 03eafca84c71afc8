# src/services/materials.py
"""
Permittivity evaluation for the metal models and conversion between
physical (SI) and scaled wavenumbers.
"""

import logging

import numpy as np

from src.models.errors import ConfigError, EvaluationAtSingularity
from src.models.materials import PermittivityModel, Scaling

logger = logging.getLogger(__name__)


def permittivity_poles(model: PermittivityModel) -> list[complex]:
    """Poles of eps(k): k=0 for Drude models, plus k=-i*gamma_hat when damped"""
    if not model.is_dispersive:
        return []
    poles = [0j]
    if model.kind == "drude_sommerfeld" and model.gamma_hat > 0:
        poles.append(-1j * model.gamma_hat)
    return poles


def permittivity_zeros(model: PermittivityModel) -> list[complex]:
    """
    Zeros of eps(k), where 1/eps in the stiffness term blows up.

    Roots of k^2 + i*gamma_hat*k - omega_p_hat^2 (lossless: +-omega_p_hat).
    """
    if not model.is_dispersive:
        return []
    roots = np.roots([1.0, 1j * model.gamma_hat, -model.omega_p_hat**2])
    return sorted((complex(r) for r in roots), key=lambda z: (z.real, z.imag))


def permittivity_singularities(model: PermittivityModel) -> tuple[list[complex], list[complex]]:
    return permittivity_poles(model), permittivity_zeros(model)


def evaluate_permittivity(model: PermittivityModel, k: complex) -> complex:
    """
    Relative permittivity eps(k) at the scaled wavenumber k.

    Drude-Sommerfeld uses eps = 1 - wp^2 / (k^2 + i*gamma*k), equivalent to
    1 - wp^2/(k^2+gamma^2) + i*gamma*wp^2/(k*(k^2+gamma^2)).
    """
    if model.kind == "vacuum":
        return 1.0 + 0j
    if model.kind == "pec":
        raise ConfigError("PEC has no permittivity; it removes the metal from the domain", key="material.model")

    k = complex(k)
    for pole in permittivity_poles(model):
        if abs(k - pole) < model.exclusion_radius:
            raise EvaluationAtSingularity(k, pole)

    wp2 = model.omega_p_hat**2
    if model.kind == "drude_lossless":
        return 1.0 - wp2 / k**2
    return 1.0 - wp2 / (k * (k + 1j * model.gamma_hat))


def scale_drude(omega_p: float, gamma: float, scaling: Scaling) -> tuple[float, float]:
    """Scaled plasma wavenumber and damping: (omega_p/(c*alpha), gamma/(c*alpha))"""
    if omega_p <= 0:
        raise ConfigError("plasma frequency must be positive", key="material.omega_p")
    if gamma < 0:
        raise ConfigError("damping must be non-negative", key="material.gamma")
    factor = scaling.c * scaling.alpha
    return omega_p / factor, gamma / factor


def scaled_to_angular_frequency(k_hat: complex, scaling: Scaling) -> complex:
    """omega = c * alpha * k_hat (1/s)"""
    return scaling.c * scaling.alpha * complex(k_hat)


def scaled_to_thz(k_hat: complex, scaling: Scaling) -> float:
    """Reporting helper: real part of omega in THz"""
    return scaled_to_angular_frequency(k_hat, scaling).real / 1e12
