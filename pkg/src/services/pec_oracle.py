# src/services/pec_oracle.py
"""
Small-slit asymptotics for perfectly conducting gratings with rectangular
slits (slab thickness 1):

    k_m = m pi + 2 m pi [ (1/pi) delta ln(delta) + (1/alpha + gamma(m pi)) delta ]

with the lattice sum

    gamma(k) = (1/pi)(3 ln 2 + ln(pi/d)) - i/(d zeta_0)
               + sum_{n != 0} (1/(2 pi |n|) - i/(d zeta_n)).
"""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.models.errors import SeriesDiverged
from src.services.dtn import zeta, zeta_n

logger = logging.getLogger(__name__)

ALPHA = -1.1070218960566
MAX_TERMS = 10_000_000
FIRST_BLOCK = 64


class AsymptoticParams(BaseModel):
    """Inputs of the small-slit expansion"""

    model_config = ConfigDict(frozen=True)

    m: int = Field(..., ge=1, description="Mode index")
    kappa: float = Field(..., description="Bloch wavenumber")
    delta: float = Field(..., gt=0.0, lt=1.0, description="Slit width (slab thickness 1)")
    d: float = Field(..., gt=0.0, description="Period")
    series_tol: float = Field(default=1e-12, gt=0.0)


def paired_terms(k: float, kappa: float, d: float, n: np.ndarray) -> np.ndarray:
    """(+n) and (-n) terms of the lattice sum added together, n >= 1"""
    base = 1.0 / (math.pi * n)
    plus = zeta(k, kappa + 2.0 * math.pi * n / d)
    minus = zeta(k, kappa - 2.0 * math.pi * n / d)
    return base - 1j / (d * plus) - 1j / (d * minus)


def lattice_tail(k: float, kappa: float, d: float, series_tol: float = 1e-12) -> complex:
    """
    sum_{n>=1} of the paired terms. Pairing cancels the 1/n parts, so the
    paired terms decay like 1/n^3 and the tail after N terms like 1/N^2.
    Partial sums are doubled in length and extrapolated with
    S_inf ~ (4 S_2N - S_N) / 3 until two successive extrapolations agree
    to series_tol.
    """
    n_done = FIRST_BLOCK
    partial = complex(paired_terms(k, kappa, d, np.arange(1, n_done + 1)).sum())
    previous = None
    while n_done < MAX_TERMS:
        block = np.arange(n_done + 1, 2 * n_done + 1)
        doubled = partial + complex(paired_terms(k, kappa, d, block).sum())
        extrapolated = (4.0 * doubled - partial) / 3.0
        if previous is not None and abs(extrapolated - previous) < series_tol:
            logger.debug(f"lattice sum converged with {2 * n_done} terms")
            return extrapolated
        previous, partial, n_done = extrapolated, doubled, 2 * n_done
    raise SeriesDiverged(f"lattice sum did not reach tol={series_tol} within {MAX_TERMS} terms")


def gamma(k: float, kappa: float, d: float, series_tol: float = 1e-12) -> complex:
    """Lattice constant gamma(k, kappa, d) of the small-slit expansion"""
    head = (3.0 * math.log(2.0) + math.log(math.pi / d)) / math.pi
    return head - 1j / (d * zeta_n(k, kappa, 0, d)) + lattice_tail(k, kappa, d, series_tol)


def asymptotic_eigenvalue(params: AsymptoticParams) -> complex:
    """k_m up to the O(delta^2 ln^2 delta) remainder"""
    m, delta = params.m, params.delta
    g = gamma(m * math.pi, params.kappa, params.d, params.series_tol)
    return m * math.pi + 2.0 * m * math.pi * (delta * math.log(delta) / math.pi + (1.0 / ALPHA + g) * delta)


def asymptotic_eigenvalues(m_max: int, kappa: float, delta: float, d: float, series_tol: float = 1e-12) -> list[complex]:
    """k_1 .. k_{m_max}"""
    return [
        asymptotic_eigenvalue(AsymptoticParams(m=m, kappa=kappa, delta=delta, d=d, series_tol=series_tol))
        for m in range(1, m_max + 1)
    ]
