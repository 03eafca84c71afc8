# src/services/dtn.py
"""
Dirichlet-to-Neumann boundary terms on the top and bottom lines x2 = +-H.

zeta_n(k) = sqrt(k^2 - kappa_n^2) uses the square root with arg taken in
(-pi/2, 3pi/2), so the cut {-it : t >= 0} is excluded and evanescent
modes decay (zeta_n = i*sqrt(kappa_n^2 - k^2) for real k < |kappa_n|).

The truncated DtN block on one side is

    A[q, j] = sum_{|n| <= D_t} i*zeta_n(k) * d * conj(f_n[q]) * f_n[j]

with f_n[j] = (1/d) * int phi_j(x1) exp(-i kappa_n x1) dx1 over the side.
f_n depends only on (mesh, kappa, n); only the coefficients change with k.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import minimize_scalar

from src.models.errors import BranchCutHit
from src.models.mesh import Mesh

logger = logging.getLogger(__name__)

BRANCH_TOLERANCE = 1e-14
SERIES_SWITCH = 0.5
SERIES_TERMS = 20

Side = Literal["top", "bottom"]


class DtnSpec(BaseModel):
    """Bloch wavenumber, period and truncation order of the DtN map on one side"""

    model_config = ConfigDict(frozen=True)

    kappa: float
    d: float = Field(..., gt=0.0)
    D_t: int = Field(..., ge=0, description="Truncation order: modes |n| <= D_t")
    side: Side = "top"

    @model_validator(mode="after")
    def _check_kappa(self):
        if abs(self.kappa) > math.pi / self.d * (1 + 1e-12):
            raise ValueError(f"|kappa|={abs(self.kappa)} exceeds pi/d={math.pi / self.d}")
        return self

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.D_t, self.D_t + 1)

    @property
    def kappa_n(self) -> np.ndarray:
        return mode_wavenumbers(self.kappa, self.d, self.D_t)


def mode_wavenumbers(kappa: float, d: float, D_t: int) -> np.ndarray:
    """kappa_n = kappa + 2*pi*n/d for n = -D_t..D_t"""
    return kappa + 2.0 * math.pi * np.arange(-D_t, D_t + 1) / d


def anomaly_points(kappa: float, d: float, D_t: int) -> np.ndarray:
    """Branch points +-kappa_n of every zeta_n (Rayleigh anomalies)"""
    kn = mode_wavenumbers(kappa, d, D_t)
    return np.unique(np.concatenate([kn, -kn]))


# ============= ZETA =============


def zeta(k: complex, kappa_n: np.ndarray) -> np.ndarray:
    """Vectorized zeta_n(k); raises BranchCutHit for the first mode on the cut"""
    kappa_n = np.atleast_1d(np.asarray(kappa_n, dtype=float))
    k = complex(k)
    z = k * k - kappa_n**2
    scale = np.maximum(np.maximum(abs(k) ** 2, kappa_n**2), 1.0)
    on_cut = (z.imag <= BRANCH_TOLERANCE * scale) & (np.abs(z.real) <= BRANCH_TOLERANCE * scale)
    if on_cut.any():
        raise BranchCutHit(k, float(kappa_n[np.argmax(on_cut)]))
    angle = np.angle(z)
    angle = np.where(angle <= -math.pi / 2, angle + 2.0 * math.pi, angle)
    return np.sqrt(np.abs(z)) * np.exp(0.5j * angle)


def zeta_n(k: complex, kappa: float, n: int, d: float) -> complex:
    """zeta_n(k) = sqrt(k^2 - (kappa + 2*pi*n/d)^2) on the decaying branch"""
    return complex(zeta(k, kappa + 2.0 * math.pi * n / d)[0])


def dtn_coefficients(k: complex, kappa_n: np.ndarray, d: float) -> np.ndarray:
    """i * zeta_n(k) * d for every mode"""
    return 1j * zeta(k, kappa_n) * d


# ============= BOUNDARY FOURIER VECTORS =============


def side_dofs(mesh: Mesh, side: Side) -> np.ndarray:
    """Nodes on the x2 = +H (top) or x2 = -H (bottom) line, sorted by x1"""
    y = mesh.nodes[:, 1]
    target = y.max() if side == "top" else y.min()
    scale = max(float(y.max() - y.min()), 1e-300)
    dofs = np.flatnonzero(np.abs(y - target) <= 1e-12 * scale)
    return dofs[np.argsort(mesh.nodes[dofs, 0], kind="stable")]


def element_integrals(a: np.ndarray, b: np.ndarray, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Exact integrals over [a, b] of the two linear hats against exp(-i*beta*x).

    Returns (I_a, I_b) for the hat equal to 1 at a and at b respectively.
    Short elements (|beta|*L small) use the Taylor series to avoid
    cancellation.
    """
    a = np.asarray(a, dtype=float)
    L = np.asarray(b, dtype=float) - a
    phase = np.exp(-1j * beta * a)
    t = beta * L
    I_a = np.empty(a.shape, dtype=complex)
    I_b = np.empty(a.shape, dtype=complex)

    small = np.abs(t) < SERIES_SWITCH
    if small.any():
        m = np.arange(SERIES_TERMS)
        factorial = np.array([math.factorial(int(i)) for i in m], dtype=float)
        powers = (-1j * t[small, None]) ** m
        I_a[small] = L[small] * (powers / (factorial * (m + 1) * (m + 2))).sum(axis=1)
        I_b[small] = L[small] * (powers / (factorial * (m + 2))).sum(axis=1)
    big = ~small
    if big.any():
        e = np.exp(-1j * t[big])
        tail = (1.0 - e) / (beta**2 * L[big])
        I_a[big] = -1j / beta + tail
        I_b[big] = 1j * e / beta - tail
    return phase * I_a, phase * I_b


def fourier_matrix(x: np.ndarray, kappa_n: np.ndarray, d: float) -> np.ndarray:
    """
    Rows f_n for the piecewise-linear trace on nodes at sorted positions x.

    Shape (modes, len(x)); row n holds (1/d) * int phi_j exp(-i kappa_n x1).
    """
    a, b = x[:-1], x[1:]
    F = np.zeros((len(kappa_n), len(x)), dtype=complex)
    left, right = np.arange(len(x) - 1), np.arange(1, len(x))
    for row, beta in enumerate(kappa_n):
        I_a, I_b = element_integrals(a, b, float(beta))
        np.add.at(F[row], left, I_a)
        np.add.at(F[row], right, I_b)
    return F / d


def boundary_fourier_vector(mesh: Mesh, side: Side, n: int, kappa: float, d: float) -> np.ndarray:
    """f_n over all mesh nodes (zero away from the chosen side)"""
    dofs = side_dofs(mesh, side)
    if len(dofs) < 2:
        raise ValueError(f"mesh has no {side} boundary")
    f = np.zeros(mesh.n_nodes, dtype=complex)
    f[dofs] = fourier_matrix(mesh.nodes[dofs, 0], np.array([kappa + 2.0 * math.pi * n / d]), d)[0]
    return f


# ============= BLOCKS =============


@dataclass(frozen=True)
class SideTrace:
    """k-independent data of one side: boundary DOFs and the f_n rows"""

    side: Side
    dofs: np.ndarray
    F: np.ndarray  # (modes, len(dofs))


@dataclass(frozen=True)
class DtnBlock:
    """Low-rank DtN block U diag(c) V restricted to the side DOFs"""

    dofs: np.ndarray
    U: np.ndarray
    coefficients: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.coefficients))

    @property
    def dense(self) -> np.ndarray:
        return (self.U * self.coefficients) @ self.V


@lru_cache(maxsize=32)
def side_trace(mesh: Mesh, side: Side, kappa: float, d: float, D_t: int) -> SideTrace:
    dofs = side_dofs(mesh, side)
    if len(dofs) < 2:
        raise ValueError(f"mesh has no {side} boundary")
    F = fourier_matrix(mesh.nodes[dofs, 0], mode_wavenumbers(kappa, d, D_t), d)
    F.setflags(write=False)
    logger.debug(f"f_n cache built: side={side}, modes={2 * D_t + 1}, dofs={len(dofs)}")
    return SideTrace(side=side, dofs=dofs, F=F)


def dtn_block_from_trace(trace: SideTrace, spec: DtnSpec, k: complex) -> DtnBlock:
    coefficients = dtn_coefficients(k, spec.kappa_n, spec.d)
    return DtnBlock(dofs=trace.dofs, U=trace.F.conj().T, coefficients=coefficients, V=trace.F)


def assemble_dtn_block(mesh: Mesh, spec: DtnSpec, k: complex) -> DtnBlock:
    """A3(k) (top) or A4(k) (bottom) in low-rank form, with a densified view"""
    trace = side_trace(mesh, spec.side, float(spec.kappa), float(spec.d), int(spec.D_t))
    return dtn_block_from_trace(trace, spec, k)


# ============= BRANCH CUT GEOMETRY =============


def _distance_to_cut(point: complex, kappa_n: float) -> float:
    """
    Distance from point to the k-plane preimage of the cut for k > 0 side:
    the half-branch x = sqrt(kappa_n^2 + y^2), y <= 0.
    """

    def dist(y: float) -> float:
        return abs(point - complex(math.sqrt(kappa_n**2 + y * y), y))

    extent = abs(point) + abs(kappa_n) + 1.0
    grid = np.linspace(-extent, 0.0, 513)
    values = np.abs(point - (np.sqrt(kappa_n**2 + grid**2) + 1j * grid))
    best = int(np.argmin(values))
    lo, hi = grid[max(best - 1, 0)], grid[min(best + 1, len(grid) - 1)]
    if hi > lo:
        found = minimize_scalar(dist, bounds=(lo, hi), method="bounded")
        return float(min(values[best], found.fun))
    return float(values[best])


def branch_cut_distance(point: complex, kappa_n: float) -> float:
    """Distance to the whole preimage (both branches, mirrored through 0)"""
    return min(_distance_to_cut(complex(point), kappa_n), _distance_to_cut(-complex(point), kappa_n))


def branch_cut_hits_disk(center: complex, radius: float, kappa_n: np.ndarray) -> list[float]:
    """kappa_n values whose cut preimage meets the closed disk"""
    center = complex(center)
    # the preimage satisfies |k| >= |kappa_n|
    reachable = [float(kn) for kn in np.atleast_1d(kappa_n) if abs(kn) <= abs(center) + radius]
    return [kn for kn in reachable if branch_cut_distance(center, kn) <= radius]
