# src/services/assembly.py
"""
Frequency-dependent augmented operator

    G(k) = [[A(k), B^H], [B, 0]]
    A(k) = K_vac + K_metal / eps_m(k) - k^2 M - A3(k) - A4(k)

built from k-independent sparse blocks. Linear (P1) elements; the DtN
blocks A3/A4 come from cached Fourier traces of the top/bottom lines.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
import scipy.sparse as sp

from src.models.errors import ConfigError, DegenerateTriangle, NotHolomorphicAt
from src.models.materials import PermittivityModel
from src.models.mesh import METAL, VACUUM, Mesh
from src.services.dtn import (
    DtnSpec,
    SideTrace,
    anomaly_points,
    boundary_fourier_vector,
    dtn_coefficients,
    side_trace,
    zeta_n,
)
from src.services.export_services import ExportService
from src.services.linear_solve import FactorHandle, SparseLuHandle, WoodburyHandle
from src.services.materials import evaluate_permittivity, permittivity_poles, permittivity_zeros

logger = logging.getLogger(__name__)

DEGENERATE_AREA = 1e-14
DEFAULT_MARGIN = 1e-6

DtnMode = Literal["dense", "lowrank"]


# ============= ELEMENT MATRICES =============


def element_stiffness(nodes: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Local P1 stiffness matrices, shape (m, 3, 3)"""
    p = nodes[triangles]
    x, y = p[:, :, 0], p[:, :, 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area = 0.5 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    return (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (4.0 * area[:, None, None])


_MASS_PATTERN = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0


def element_mass(areas: np.ndarray) -> np.ndarray:
    """Local consistent P1 mass matrices, shape (m, 3, 3)"""
    return areas[:, None, None] * _MASS_PATTERN


def scatter(triangles: np.ndarray, local: np.ndarray, n: int) -> sp.csr_matrix:
    """Sum local (m, 3, 3) matrices into a global n x n sparse matrix"""
    rows = np.repeat(triangles, 3, axis=1).ravel()
    cols = np.tile(triangles, (1, 3)).ravel()
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def constraint_matrix(pairs: np.ndarray, n: int, kappa: float, d: float) -> sp.csr_matrix:
    """Row j: +1 at r_j and -exp(i kappa d) at l_j"""
    J = len(pairs)
    rows = np.concatenate([np.arange(J), np.arange(J)])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    values = np.concatenate([np.ones(J, dtype=complex), np.full(J, -np.exp(1j * kappa * d))])
    return sp.coo_matrix((values, (rows, cols)), shape=(J, n)).tocsr()


# ============= BLOCKS =============


@dataclass(frozen=True, eq=False)
class AssembledBlocks:
    """k-independent pieces of G(k) for one (mesh, kappa, D_t)"""

    mesh: Mesh
    kappa: float
    d: float
    D_t: int
    K_vac: sp.csr_matrix
    K_metal: sp.csr_matrix
    M: sp.csr_matrix
    B: sp.csr_matrix
    traces: dict[str, SideTrace] = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.mesh.n_nodes

    @property
    def J(self) -> int:
        return int(self.B.shape[0])

    @property
    def dimension(self) -> int:
        return self.N + self.J

    def spec(self, side: str) -> DtnSpec:
        return DtnSpec(kappa=self.kappa, d=self.d, D_t=self.D_t, side=side)


def assemble_blocks(mesh: Mesh, kappa: float, D_t: int = 0) -> AssembledBlocks:
    """Stiffness split by region, mass, constraint rows and DtN traces"""
    d = mesh.period
    DtnSpec(kappa=kappa, d=d, D_t=D_t)
    areas = mesh.areas
    if np.any(areas < DEGENERATE_AREA * mesh.region_area()):
        bad = int(np.argmin(areas))
        raise DegenerateTriangle(f"triangle {bad} has area {areas[bad]:.3e}")

    logger.info(f"🔧 Assembling blocks: N={mesh.n_nodes}, J={len(mesh.pairs)}, kappa={kappa:.6g}, D_t={D_t}")
    n = mesh.n_nodes
    K_local = element_stiffness(mesh.nodes, mesh.triangles)
    vac, metal = mesh.tags == VACUUM, mesh.tags == METAL
    blocks = AssembledBlocks(
        mesh=mesh,
        kappa=float(kappa),
        d=d,
        D_t=int(D_t),
        K_vac=scatter(mesh.triangles[vac], K_local[vac], n),
        K_metal=scatter(mesh.triangles[metal], K_local[metal], n),
        M=scatter(mesh.triangles, element_mass(areas), n),
        B=constraint_matrix(mesh.pairs, n, kappa, d),
        traces={side: side_trace(mesh, side, float(kappa), d, int(D_t)) for side in ("top", "bottom")},
    )
    return blocks


# ============= OPERATOR =============


class NepOperator:
    """
    G(k) for one assembled problem. Holomorphic away from the material
    poles and zeros and the Rayleigh anomalies +-kappa_n, |n| <= D_t.
    """

    def __init__(
        self,
        blocks: AssembledBlocks,
        material: PermittivityModel,
        dtn_mode: DtnMode = "dense",
        margin: float = DEFAULT_MARGIN,
    ):
        self.blocks = blocks
        self.material = material
        self.dtn_mode = dtn_mode
        self.margin = margin
        self._has_metal = blocks.K_metal.nnz > 0
        if self._has_metal and material.kind == "pec":
            raise ConfigError("PEC meshes carry no metal triangles", key="material.model")

    @property
    def dimension(self) -> int:
        return self.blocks.dimension

    @property
    def shape(self) -> tuple[int, int]:
        return (self.dimension, self.dimension)

    # --- holomorphy ---

    def singularities(self) -> list[tuple[str, complex]]:
        """Points where G is not holomorphic, tagged with the reason"""
        points: list[tuple[str, complex]] = []
        if self._has_metal:
            points += [("material_pole", p) for p in permittivity_poles(self.material)]
            points += [("material_zero", z) for z in permittivity_zeros(self.material)]
        b = self.blocks
        points += [("rayleigh_anomaly", complex(a)) for a in anomaly_points(b.kappa, b.d, b.D_t)]
        return points

    def check_holomorphic(self, k: complex) -> None:
        k = complex(k)
        for reason, point in self.singularities():
            if abs(k - point) < self.margin:
                raise NotHolomorphicAt(k, reason, near=point)

    def kappa_n(self) -> np.ndarray:
        return self.blocks.spec("top").kappa_n

    # --- evaluation ---

    def _sparse_part(self, k: complex) -> sp.csr_matrix:
        b = self.blocks
        A = b.K_vac.astype(complex) - (k * k) * b.M
        if self._has_metal:
            A = A + b.K_metal / evaluate_permittivity(self.material, k)
        return A

    def _dtn_factors(self, k: complex) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """(dofs, F, coefficients) per side; the block is conj(F).T diag(c) F"""
        b = self.blocks
        c = dtn_coefficients(k, self.kappa_n(), b.d)
        return [(t.dofs, t.F, c) for t in b.traces.values()]

    def _dtn_dense(self, k: complex) -> sp.csr_matrix:
        n = self.blocks.N
        total = sp.csr_matrix((n, n), dtype=complex)
        for dofs, F, c in self._dtn_factors(k):
            block = (F.conj().T * c) @ F
            rows = np.repeat(dofs, len(dofs))
            cols = np.tile(dofs, len(dofs))
            total = total + sp.coo_matrix((block.ravel(), (rows, cols)), shape=(n, n)).tocsr()
        return total

    def _augment(self, A: sp.spmatrix) -> sp.csc_matrix:
        B = self.blocks.B
        return sp.bmat([[A, B.conj().T], [B, None]], format="csc")

    def evaluate(self, k: complex) -> sp.csc_matrix:
        """G(k) as a sparse (N+J) x (N+J) matrix with the DtN blocks densified"""
        k = complex(k)
        self.check_holomorphic(k)
        return self._augment(self._sparse_part(k) - self._dtn_dense(k))

    def lowrank_terms(self, k: complex) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """G(k) = G_sparse(k) - P diag(c) Q with P, Q embedded in the full dimension"""
        dim = self.dimension
        P_cols, Q_rows, coeffs = [], [], []
        for dofs, F, c in self._dtn_factors(k):
            P = np.zeros((dim, F.shape[0]), dtype=complex)
            P[dofs] = F.conj().T
            Q = np.zeros((F.shape[0], dim), dtype=complex)
            Q[:, dofs] = F
            P_cols.append(P)
            Q_rows.append(Q)
            coeffs.append(c)
        return np.hstack(P_cols), np.concatenate(coeffs), np.vstack(Q_rows)

    def factorize(self, k: complex) -> FactorHandle:
        """LU of G(k); the low-rank mode factors only the sparse part"""
        k = complex(k)
        self.check_holomorphic(k)
        if self.dtn_mode == "lowrank":
            base = SparseLuHandle(self._augment(self._sparse_part(k)), k)
            P, c, Q = self.lowrank_terms(k)
            return WoodburyHandle(base, P, c, Q)
        return SparseLuHandle(self.evaluate(k), k)


# ============= CROSS-CHECKS =============


def direct_assembly(mesh: Mesh, material: PermittivityModel, kappa: float, D_t: int, k: complex) -> sp.csc_matrix:
    """
    G(k) assembled from scratch at one k: coefficient applied per element,
    DtN summed mode by mode. Independent of the cached block path.
    """
    k = complex(k)
    d = mesh.period
    n = mesh.n_nodes
    coefficient = np.ones(mesh.n_triangles, dtype=complex)
    if mesh.has_metal:
        coefficient[mesh.tags == METAL] = 1.0 / evaluate_permittivity(material, k)
    local = coefficient[:, None, None] * element_stiffness(mesh.nodes, mesh.triangles) - (k * k) * element_mass(mesh.areas)
    A = scatter(mesh.triangles, local, n).toarray()
    for side in ("top", "bottom"):
        for mode in range(-D_t, D_t + 1):
            f = boundary_fourier_vector(mesh, side, mode, kappa, d)
            A -= 1j * zeta_n(k, kappa, mode, d) * d * np.outer(f.conj(), f)
    B = constraint_matrix(mesh.pairs, n, kappa, d)
    return sp.bmat([[sp.csr_matrix(A), B.conj().T], [B, None]], format="csc")


def dump_matrix(op: NepOperator, k: complex, path: str | Path) -> Path:
    """Coordinate-format ASCII dump of G(k): row col re im"""
    return ExportService.export_matrix_coo(op.evaluate(k), path)


def dtn_block_dense(op: NepOperator, side: str, k: complex) -> np.ndarray:
    """Dense DtN block of one side over its boundary DOFs"""
    trace = op.blocks.traces[side]
    c = dtn_coefficients(k, op.kappa_n(), op.blocks.d)
    return (trace.F.conj().T * c) @ trace.F
