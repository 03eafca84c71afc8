# src/services/eigenfunctions.py
"""
Eigenfunction post-processing: localisation classification and field export.
"""

import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
import shapely
from shapely.geometry import MultiLineString

from src.models.geometry import GratingGeometry
from src.models.mesh import Mesh
from src.services.mesh_io import export_field

logger = logging.getLogger(__name__)

Label = Literal["cavity", "surface-plasmon", "unclassified"]

SHELL_FRACTION = 0.05
MAJORITY = 0.5


@dataclass(frozen=True)
class Classification:
    label: Label
    surface_fraction: float
    slit_fraction: float


def field_part(mesh: Mesh, eigvec: np.ndarray) -> np.ndarray:
    """Nodal values u of an N+J eigenvector, or of a plain length-N field"""
    eigvec = np.asarray(eigvec, dtype=complex).ravel()
    if eigvec.size not in (mesh.n_nodes, mesh.n_nodes + len(mesh.pairs)):
        raise ValueError(
            f"eigenvector has {eigvec.size} entries, mesh needs {mesh.n_nodes} or {mesh.n_nodes + len(mesh.pairs)}"
        )
    return eigvec[: mesh.n_nodes]


def lumped_weights(mesh: Mesh) -> np.ndarray:
    """Row sums of the P1 mass matrix: a third of each adjacent triangle's area"""
    return np.bincount(mesh.triangles.ravel(), weights=np.repeat(mesh.areas / 3.0, 3), minlength=mesh.n_nodes)


def metal_surface(geometry: GratingGeometry) -> MultiLineString | None:
    """Slab faces and slit walls; the periodic cut lines x=0, x=d are not surface"""
    if not geometry.has_slab:
        return None
    lo, hi = -geometry.ell / 2, geometry.ell / 2
    slit = geometry.slit_polygon()
    if slit is None:
        return MultiLineString([[(0.0, lo), (geometry.d, lo)], [(0.0, hi), (geometry.d, hi)]])
    bl, br, tr, tl = slit
    return MultiLineString(
        [
            [(0.0, lo), bl],
            [br, (geometry.d, lo)],
            [(0.0, hi), tl],
            [tr, (geometry.d, hi)],
            [bl, tl],
            [br, tr],
        ]
    )


def slit_box_mask(geometry: GratingGeometry, points: np.ndarray) -> np.ndarray:
    if geometry.slit is None:
        return np.zeros(len(points), dtype=bool)
    half = geometry.slit.max_width / 2
    x, y = points[:, 0], points[:, 1]
    return (np.abs(x - geometry.d / 2) <= half) & (np.abs(y) <= geometry.ell / 2)


def classify(
    mesh: Mesh,
    eigvec: np.ndarray,
    geometry: GratingGeometry,
    shell: float = SHELL_FRACTION,
    majority: float = MAJORITY,
) -> Classification:
    """
    Label a mode by where its |u|^2 mass sits: inside the slit bounding box
    (cavity) or in a shell of width shell*d around the metal surface outside
    that box (surface-plasmon).
    """
    u = field_part(mesh, eigvec)
    mass = lumped_weights(mesh) * np.abs(u) ** 2
    total = float(mass.sum())
    if total == 0.0:
        return Classification("unclassified", 0.0, 0.0)

    in_slit = slit_box_mask(geometry, mesh.nodes)
    surface = metal_surface(geometry)
    if surface is None:
        in_shell = np.zeros(mesh.n_nodes, dtype=bool)
    else:
        points = shapely.points(mesh.nodes[:, 0], mesh.nodes[:, 1])
        in_shell = (shapely.distance(points, surface) <= shell * geometry.d) & ~in_slit

    slit_fraction = float(mass[in_slit].sum() / total)
    surface_fraction = float(mass[in_shell].sum() / total)
    if surface_fraction > majority:
        label: Label = "surface-plasmon"
    elif slit_fraction > majority:
        label = "cavity"
    else:
        label = "unclassified"
    return Classification(label, surface_fraction, slit_fraction)


def mesh_reference(path: str | Path) -> str:
    """'<path> <sha256 prefix>' for field headers"""
    path = Path(path)
    digest = hashlib.sha256(path.read_bytes()).hexdigest()[:16]
    return f"{path.name} {digest}"


def export_eigenfunction(
    mesh: Mesh,
    eigvec: np.ndarray,
    path: str | Path,
    k: complex | None = None,
    kappa: float | None = None,
    mesh_path: str | Path | None = None,
) -> Path:
    """Nodal field scaled to max |u| = 1, phase fixed so the peak is real positive"""
    u = field_part(mesh, eigvec)
    peak = int(np.argmax(np.abs(u)))
    if abs(u[peak]) > 0:
        u = u / u[peak]
    ref = mesh_reference(mesh_path) if mesh_path is not None else None
    written = export_field(mesh, u, path, k=k, kappa=kappa, mesh_ref=ref)
    logger.debug(f"💾 Eigenfunction written to {written}")
    return written

