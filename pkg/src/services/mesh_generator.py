# src/services/mesh_generator.py
"""
Mesh generation for the periodic cell.

Constrained Delaunay triangulation of the polygonal cell (outer box, slab
faces, slit walls) followed by Ruppert-style quality refinement against a
size field that shrinks geometrically towards the slit. Every PSLG segment
is discretized here and Steiner points on boundary segments are disabled,
so the left and right sides carry mirrored nodes.
"""

import logging
import math
from collections.abc import Callable, Iterator

import numpy as np
import shapely
import triangle
from scipy.integrate import cumulative_trapezoid
from shapely.geometry import LineString, MultiPolygon, Polygon

from src.models.errors import ConfigError, GeometryDegenerate
from src.models.geometry import GratingGeometry
from src.models.mesh import METAL, VACUUM, Mesh, unique_edges

logger = logging.getLogger(__name__)

EQUILATERAL_AREA = math.sqrt(3.0) / 4.0
MIN_ANGLE = 30
MAX_REFINEMENT_PASSES = 12
SEGMENT_SAMPLES = 257


def smallest_element_size(geometry: GratingGeometry) -> float:
    """Below this an element cannot be represented reliably in double precision"""
    return math.sqrt(np.finfo(float).eps) * max(geometry.d, 2 * geometry.H)


def size_field(geometry: GratingGeometry, target_h: float, grading: float) -> Callable[[np.ndarray], np.ndarray]:
    """
    Local element size h(x): target_h / grading**(1 - dist/delta) within
    distance delta (narrowest slit width) of the slit walls and corners,
    target_h elsewhere.
    """
    slit = geometry.slit_polygon()
    if slit is None or grading == 1.0:
        return lambda points: np.full(len(points), target_h)

    outline = LineString(slit + [slit[0]])
    delta = geometry.slit.min_width

    def h(points: np.ndarray) -> np.ndarray:
        dist = shapely.distance(shapely.points(points), outline)
        closeness = np.clip(1.0 - dist / delta, 0.0, 1.0)
        return target_h / grading**closeness

    return h


def _discretize(p: np.ndarray, q: np.ndarray, h: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Points along [p, q] spaced according to the size field (end points included)"""
    t = np.linspace(0.0, 1.0, SEGMENT_SAMPLES)
    samples = p + t[:, None] * (q - p)
    density = np.linalg.norm(q - p) / h(samples)
    cumulative = cumulative_trapezoid(density, t, initial=0.0)
    n = max(1, math.ceil(cumulative[-1] - 1e-9))
    t_nodes = np.interp(np.linspace(0.0, cumulative[-1], n + 1), cumulative, t)
    t_nodes[0], t_nodes[-1] = 0.0, 1.0
    return p + t_nodes[:, None] * (q - p)


class _PslgBuilder:
    """Collects vertices (deduplicated) and chained segments"""

    def __init__(self):
        self.vertices: list[tuple[float, float]] = []
        self.index: dict[tuple[float, float], int] = {}
        self.segments: list[tuple[int, int]] = []

    def vertex(self, point) -> int:
        key = (float(point[0]), float(point[1]))
        if key not in self.index:
            self.index[key] = len(self.vertices)
            self.vertices.append(key)
        return self.index[key]

    def chain(self, points: np.ndarray) -> None:
        ids = [self.vertex(p) for p in points]
        self.segments.extend(zip(ids[:-1], ids[1:]))


def _side_breaks(geometry: GratingGeometry) -> list[float]:
    breaks = [-geometry.H]
    if geometry.has_slab:
        breaks += [-geometry.ell / 2, geometry.ell / 2]
    return breaks + [geometry.H]


def build_pslg(geometry: GratingGeometry, h: Callable[[np.ndarray], np.ndarray]) -> dict[str, np.ndarray]:
    """Planar straight-line graph of the cell with every segment pre-discretized"""
    d, H = geometry.d, geometry.H
    pslg = _PslgBuilder()

    # left side discretized once, right side mirrored from it
    breaks = _side_breaks(geometry)
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        left = _discretize(np.array([0.0, lo]), np.array([0.0, hi]), h)
        right = left.copy()
        right[:, 0] = d
        pslg.chain(left)
        pslg.chain(right)

    pslg.chain(_discretize(np.array([0.0, -H]), np.array([d, -H]), h))
    pslg.chain(_discretize(np.array([0.0, H]), np.array([d, H]), h))

    if geometry.has_slab:
        lo, hi = -geometry.ell / 2, geometry.ell / 2
        slit = geometry.slit_polygon()
        if slit is None:
            pslg.chain(_discretize(np.array([0.0, lo]), np.array([d, lo]), h))
            pslg.chain(_discretize(np.array([0.0, hi]), np.array([d, hi]), h))
        else:
            bl, br, tr, tl = (np.array(p) for p in slit)
            for p, q in (
                ((0.0, lo), bl), (br, (d, lo)),      # bottom face
                ((0.0, hi), tl), (tr, (d, hi)),      # top face
                (bl, tl), (br, tr),                  # slit walls
            ):
                pslg.chain(_discretize(np.asarray(p, dtype=float), np.asarray(q, dtype=float), h))

    return {
        "vertices": np.array(pslg.vertices, dtype=float),
        "segments": np.array(pslg.segments, dtype=np.int32),
    }


def tag_triangles(geometry: GratingGeometry, nodes: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """METAL iff the triangle centroid lies inside the slab minus the slit"""
    tags = np.full(len(triangles), VACUUM, dtype=np.int8)
    pieces = geometry.metal_pieces()
    if not pieces:
        return tags
    metal = MultiPolygon([Polygon(p) for p in pieces])
    centroids = nodes[triangles].mean(axis=1)
    tags[shapely.contains_xy(metal, centroids[:, 0], centroids[:, 1])] = METAL
    return tags


def _orient(nodes: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = nodes[triangles]
    signed = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
    flipped = triangles.copy()
    flipped[signed < 0] = flipped[signed < 0][:, [0, 2, 1]]
    return flipped


def _drop_metal(nodes: np.ndarray, triangles: np.ndarray, tags: np.ndarray):
    """Remove metal triangles and unused nodes (PEC computational domain)"""
    keep = tags != METAL
    triangles = triangles[keep]
    used = np.unique(triangles)
    remap = np.full(len(nodes), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    return nodes[used], remap[triangles], tags[keep]


def generate_mesh(geometry: GratingGeometry, target_h: float, grading: float = 1.0) -> Mesh:
    """
    Conforming tagged mesh of the cell.

    Element size is at most target_h, shrinking to target_h/grading at the
    slit walls and corners. For PEC metal the metal triangles are removed.
    """
    if not 0 < target_h < geometry.d:
        raise ConfigError(f"target_h={target_h} must lie in (0, d={geometry.d})", key="mesh.target_h")
    if grading < 1:
        raise ConfigError(f"grading={grading} must be >= 1", key="mesh.grading")
    if geometry.slit is not None and geometry.slit.min_width < 4 * smallest_element_size(geometry):
        raise GeometryDegenerate(f"slit width {geometry.slit.min_width} is below the representable element size")

    logger.info(f"🔧 Meshing cell d={geometry.d}, ell={geometry.ell}, H={geometry.H} (target_h={target_h}, grading={grading})")
    h = size_field(geometry, target_h, grading)
    pslg = build_pslg(geometry, h)

    out = triangle.triangulate(pslg, f"pq{MIN_ANGLE}Ya{EQUILATERAL_AREA * target_h**2:.17g}")
    for _ in range(MAX_REFINEMENT_PASSES):
        nodes, tris = out["vertices"], out["triangles"]
        centroids = nodes[tris].mean(axis=1)
        wanted = EQUILATERAL_AREA * h(centroids) ** 2
        p = nodes[tris]
        areas = 0.5 * np.abs((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))
        if np.all(areas <= wanted * (1 + 1e-9)):
            break
        out["triangle_max_area"] = wanted.reshape(-1, 1)
        out = triangle.triangulate(out, f"rpq{MIN_ANGLE}Ya")
    else:
        logger.warning("⚠️ Size field not fully met after refinement passes")

    nodes = np.asarray(out["vertices"], dtype=float)
    triangles = _orient(nodes, np.asarray(out["triangles"], dtype=np.int64))
    tags = tag_triangles(geometry, nodes, triangles)
    if geometry.metal_kind == "pec":
        nodes, triangles, tags = _drop_metal(nodes, triangles, tags)

    mesh = Mesh.from_arrays(nodes, triangles, tags)
    logger.info(f"✅ Mesh: {mesh.n_nodes} nodes, {mesh.n_triangles} triangles, h={mesh.h:.4g}")
    return mesh


def refine_uniform(mesh: Mesh) -> Mesh:
    """Split every triangle into 4 congruent children at edge midpoints"""
    edges, inverse, _ = unique_edges(mesh.triangles)
    n = mesh.n_nodes
    midpoints = 0.5 * (mesh.nodes[edges[:, 0]] + mesh.nodes[edges[:, 1]])
    nodes = np.vstack([mesh.nodes, midpoints])

    a, b, c = mesh.triangles.T
    m01, m12, m20 = (inverse.reshape(-1, 3) + n).T
    children = np.stack(
        [
            np.column_stack([a, m01, m20]),
            np.column_stack([m01, b, m12]),
            np.column_stack([m20, m12, c]),
            np.column_stack([m01, m12, m20]),
        ],
        axis=1,
    ).reshape(-1, 3)
    tags = np.repeat(mesh.tags, 4)
    return Mesh.from_arrays(nodes, children, tags, level=mesh.level + 1)


def refine_levels(mesh: Mesh, levels: int) -> Iterator[Mesh]:
    """Yield the mesh at levels 0..levels (uniform refinement each step)"""
    current = mesh
    yield current
    for _ in range(levels):
        current = refine_uniform(current)
        yield current


def refine_to_level(mesh: Mesh, level: int) -> Mesh:
    result = mesh
    for result in refine_levels(mesh, level):
        pass
    return result
