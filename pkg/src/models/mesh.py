# src/models/mesh.py
"""
Tagged triangular mesh of the periodic cell.

Holds node coordinates, counter-clockwise triangles, a region tag per
triangle, the boundary node sets and the left/right node pairing used by
the quasi-periodic constraint.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from src.models.errors import InvalidTopology

VACUUM = 0
METAL = 1
TAG_NAMES = {VACUUM: "vacuum", METAL: "metal"}
TAG_CODES = {name: code for code, name in TAG_NAMES.items()}

# Corner priority: a node lands in the first set that claims it
BOUNDARY_ORDER = ("top", "bottom", "left", "right", "metal_wall")

PAIRING_TOLERANCE = 1e-12


def triangle_areas(nodes: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Signed areas (positive for counter-clockwise triangles)"""
    p0, p1, p2 = (nodes[triangles[:, i]] for i in range(3))
    return 0.5 * ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1]))


def unique_edges(triangles: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Undirected edges of a triangulation.

    Returns (edges, inverse, counts): edges is (E, 2) with sorted endpoints,
    inverse maps the 3*m local edges (order 01, 12, 20) to rows of edges,
    counts is the number of triangles sharing each edge.
    """
    local = triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
    local = np.sort(local, axis=1)
    edges, inverse, counts = np.unique(local, axis=0, return_inverse=True, return_counts=True)
    return edges, inverse.reshape(-1), counts


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable tagged triangulation of the cell"""

    nodes: np.ndarray
    triangles: np.ndarray
    tags: np.ndarray
    boundary: dict[str, np.ndarray] = field(default_factory=dict)
    pairs: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    level: int = 0

    @classmethod
    def from_arrays(cls, nodes, triangles, tags, level: int = 0) -> "Mesh":
        """Build a mesh, classify boundary nodes, pair the sides and validate"""
        nodes = np.ascontiguousarray(nodes, dtype=float)
        triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        tags = np.ascontiguousarray(tags, dtype=np.int8)
        _check_indices(nodes, triangles, tags)
        boundary = classify_boundary(nodes, triangles)
        pairs = pair_sides(nodes, boundary)
        mesh = cls(nodes=nodes, triangles=triangles, tags=tags, boundary=boundary, pairs=pairs, level=level)
        mesh.validate()
        for array in (nodes, triangles, tags, pairs, *boundary.values()):
            array.setflags(write=False)
        return mesh

    # ============= SIZES =============

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def n_triangles(self) -> int:
        return int(self.triangles.shape[0])

    @property
    def period(self) -> float:
        return float(self.nodes[:, 0].max() - self.nodes[:, 0].min())

    @property
    def x_left(self) -> float:
        return float(self.nodes[:, 0].min())

    @property
    def height(self) -> float:
        """Truncation half-height H (top boundary line)"""
        return float(self.nodes[:, 1].max())

    @cached_property
    def areas(self) -> np.ndarray:
        return triangle_areas(self.nodes, self.triangles)

    @cached_property
    def edges(self) -> np.ndarray:
        return unique_edges(self.triangles)[0]

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    def inscribed_diameters(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        perimeter = sum(np.linalg.norm(p[:, (i + 1) % 3] - p[:, i], axis=1) for i in range(3))
        return 4.0 * self.areas / perimeter

    @property
    def h(self) -> float:
        """Mesh size: maximal inscribed-circle diameter"""
        return float(self.inscribed_diameters().max())

    def region_area(self, tag: int | str | None = None) -> float:
        if tag is None:
            return float(self.areas.sum())
        code = TAG_CODES[tag] if isinstance(tag, str) else tag
        return float(self.areas[self.tags == code].sum())

    def centroids(self) -> np.ndarray:
        return self.nodes[self.triangles].mean(axis=1)

    @property
    def has_metal(self) -> bool:
        return bool(np.any(self.tags == METAL))

    # ============= INVARIANTS =============

    def validate(self) -> None:
        """Raise InvalidTopology when a Mesh invariant is violated"""
        _check_indices(self.nodes, self.triangles, self.tags)
        if np.any(self.areas <= 0):
            bad = int(np.argmax(self.areas <= 0))
            raise InvalidTopology(f"triangle {bad} is not positively oriented")
        _, _, counts = unique_edges(self.triangles)
        if np.any(counts > 2):
            raise InvalidTopology("an edge is shared by more than two triangles")
        used = np.zeros(self.n_nodes, dtype=bool)
        used[self.triangles.ravel()] = True
        if not used.all():
            raise InvalidTopology(f"{int((~used).sum())} nodes belong to no triangle")
        seen: set[int] = set()
        for name in BOUNDARY_ORDER:
            members = set(self.boundary.get(name, np.zeros(0, dtype=np.int64)).tolist())
            if members & seen:
                raise InvalidTopology(f"boundary set {name} overlaps an earlier set")
            seen |= members
        left, right = self.pairs[:, 0], self.pairs[:, 1]
        if len(set(left.tolist())) != len(left) or len(set(right.tolist())) != len(right):
            raise InvalidTopology("left/right pairing is not a bijection")


def _check_indices(nodes: np.ndarray, triangles: np.ndarray, tags: np.ndarray) -> None:
    if nodes.ndim != 2 or nodes.shape[1] != 2:
        raise InvalidTopology("nodes must be an (n, 2) array")
    if triangles.ndim != 2 or triangles.shape[1] != 3:
        raise InvalidTopology("triangles must be an (m, 3) array")
    if triangles.size and (triangles.min() < 0 or triangles.max() >= nodes.shape[0]):
        raise InvalidTopology("triangle references a node index out of range")
    if tags.shape != (triangles.shape[0],):
        raise InvalidTopology("one region tag per triangle is required")
    if not np.isin(tags, list(TAG_NAMES)).all():
        raise InvalidTopology("unknown region tag")


def classify_boundary(nodes: np.ndarray, triangles: np.ndarray) -> dict[str, np.ndarray]:
    """
    Boundary node sets. Outer lines come from the bounding box of the
    cell; any other node on a boundary edge is a metal wall node.
    """
    x, y = nodes[:, 0], nodes[:, 1]
    scale = max(float(x.max() - x.min()), float(y.max() - y.min()))
    tol = PAIRING_TOLERANCE * scale
    candidates = {
        "top": np.abs(y - y.max()) <= tol,
        "bottom": np.abs(y - y.min()) <= tol,
        "left": np.abs(x - x.min()) <= tol,
        "right": np.abs(x - x.max()) <= tol,
    }
    edges, _, counts = unique_edges(triangles)
    on_boundary = np.zeros(nodes.shape[0], dtype=bool)
    on_boundary[edges[counts == 1].ravel()] = True
    candidates["metal_wall"] = on_boundary

    claimed = np.zeros(nodes.shape[0], dtype=bool)
    boundary = {}
    for name in BOUNDARY_ORDER:
        mask = candidates[name] & ~claimed
        boundary[name] = np.flatnonzero(mask).astype(np.int64)
        claimed |= mask
    return boundary


def side_nodes(nodes: np.ndarray, side: str) -> np.ndarray:
    """All nodes on the x1 = min (left) or x1 = max (right) line, corners included"""
    x = nodes[:, 0]
    scale = max(float(x.max() - x.min()), 1e-300)
    target = x.min() if side == "left" else x.max()
    return np.flatnonzero(np.abs(x - target) <= PAIRING_TOLERANCE * scale)


def pair_sides(nodes: np.ndarray, boundary: dict[str, np.ndarray] | None = None) -> np.ndarray:
    """
    Pair each node on the left line with the right-line node at the same x2.

    Corner nodes are paired too, so the quasi-periodic condition also
    holds at x2 = +-H.
    """
    left = side_nodes(nodes, "left")
    right = side_nodes(nodes, "right")
    if len(left) != len(right):
        raise InvalidTopology(f"{len(left)} left nodes vs {len(right)} right nodes")
    left = left[np.argsort(nodes[left, 1], kind="stable")]
    right = right[np.argsort(nodes[right, 1], kind="stable")]
    period = float(nodes[:, 0].max() - nodes[:, 0].min())
    mismatch = np.abs(nodes[left, 1] - nodes[right, 1])
    if mismatch.size and mismatch.max() > PAIRING_TOLERANCE * period:
        raise InvalidTopology(f"left/right nodes do not match in x2 (max offset {mismatch.max():.3e})")
    return np.column_stack([left, right]).astype(np.int64)
