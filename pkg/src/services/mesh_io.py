# src/services/mesh_io.py
"""
Plain-ASCII mesh and nodal field files.

Mesh file layout (one record per line, floats with 17 significant digits):

    # resonance-mesh 1
    LEVEL <l>
    NODES <n>
    <x1> <x2>
    TRIANGLES <m>
    <i> <j> <k>
    TAGS <m>
    <vacuum|metal>
    BOUNDARY <count of sets>          (optional)
    <name> <i1> <i2> ...

Field file layout:

    # resonance-field 1
    # k = <re> <im>
    # kappa = <value>
    # nodes = <n>
    # mesh = <path> <sha256 prefix>
    <x1> <x2> <Re u> <Im u>
"""

import logging
from pathlib import Path

import numpy as np

from src.models.errors import InvalidTopology, ParseError
from src.models.mesh import BOUNDARY_ORDER, TAG_CODES, TAG_NAMES, Mesh

logger = logging.getLogger(__name__)

MESH_MAGIC = "# resonance-mesh 1"
FIELD_MAGIC = "# resonance-field 1"


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


# ============= MESH =============


def export_mesh(mesh: Mesh, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [MESH_MAGIC, f"LEVEL {mesh.level}", f"NODES {mesh.n_nodes}"]
    lines += [f"{_fmt(x)} {_fmt(y)}" for x, y in mesh.nodes]
    lines.append(f"TRIANGLES {mesh.n_triangles}")
    lines += [f"{a} {b} {c}" for a, b, c in mesh.triangles]
    lines.append(f"TAGS {mesh.n_triangles}")
    lines += [TAG_NAMES[int(t)] for t in mesh.tags]
    lines.append(f"BOUNDARY {len(BOUNDARY_ORDER)}")
    for name in BOUNDARY_ORDER:
        members = mesh.boundary.get(name, np.zeros(0, dtype=np.int64))
        lines.append(" ".join([name, *(str(i) for i in members)]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"💾 Mesh written to {path} ({mesh.n_nodes} nodes)")
    return path


class _LineReader:
    """Iterates non-empty lines keeping 1-based line numbers for error reports"""

    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    @property
    def lineno(self) -> int:
        return self.pos

    def at_end(self) -> bool:
        rest = self.lines[self.pos :]
        return all(not line.strip() or line.strip().startswith("#") for line in rest)

    def next(self, what: str) -> list[str]:
        while self.pos < len(self.lines):
            self.pos += 1
            stripped = self.lines[self.pos - 1].strip()
            if stripped and not stripped.startswith("#"):
                return stripped.split()
        raise ParseError(f"unexpected end of file, expected {what}", self.pos)

    def header(self, keyword: str) -> int:
        tokens = self.next(f"{keyword} header")
        if len(tokens) != 2 or tokens[0] != keyword:
            raise ParseError(f"expected '{keyword} <count>'", self.lineno)
        return self.integer(tokens[1])

    def integer(self, token: str) -> int:
        try:
            return int(token)
        except ValueError:
            raise ParseError(f"not an integer: {token!r}", self.lineno) from None

    def number(self, token: str) -> float:
        try:
            return float(token)
        except ValueError:
            raise ParseError(f"not a number: {token!r}", self.lineno) from None


def import_mesh(path: str | Path) -> Mesh:
    """
    Read a mesh file. Boundary sets and the side pairing are recomputed; a
    BOUNDARY section, when present, must agree with them.
    """
    path = Path(path)
    reader = _LineReader(path.read_text(encoding="utf-8"))

    tokens = reader.next("LEVEL or NODES header")
    level = 0
    if tokens[0] == "LEVEL":
        if len(tokens) != 2:
            raise ParseError("expected 'LEVEL <l>'", reader.lineno)
        level = reader.integer(tokens[1])
        tokens = reader.next("NODES header")
    if len(tokens) != 2 or tokens[0] != "NODES":
        raise ParseError("expected 'NODES <count>'", reader.lineno)
    n = reader.integer(tokens[1])

    nodes = np.empty((n, 2))
    for i in range(n):
        row = reader.next("node record")
        if len(row) != 2:
            raise ParseError("node record needs 2 coordinates", reader.lineno)
        nodes[i] = [reader.number(v) for v in row]

    m = reader.header("TRIANGLES")
    triangles = np.empty((m, 3), dtype=np.int64)
    for i in range(m):
        row = reader.next("triangle record")
        if len(row) != 3:
            raise ParseError("triangle record needs 3 node indices", reader.lineno)
        triangles[i] = [reader.integer(v) for v in row]

    if reader.header("TAGS") != m:
        raise ParseError("TAGS count differs from TRIANGLES count", reader.lineno)
    tags = np.empty(m, dtype=np.int8)
    for i in range(m):
        (token, *rest) = reader.next("tag record")
        if rest or token not in TAG_CODES:
            raise ParseError(f"unknown region tag {token!r}", reader.lineno)
        tags[i] = TAG_CODES[token]

    stored: dict[str, np.ndarray] = {}
    for _ in range(0 if reader.at_end() else reader.header("BOUNDARY")):
        name, *members = reader.next("boundary record")
        if name not in BOUNDARY_ORDER:
            raise ParseError(f"unknown boundary set {name!r}", reader.lineno)
        stored[name] = np.array([reader.integer(v) for v in members], dtype=np.int64)

    mesh = Mesh.from_arrays(nodes, triangles, tags, level=level)
    for name, members in stored.items():
        if not np.array_equal(np.sort(members), mesh.boundary[name]):
            raise InvalidTopology(f"stored boundary set {name} disagrees with the mesh")
    logger.info(f"📂 Mesh read from {path} ({mesh.n_nodes} nodes, level {level})")
    return mesh


# ============= FIELDS =============


def export_field(
    mesh: Mesh,
    values: np.ndarray,
    path: str | Path,
    k: complex | None = None,
    kappa: float | None = None,
    mesh_ref: str | None = None,
) -> Path:
    """Write nodal complex values next to their coordinates"""
    values = np.asarray(values, dtype=complex)
    if values.shape != (mesh.n_nodes,):
        raise ValueError(f"field has {values.shape} entries, mesh has {mesh.n_nodes} nodes")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [FIELD_MAGIC]
    if k is not None:
        lines.append(f"# k = {_fmt(complex(k).real)} {_fmt(complex(k).imag)}")
    if kappa is not None:
        lines.append(f"# kappa = {_fmt(kappa)}")
    lines.append(f"# nodes = {mesh.n_nodes}")
    if mesh_ref is not None:
        lines.append(f"# mesh = {mesh_ref}")
    lines += [f"{_fmt(x)} {_fmt(y)} {_fmt(u.real)} {_fmt(u.imag)}" for (x, y), u in zip(mesh.nodes, values)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def import_field(path: str | Path) -> tuple[np.ndarray, np.ndarray, dict[str, complex | float | int | str]]:
    """Returns (coordinates, complex values, header metadata)"""
    meta: dict[str, complex | float | int | str] = {}
    coords, values = [], []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, rest = line[1:].partition("=")
            parts = rest.split()
            try:
                if key.strip() == "k" and len(parts) == 2:
                    meta["k"] = complex(float(parts[0]), float(parts[1]))
                elif key.strip() == "kappa" and len(parts) == 1:
                    meta["kappa"] = float(parts[0])
                elif key.strip() == "nodes" and len(parts) == 1:
                    meta["nodes"] = int(parts[0])
                elif key.strip() == "mesh" and parts:
                    meta["mesh"] = " ".join(parts)
            except ValueError:
                raise ParseError(f"bad header value in {line!r}", lineno) from None
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ParseError("field record needs 4 numbers", lineno)
        try:
            x, y, re, im = (float(p) for p in parts)
        except ValueError:
            raise ParseError(f"not a number in {line!r}", lineno) from None
        coords.append((x, y))
        values.append(complex(re, im))
    return np.array(coords, dtype=float).reshape(-1, 2), np.array(values, dtype=complex), meta
