# tests/conftest.py
"""Shared fixtures: hand-built structured meshes and small synthetic operators"""

import numpy as np
import pytest

from src.models.mesh import METAL, VACUUM, Mesh
from src.models.run_config import load_run_config
from src.services.nep_solver import MatrixFunctionOperator


def structured_mesh(nx: int, ny: int, d: float = 1.0, H: float = 0.5, ell: float = 0.0, slit: float = 0.0) -> Mesh:
    """
    Grid of (nx x ny) rectangles on (0, d) x (-H, H), each cut into two
    counter-clockwise triangles. Triangles with |y| < ell/2 outside the
    centred slit of width `slit` are tagged metal.
    """
    xs = np.linspace(0.0, d, nx + 1)
    ys = np.linspace(-H, H, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    def node(i, j):
        return j * (nx + 1) + i

    triangles = []
    for j in range(ny):
        for i in range(nx):
            a, b, c, e = node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)
            triangles += [(a, b, c), (a, c, e)]
    triangles = np.array(triangles)
    centroids = nodes[triangles].mean(axis=1)
    in_slab = np.abs(centroids[:, 1]) < ell / 2
    in_slit = np.abs(centroids[:, 0] - d / 2) < slit / 2
    tags = np.where(in_slab & ~in_slit, METAL, VACUUM)
    return Mesh.from_arrays(nodes, triangles, tags)


@pytest.fixture
def unit_square_mesh():
    """2 x 2 squares on (0, 1) x (-0.5, 0.5), all vacuum"""
    return structured_mesh(2, 2)


@pytest.fixture
def slab_mesh():
    """Small dispersive slab with a slit: d=1, H=1, ell=0.5, slit 0.25"""
    return structured_mesh(8, 8, d=1.0, H=1.0, ell=0.5, slit=0.25)


@pytest.fixture
def vacuum_mesh():
    return structured_mesh(6, 6, d=1.0, H=0.75)


@pytest.fixture
def diagonal_operator():
    """diag(z - 1, z - 2): eigenvalues 1 and 2"""
    return MatrixFunctionOperator(lambda z: np.diag([z - 1.0, z - 2.0]), 2)


@pytest.fixture
def quadratic_operator():
    """z^2 I + [[0, 1], [1, 0]]: eigenvalues +-1, +-i"""
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    return MatrixFunctionOperator(lambda z: z * z * np.eye(2) + swap, 2)


VACUUM_RUN = """
[geometry]
d = 1
ell = 0
H = 0.75
slit = none

[material]
model = vacuum

[mesh]
target_h = 0.25

[dtn]
D_t = 3

[solver]
n_nodes = 32
regions = disk:2,-0.2,0.3
"""


@pytest.fixture
def vacuum_config(tmp_path):
    """Empty cell matching vacuum_mesh; results go to tmp_path"""
    return load_run_config(text=VACUUM_RUN, overrides=[f"output.directory={tmp_path}"])
