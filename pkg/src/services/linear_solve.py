# src/services/linear_solve.py
"""
Factorization handles used by the contour solver.

Each handle solves G X = Y (or G^H X = Y) for a block of right-hand sides
with one factorization of G. Zero or tiny pivots raise SingularAt.
"""

import logging
from typing import Protocol

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from src.models.errors import SingularAt

logger = logging.getLogger(__name__)

PIVOT_TOLERANCE = 1e-14


class FactorHandle(Protocol):
    k: complex
    shape: tuple[int, int]

    def solve(self, rhs: np.ndarray, adjoint: bool = False) -> np.ndarray: ...


def _check_pivots(diagonal: np.ndarray, k: complex) -> None:
    magnitudes = np.abs(diagonal)
    largest = magnitudes.max() if magnitudes.size else 0.0
    smallest = magnitudes.min() if magnitudes.size else 0.0
    if largest == 0.0 or smallest <= PIVOT_TOLERANCE * largest:
        raise SingularAt(k, float(smallest / largest) if largest else 0.0)


class SparseLuHandle:
    """SuperLU factorization of a sparse G(k)"""

    def __init__(self, matrix: sp.spmatrix, k: complex):
        self.k = complex(k)
        self.shape = matrix.shape
        try:
            self._lu = spla.splu(sp.csc_matrix(matrix, dtype=complex))
        except RuntimeError as exc:
            # SuperLU reports "Factor is exactly singular"
            raise SingularAt(self.k, 0.0) from exc
        _check_pivots(self._lu.U.diagonal(), self.k)

    def solve(self, rhs: np.ndarray, adjoint: bool = False) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=complex)
        return self._lu.solve(rhs, trans="H" if adjoint else "N")


class DenseLuHandle:
    """LAPACK LU of a small dense G(k)"""

    def __init__(self, matrix: np.ndarray, k: complex):
        self.k = complex(k)
        matrix = np.asarray(matrix.toarray() if sp.issparse(matrix) else matrix, dtype=complex)
        self.shape = matrix.shape
        self._lu, self._piv = la.lu_factor(matrix, check_finite=True)
        _check_pivots(np.diag(self._lu), self.k)

    def solve(self, rhs: np.ndarray, adjoint: bool = False) -> np.ndarray:
        return la.lu_solve((self._lu, self._piv), np.asarray(rhs, dtype=complex), trans=2 if adjoint else 0)


class WoodburyHandle:
    """
    Solves with G = G0 - P diag(c) Q given a factorization of G0:

        G^-1 = G0^-1 + G0^-1 P (I - diag(c) Q G0^-1 P)^-1 diag(c) Q G0^-1
    """

    def __init__(self, base: FactorHandle, P: np.ndarray, c: np.ndarray, Q: np.ndarray):
        self.base = base
        self.k = base.k
        self.shape = base.shape
        self._forward = self._prepare(P, c, Q, adjoint=False)
        self._backward = None
        self._factors = (P, c, Q)

    def _prepare(self, P, c, Q, adjoint: bool):
        if adjoint:
            P, c, Q = Q.conj().T, np.conj(c), P.conj().T
        base_P = self.base.solve(P, adjoint=adjoint)
        capacitance = np.eye(len(c), dtype=complex) - c[:, None] * (Q @ base_P)
        try:
            lu = la.lu_factor(capacitance)
        except la.LinAlgError as exc:
            raise SingularAt(self.k, 0.0) from exc
        _check_pivots(np.diag(lu[0]), self.k)
        return base_P, lu, c, Q

    def solve(self, rhs: np.ndarray, adjoint: bool = False) -> np.ndarray:
        if adjoint and self._backward is None:
            self._backward = self._prepare(*self._factors, adjoint=True)
        base_P, lu, c, Q = self._backward if adjoint else self._forward
        z = self.base.solve(rhs, adjoint=adjoint)
        correction = la.lu_solve(lu, (c[:, None] if z.ndim == 2 else c) * (Q @ z))
        return z + base_P @ correction


def factorize_matrix(matrix, k: complex) -> FactorHandle:
    """Sparse LU for sparse input, dense LU otherwise"""
    if sp.issparse(matrix):
        return SparseLuHandle(matrix, k)
    return DenseLuHandle(matrix, k)
