# tests/test_nep_solver.py

import numpy as np
import pytest
import scipy.sparse as sp
from pydantic import ValidationError

from src.models.errors import RegionTouchesSingularity, SubspaceTooSmall
from src.services.nep_solver import (
    Disk,
    MatrixFunctionOperator,
    Rectangle,
    SolverConfig,
    beyn_extract,
    contour_moments,
    cover_rectangle,
    indicator,
    make_probe,
    solve_region,
    validate,
)


def _found(result) -> list[complex]:
    return [r.k for r in result.eigenvalues]


class TestDisk:
    def test_children_cover_parent(self):
        parent = Disk(center=0.3 - 0.2j, radius=0.8)
        children = parent.children()
        assert len(children) == 7
        rng = np.random.default_rng(1)
        radii = 0.8 * np.sqrt(rng.uniform(0, 1, 400))
        points = parent.center + radii * np.exp(2j * np.pi * rng.uniform(0, 1, 400))
        for z in points:
            assert any(child.contains(z) for child in children)

    def test_cover_rectangle(self):
        rect = Rectangle(x0=0.0, x1=3.0, y0=-1.0, y1=1.0, disk_radius=0.5)
        cover = cover_rectangle(rect, n_nodes=32)
        xs, ys = np.meshgrid(np.linspace(0, 3, 31), np.linspace(-1, 1, 21))
        for z in (xs + 1j * ys).ravel():
            assert any(disk.contains(z) for disk in cover)

    def test_rectangle_bounds(self):
        with pytest.raises(ValidationError):
            Rectangle(x0=1.0, x1=0.0, y0=0.0, y1=1.0, disk_radius=0.1)


class TestSolverConfig:
    def test_tolerances_ordered(self):
        with pytest.raises(ValidationError):
            SolverConfig(accept_tol=1e-4, reject_tol=1e-5)

    def test_subspace_width(self):
        with pytest.raises(ValidationError):
            SolverConfig(L1=300, L1_max=192)


class TestContourMoments:
    def test_residues_of_diagonal(self, diagonal_operator):
        disk = Disk(center=1.5, radius=1.0)
        C0, C1 = contour_moments(diagonal_operator, disk, np.eye(2, dtype=complex))
        np.testing.assert_allclose(C0, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(C1, np.diag([1.0, 2.0]), atol=1e-12)

    def test_threads_give_same_sums(self, diagonal_operator):
        disk = Disk(center=1.2 + 0.1j, radius=0.6)
        rhs = np.ones((2, 1), dtype=complex)
        serial = contour_moments(diagonal_operator, disk, rhs, workers=1)
        threaded = contour_moments(diagonal_operator, disk, rhs, workers=4)
        for a, b in zip(serial, threaded):
            assert np.array_equal(a, b)

    def test_indicator_separates_disks(self, diagonal_operator):
        probe = make_probe(2, seed=0)
        inside = indicator(diagonal_operator, Disk(center=1.0, radius=0.3), probe)
        empty = indicator(diagonal_operator, Disk(center=5.0, radius=0.3), probe)
        assert inside == pytest.approx(abs(probe[0]), rel=1e-10)
        assert empty < 1e-10


class TestBeynExtract:
    def test_recovers_both_eigenvalues(self, diagonal_operator):
        result = beyn_extract(diagonal_operator, Disk(center=1.5, radius=1.0), L1=2)
        assert result.rank == 2
        assert result.saturated
        assert [c.k for c in result.candidates] == [pytest.approx(1.0, abs=1e-12), pytest.approx(2.0, abs=1e-12)]
        assert all(c.inside for c in result.candidates)

    def test_narrow_block_must_grow(self, diagonal_operator):
        with pytest.raises(SubspaceTooSmall):
            beyn_extract(diagonal_operator, Disk(center=1.5, radius=1.0), L1=1)

    def test_single_eigenvalue(self, diagonal_operator):
        result = beyn_extract(diagonal_operator, Disk(center=1.0, radius=0.5), L1=2)
        assert result.rank == 1
        assert result.candidates[0].k == pytest.approx(1.0, abs=1e-12)

    def test_cancelling_residues_are_flagged(self, quadratic_operator):
        result = beyn_extract(quadratic_operator, Disk(center=0.0, radius=1.5), L1=2)
        assert result.rank == 0
        assert result.deficient


class TestValidate:
    def test_near_eigenvalue(self, diagonal_operator):
        check = validate(diagonal_operator, 1.0 + 1e-3)
        assert abs(check.lambda0) == pytest.approx(1e-3, rel=1e-6)
        assert check.method == "inverse_iteration"
        assert abs(check.eigenvector[0]) == pytest.approx(1.0, abs=1e-6)

    def test_exact_eigenvalue(self, diagonal_operator):
        check = validate(diagonal_operator, 2.0)
        assert check.lambda0 == 0
        assert check.method == "singular"


class TestSolveRegion:
    def test_diagonal_disk(self, diagonal_operator):
        result = solve_region(diagonal_operator, Disk(center=1.5, radius=1.0), region_label="R0")
        assert _found(result) == [pytest.approx(1.0, abs=1e-12), pytest.approx(2.0, abs=1e-12)]
        assert all(r.disk_id.startswith("R0-d") for r in result.eigenvalues)
        assert all(r.residual < 1e-12 for r in result.eigenvalues)

    def test_diagonal_rectangle(self, diagonal_operator):
        region = Rectangle(x0=0.0, x1=3.0, y0=-1.0, y1=1.0, disk_radius=0.5)
        result = solve_region(diagonal_operator, region, SolverConfig(n_nodes=64))
        assert _found(result) == [pytest.approx(1.0, abs=1e-10), pytest.approx(2.0, abs=1e-10)]
        reasons = {e.get("reason") for e in result.audit.of_kind("discarded")}
        assert "indicator_below_threshold" in reasons
        assert [e["seq"] for e in result.audit.events] == list(range(len(result.audit.events)))

    def test_cancelling_residues_trigger_split(self, quadratic_operator):
        config = SolverConfig(accept_tol=1e-10)
        result = solve_region(quadratic_operator, Disk(center=0.0, radius=1.5, n_nodes=64), config)
        expected = [-1.0, -1j, 1j, 1.0]
        assert len(result.eigenvalues) == 4
        found = sorted(_found(result), key=lambda z: (round(z.real, 6), round(z.imag, 6)))
        for k, want in zip(found, expected):
            assert k == pytest.approx(want, abs=1e-9)
        assert result.audit.of_kind("disk_split")

    def test_fixed_seed_is_reproducible(self, quadratic_operator):
        config = SolverConfig(accept_tol=1e-10, rng_seed=7)
        first = solve_region(quadratic_operator, Disk(center=1.0, radius=0.5), config)
        second = solve_region(quadratic_operator, Disk(center=1.0, radius=0.5), config)
        assert _found(first) == _found(second)

    def test_empty_region(self, diagonal_operator):
        result = solve_region(diagonal_operator, Disk(center=5.0 + 5.0j, radius=0.5))
        assert result.eigenvalues == []

    def test_region_touching_singularity(self):
        op = MatrixFunctionOperator(lambda z: np.diag([z - 1.0, 1.0 / (z - 0.5)]), 2, singularities=[("material_pole", 0.5)])
        with pytest.raises(RegionTouchesSingularity) as info:
            solve_region(op, Disk(center=1.0, radius=0.75))
        assert info.value.offenders == [("material_pole", 0.5 + 0j)]

    def test_sparse_operator(self):
        op = MatrixFunctionOperator(lambda z: sp.diags([z - 0.5, z - 1.5, z + 3.0]).tocsc(), 3)
        result = solve_region(op, Disk(center=1.0, radius=1.0))
        assert _found(result) == [pytest.approx(0.5, abs=1e-12), pytest.approx(1.5, abs=1e-12)]


def _exp_operator():
    """diag(exp(z) - e, 1): eigenvalue 1, not rational so coarse contours leave an error"""
    return MatrixFunctionOperator(lambda z: np.diag([np.exp(z) - np.e, 1.0]), 2)


COARSE = Disk(center=1.2, radius=0.8, n_nodes=8)


class TestCandidateTriage:
    def test_rectangle_keeps_only_its_own_eigenvalues(self):
        op = MatrixFunctionOperator(lambda z: np.diag([z - 1.0, z - 3.2]), 2)
        region = Rectangle(x0=0.0, x1=3.0, y0=-1.0, y1=1.0, disk_radius=0.5)
        result = solve_region(op, region)
        assert _found(result) == [pytest.approx(1.0, abs=1e-10)]
        assert all(region.contains(k) for k in _found(result))
        reasons = {e.get("reason") for e in result.audit.of_kind("discarded")}
        assert "outside_region" in reasons

    def test_coarse_candidate_is_refined(self):
        result = solve_region(_exp_operator(), COARSE, SolverConfig(reject_tol=1e-3))
        assert result.audit.of_kind("refine")
        assert _found(result) == [pytest.approx(1.0, abs=1e-10)]
        assert result.eigenvalues[0].depth == 1
        assert result.eigenvalues[0].provenance["reason"] == "refine"

    def test_refinement_stops_at_depth_limit(self):
        config = SolverConfig(reject_tol=1e-3, max_recursion_depth=0)
        result = solve_region(_exp_operator(), COARSE, config)
        assert result.eigenvalues == []
        assert not result.audit.of_kind("refine")
        reasons = [e.get("reason") for e in result.audit.of_kind("discarded")]
        assert "refine_limit" in reasons

    def test_candidate_above_reject_tol_is_dropped(self):
        result = solve_region(_exp_operator(), COARSE, SolverConfig(reject_tol=1e-9))
        assert result.eigenvalues == []
        dropped = [e for e in result.audit.of_kind("discarded") if e.get("reason") == "above_reject_tol"]
        assert dropped
        assert all(e["metric"] > 1e-9 for e in dropped)

    def test_candidate_outside_its_disk_is_rerouted(self):
        # eigenvalues off every quadrature node of the 8-point cover
        op = MatrixFunctionOperator(lambda z: np.diag([z - 1.05, z - 2.35]), 2)
        region = Rectangle(x0=0.0, x1=3.0, y0=-1.0, y1=1.0, disk_radius=0.5)
        config = SolverConfig(n_nodes=8, indicator_threshold=1e-6)
        result = solve_region(op, region, config)
        assert result.audit.of_kind("rerouted")
        assert _found(result) == [pytest.approx(1.05, abs=1e-10), pytest.approx(2.35, abs=1e-10)]
