# tests/test_acceptance.py
"""
End-to-end checks against published reference values. The grating runs are
marked slow and deselected by default; run them with `pytest -m slow`.
"""

import math

import numpy as np
import pytest

from config.settings import Config
from src.models.run_config import RunConfig, load_run_config
from src.services.convergence import run_convergence
from src.services.eigenfunctions import classify
from src.services.nep_solver import Disk, SolverConfig, indicator, make_probe, solve_region
from src.services.pec_oracle import asymptotic_eigenvalues
from src.services.pipeline import build_mesh, build_operator, eigen_residual, run_solve, solve_kappa

SHEETMETAL = [0.12492920, 0.23916592, 0.27838236, 0.33281163]
DRUDE_AT_PI = [
    0.82333707 - 0.01098713j,
    1.40413513 - 0.01417461j,
    1.78249483 - 0.01600898j,
    2.04659065 - 0.01685595j,
    2.24213036 - 0.01717807j,
    2.38932484 - 0.01689001j,
    2.41320003 - 0.00952127j,
    2.42594474 - 0.00918862j,
]
PEC_DELTA005_LEVEL3 = 2.85449203


def _preset(name: str, tmp_path, *overrides: str) -> RunConfig:
    return load_run_config(path=Config().preset_path(name), overrides=[f"output.directory={tmp_path}", *overrides])


def _nearest(found: list[complex], target: complex) -> complex:
    return min(found, key=lambda k: abs(k - target))


# ============= SYNTHETIC OPERATORS =============


class TestSyntheticSuite:
    def test_diagonal_at_32_nodes(self, diagonal_operator):
        result = solve_region(diagonal_operator, Disk(center=1.5, radius=1.0, n_nodes=32), SolverConfig(n_nodes=32))
        found = [r.k for r in result.eigenvalues]
        assert found == [pytest.approx(1.0, abs=1e-10), pytest.approx(2.0, abs=1e-10)]

    def test_quadratic_at_32_nodes(self, quadratic_operator):
        config = SolverConfig(n_nodes=32, accept_tol=1e-10)
        result = solve_region(quadratic_operator, Disk(center=0.0, radius=1.5, n_nodes=32), config)
        found = [r.k for r in result.eigenvalues]
        assert len(found) == 4
        for want in (1.0, -1.0, 1j, -1j):
            assert _nearest(found, want) == pytest.approx(want, abs=1e-9)


class TestSeedDeterminism:
    def test_csv_is_byte_identical(self, vacuum_mesh, vacuum_config, tmp_path):
        run_solve(vacuum_config, output_dir=tmp_path / "a", mesh=vacuum_mesh)
        run_solve(vacuum_config, output_dir=tmp_path / "b", mesh=vacuum_mesh)
        first = (tmp_path / "a" / "resonances.csv").read_bytes()
        assert first == (tmp_path / "b" / "resonances.csv").read_bytes()


# ============= GRATINGS =============


@pytest.mark.slow
class TestPerfectConductor:
    def test_convergence_ladder(self, tmp_path):
        report = run_convergence(_preset("pec-delta005", tmp_path), output_dir=tmp_path)
        values = [complex(row["re"], row["im"]) for row in report.rows]
        reals = [k.real for k in values]
        assert reals == sorted(reals, reverse=True)
        assert values[3].real == pytest.approx(PEC_DELTA005_LEVEL3, abs=2e-2)
        interior = [order for order in report.orders if order is not None]
        assert interior
        assert all(1.0 < order < 2.0 for order in interior)

    def test_narrow_slit_matches_asymptotics(self, tmp_path):
        config = _preset("pec-delta001", tmp_path, "mesh.refinement=3")
        report = run_solve(config)
        expected = asymptotic_eigenvalues(1, kappa=math.pi / 0.4, delta=0.01, d=0.4)[0]
        found = [complex(row["re"], row["im"]) for row in report.rows]
        assert _nearest(found, expected).real == pytest.approx(expected.real, abs=5e-3)

    def test_indicator_contrast(self, tmp_path):
        config = _preset("pec-delta005", tmp_path)
        op = build_operator(build_mesh(config), config, config.kappas()[0])
        probe = make_probe(op.dimension, seed=0)
        occupied = indicator(op, Disk(center=PEC_DELTA005_LEVEL3, radius=0.1), probe)
        empty = [indicator(op, Disk(center=c, radius=0.1), probe) for c in (2.3, 3.4 - 0.2j)]
        scale = max([occupied, *empty])
        assert occupied / scale > 0.2
        assert all(value / scale < 0.02 for value in empty)


@pytest.mark.slow
class TestDispersiveGratings:
    def test_sheetmetal_smallest_four(self, tmp_path):
        report = run_solve(_preset("sheetmetal", tmp_path))
        found = sorted(complex(row["re"], row["im"]).real for row in report.rows)
        assert len(found) >= 4
        for k, want in zip(found[:4], SHEETMETAL):
            assert k == pytest.approx(want, rel=1e-2)

    def test_drude_sommerfeld_at_pi(self, tmp_path):
        config = _preset("drude-sommerfeld", tmp_path)
        mesh = build_mesh(config)
        outcome = solve_kappa(mesh, config, math.pi)
        results = [r for _, r in outcome.eigenvalues]
        assert len(results) >= 8
        geometry = config.geometry()
        for index, want in enumerate(DRUDE_AT_PI):
            result = min(results, key=lambda r: abs(r.k - want))
            assert result.k.real == pytest.approx(want.real, abs=2e-2)
            assert result.k.imag < 0
            label = classify(mesh, result.eigenvector, geometry, config.classify.shell, config.classify.majority).label
            assert label == ("surface-plasmon" if index >= 6 else "cavity")

    def test_accepted_eigenvalues_have_small_residual(self, tmp_path):
        config = _preset("drude-sommerfeld", tmp_path)
        outcome = solve_kappa(build_mesh(config), config, math.pi)
        for _, result in outcome.eigenvalues:
            assert eigen_residual(outcome.operator, result.k, result.eigenvector) < 1e-8
        assert all(np.isfinite(r.k) for _, r in outcome.eigenvalues)
