# tests/test_dtn.py

import cmath
import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.integrate import quad

from src.models.errors import BranchCutHit
from src.services.dtn import (
    DtnSpec,
    anomaly_points,
    assemble_dtn_block,
    boundary_fourier_vector,
    branch_cut_hits_disk,
    element_integrals,
    fourier_matrix,
    side_dofs,
    zeta,
    zeta_n,
)


def _quad_complex(func, a, b):
    re = quad(lambda x: func(x).real, a, b, epsabs=1e-14, epsrel=1e-13)[0]
    im = quad(lambda x: func(x).imag, a, b, epsabs=1e-14, epsrel=1e-13)[0]
    return complex(re, im)


class TestZeta:
    def test_propagating_mode(self):
        assert zeta_n(2.0, 0.0, 0, 1.0) == pytest.approx(2.0)

    def test_evanescent_mode_decays(self):
        assert zeta(1.0, 2.0)[0] == pytest.approx(1j * math.sqrt(3.0))

    def test_square_identity(self):
        kappa_n = np.array([-3.0, -0.5, 0.0, 1.2, 7.0])
        for k in (0.3 - 0.2j, 2.0 + 0.1j, -1.5 - 0.4j):
            np.testing.assert_allclose(zeta(k, kappa_n) ** 2, k * k - kappa_n**2, rtol=1e-13, atol=1e-13)

    def test_real_k_gives_absorbing_coefficient(self):
        kappa_n = 0.7 + 2 * np.pi * np.arange(-5, 6)
        for k in np.linspace(0.05, 9.0, 23):
            assert np.all((1j * zeta(k, kappa_n)).real <= 1e-15)

    def test_branch_point_rejected(self):
        with pytest.raises(BranchCutHit) as info:
            zeta(1.0, np.array([0.0, 1.0]))
        assert info.value.kappa_n == 1.0

    def test_cut_ray_rejected(self):
        with pytest.raises(BranchCutHit):
            zeta(cmath.sqrt(1.0 - 1.0j), 1.0)

    def test_anomaly_points_are_symmetric(self):
        points = anomaly_points(0.5, 1.0, 2)
        np.testing.assert_allclose(np.sort(points), np.sort(-points))


class TestDtnSpec:
    def test_kappa_outside_zone(self):
        with pytest.raises(ValidationError):
            DtnSpec(kappa=4.0, d=1.0, D_t=3)

    def test_modes(self):
        spec = DtnSpec(kappa=math.pi, d=1.0, D_t=2)
        assert list(spec.modes) == [-2, -1, 0, 1, 2]
        assert spec.kappa_n[2] == pytest.approx(math.pi)


class TestElementIntegrals:
    @pytest.mark.parametrize("beta", [0.4, 5.0, -12.0])
    def test_against_quadrature(self, beta):
        a, b = 0.3, 0.7
        I_a, I_b = element_integrals(np.array([a]), np.array([b]), beta)
        hat_a = lambda x: (b - x) / (b - a) * cmath.exp(-1j * beta * x)  # noqa: E731
        hat_b = lambda x: (x - a) / (b - a) * cmath.exp(-1j * beta * x)  # noqa: E731
        assert I_a[0] == pytest.approx(_quad_complex(hat_a, a, b), abs=1e-13)
        assert I_b[0] == pytest.approx(_quad_complex(hat_b, a, b), abs=1e-13)

    def test_series_and_closed_form_agree_at_switch(self):
        L = 0.1
        below = element_integrals(np.array([0.2]), np.array([0.2 + L]), 4.999999)
        above = element_integrals(np.array([0.2]), np.array([0.2 + L]), 5.000001)
        for lo, hi in zip(below, above):
            assert lo[0] == pytest.approx(hi[0], abs=1e-7)

    def test_zero_frequency(self):
        I_a, I_b = element_integrals(np.array([0.0]), np.array([0.5]), 0.0)
        assert I_a[0] == pytest.approx(0.25)
        assert I_b[0] == pytest.approx(0.25)


class TestFourierVectors:
    def test_partition_of_unity(self):
        x = np.sort(np.concatenate([[0.0, 1.0], np.random.default_rng(3).uniform(0, 1, 9)]))
        F = fourier_matrix(x, np.array([0.0]), 1.0)
        assert F[0].sum() == pytest.approx(1.0, abs=1e-14)

    def test_sum_is_exact_mean_of_plane_wave(self, vacuum_mesh):
        kappa, d = 1.3, 1.0
        f = boundary_fourier_vector(vacuum_mesh, "top", 0, kappa, d)
        expected = (1.0 - cmath.exp(-1j * kappa * d)) / (1j * kappa * d)
        assert f.sum() == pytest.approx(expected, abs=1e-14)

    def test_supported_on_side(self, vacuum_mesh):
        f = boundary_fourier_vector(vacuum_mesh, "bottom", 1, 0.5, 1.0)
        off_side = np.setdiff1d(np.arange(vacuum_mesh.n_nodes), side_dofs(vacuum_mesh, "bottom"))
        assert np.all(f[off_side] == 0)


class TestDtnBlock:
    def test_low_rank_matches_dense(self, vacuum_mesh):
        spec = DtnSpec(kappa=0.4, d=1.0, D_t=4)
        block = assemble_dtn_block(vacuum_mesh, spec, 2.1 - 0.05j)
        dense = sum(
            1j * zeta_n(2.1 - 0.05j, 0.4, n, 1.0) * 1.0 * np.outer(
                boundary_fourier_vector(vacuum_mesh, "top", n, 0.4, 1.0).conj(),
                boundary_fourier_vector(vacuum_mesh, "top", n, 0.4, 1.0),
            )
            for n in range(-4, 5)
        )
        dofs = block.dofs
        np.testing.assert_allclose(block.dense, dense[np.ix_(dofs, dofs)], atol=1e-13)
        assert block.rank == 9

    def test_real_k_gives_negative_semidefinite_hermitian_part(self, vacuum_mesh):
        spec = DtnSpec(kappa=0.4, d=1.0, D_t=6)
        A = assemble_dtn_block(vacuum_mesh, spec, 3.0).dense
        eigenvalues = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
        assert eigenvalues.max() <= 1e-13

    def test_bottom_side(self, vacuum_mesh):
        spec = DtnSpec(kappa=0.0, d=1.0, D_t=1, side="bottom")
        block = assemble_dtn_block(vacuum_mesh, spec, 1.0)
        np.testing.assert_allclose(vacuum_mesh.nodes[block.dofs, 1], -0.75)


class TestBranchCutGeometry:
    def test_disk_at_branch_point(self):
        assert branch_cut_hits_disk(1.0 + 0.0j, 0.1, np.array([1.0, 5.0])) == [1.0]

    def test_disk_on_hyperbola(self):
        y = -1.7
        point = complex(math.sqrt(1.0 + y * y) + 0.03, y)
        assert branch_cut_hits_disk(point, 0.1, np.array([1.0])) == [1.0]

    def test_clear_disk(self):
        assert branch_cut_hits_disk(3.0 + 0.5j, 0.5, np.array([-1.0, 1.0])) == []
