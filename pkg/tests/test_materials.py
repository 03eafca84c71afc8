# tests/test_materials.py

import numpy as np
import pytest

from src.models.errors import ConfigError, EvaluationAtSingularity
from src.models.materials import GOLD_GAMMA, GOLD_OMEGA_P, SHEETMETAL_OMEGA_P, PermittivityModel, Scaling
from src.services.materials import (
    evaluate_permittivity,
    permittivity_poles,
    permittivity_singularities,
    permittivity_zeros,
    scale_drude,
    scaled_to_thz,
)


class TestEvaluatePermittivity:
    def test_vacuum_is_one(self):
        assert evaluate_permittivity(PermittivityModel.vacuum(), 2.0 + 1j) == 1.0

    def test_pec_has_no_permittivity(self):
        with pytest.raises(ConfigError):
            evaluate_permittivity(PermittivityModel.pec(), 1.0)

    def test_lossless_below_plasma_is_negative(self):
        model = PermittivityModel.drude_lossless(1.0)
        assert evaluate_permittivity(model, 0.5) == pytest.approx(1.0 - 4.0)

    def test_sommerfeld_matches_expanded_form(self):
        model = PermittivityModel.drude_sommerfeld(4.6, 0.0358333)
        k = 1.3
        wp2, g = 4.6**2, 0.0358333
        expected = 1 - wp2 / (k**2 + g**2) + 1j * g * wp2 / (k * (k**2 + g**2))
        assert evaluate_permittivity(model, k) == pytest.approx(expected, rel=1e-12)

    def test_lossless_limit(self):
        lossless = PermittivityModel.drude_lossless(2.0)
        undamped = PermittivityModel.drude_sommerfeld(2.0, 0.0)
        for k in np.linspace(0.1, 5.0, 17):
            assert evaluate_permittivity(undamped, k) == pytest.approx(evaluate_permittivity(lossless, k), rel=1e-15)

    def test_pole_exclusion(self):
        model = PermittivityModel.drude_sommerfeld(4.6, 0.5, exclusion_radius=1e-3)
        with pytest.raises(EvaluationAtSingularity):
            evaluate_permittivity(model, -0.5j + 5e-4)
        evaluate_permittivity(model, -0.5j + 2e-3)

    def test_cauchy_riemann(self):
        model = PermittivityModel.drude_sommerfeld(4.6, 0.0358333)
        k, h = 1.2 - 0.3j, 1e-6
        along_real = (evaluate_permittivity(model, k + h) - evaluate_permittivity(model, k - h)) / (2 * h)
        along_imag = (evaluate_permittivity(model, k + 1j * h) - evaluate_permittivity(model, k - 1j * h)) / (2j * h)
        assert abs(along_real - along_imag) <= 1e-6 * abs(along_real)


class TestSingularities:
    def test_lossless_pole_and_zeros(self):
        model = PermittivityModel.drude_lossless(1.0)
        assert permittivity_poles(model) == [0j]
        zeros = permittivity_zeros(model)
        assert zeros[0] == pytest.approx(-1.0)
        assert zeros[1] == pytest.approx(1.0)

    def test_sommerfeld_zeros_solve_quadratic(self):
        model = PermittivityModel.drude_sommerfeld(4.6, 0.2)
        poles, zeros = permittivity_singularities(model)
        assert poles == [0j, -0.2j]
        for z in zeros:
            assert abs(z * z + 0.2j * z - 4.6**2) < 1e-10

    def test_vacuum_has_none(self):
        assert permittivity_singularities(PermittivityModel.vacuum()) == ([], [])


class TestScaling:
    def test_sheetmetal(self):
        omega_p_hat, gamma_hat = scale_drude(SHEETMETAL_OMEGA_P, 0.0, Scaling(alpha=1e6))
        assert omega_p_hat == pytest.approx(1.0)
        assert gamma_hat == 0.0

    def test_gold(self):
        omega_p_hat, gamma_hat = scale_drude(GOLD_OMEGA_P, GOLD_GAMMA, Scaling(alpha=1e7))
        assert omega_p_hat == pytest.approx(4.6)
        assert gamma_hat == pytest.approx(0.0358333, rel=1e-5)

    def test_identity_scaling(self):
        assert scale_drude(6.0e8, 3.0e8, Scaling()) == pytest.approx((2.0, 1.0))

    def test_rejects_non_positive_plasma_frequency(self):
        with pytest.raises(ConfigError):
            scale_drude(0.0, 0.0, Scaling())

    def test_thz_reporting(self):
        assert scaled_to_thz(0.12492920, Scaling(alpha=1e6)) == pytest.approx(37.478757, rel=1e-6)
