# tests/test_run_config.py

import math

import pytest

from config.settings import Config
from src.models.errors import ConfigError
from src.models.run_config import (
    RunConfig,
    apply_overrides,
    evaluate_expression,
    load_run_config,
    parse_regions,
    read_ini,
)
from src.services.nep_solver import Disk, Rectangle

MINIMAL = """
[geometry]
d = 1
ell = 0.5
slit_width = 0.1   # centred slit

[material]
model = drude_sommerfeld
omega_p_hat = 4.6
gamma_hat = 0.0358333

[mesh]
target_h = 0.1

[solver]
regions = disk:1.5,0,1; rect:0,3,-1,0,0.5
"""


def _preset(name: str) -> RunConfig:
    return load_run_config(path=Config().preset_path(name))


class TestExpressions:
    def test_names_and_pi(self):
        assert evaluate_expression("pi/(4*d)", {"d": 2.0}) == pytest.approx(math.pi / 8)

    def test_functions_and_powers(self):
        assert evaluate_expression("-sqrt(2)**2 + 1e-3") == pytest.approx(-2.0 + 1e-3)

    @pytest.mark.parametrize("text", ["e", "__import__('os')", "1/0", "d +", "[1, 2]"])
    def test_rejected(self, text):
        with pytest.raises(ValueError):
            evaluate_expression(text)


class TestLoading:
    def test_minimal_config_fills_defaults(self):
        config = load_run_config(text=MINIMAL)
        assert config.geometry().H == pytest.approx(0.75)
        assert config.geometry().slit.min_width == pytest.approx(0.1)
        assert config.dtn.D_t == 50
        assert config.kappas() == [0.0]
        assert config.formats() == ["csv"]

    def test_regions(self):
        disk, rect = load_run_config(text=MINIMAL).regions()
        assert disk == Disk(center=1.5, radius=1.0, n_nodes=64)
        assert isinstance(rect, Rectangle)
        assert rect.disk_radius == 0.5

    def test_region_node_count(self):
        (disk,) = parse_regions("disk:pi,0,d/2,32", {"d": 1.0})
        assert disk.center == pytest.approx(math.pi)
        assert disk.radius == 0.5
        assert disk.n_nodes == 32

    def test_overrides(self):
        config = load_run_config(text=MINIMAL, overrides=["mesh.refinement=2", "bloch.kappa=pi/(2*d)"])
        assert config.mesh.refinement == 2
        assert config.bloch.kappa == pytest.approx(math.pi / 2)

    def test_bad_override(self):
        with pytest.raises(ConfigError):
            apply_overrides({}, ["refinement=2"])

    def test_kappa_samples(self):
        config = load_run_config(text=MINIMAL, overrides=["bloch.kappa_count=5"])
        kappas = config.kappas()
        assert len(kappas) == 5
        assert kappas[0] == 0.0
        assert kappas[-1] == pytest.approx(math.pi)

    def test_inline_comment_stripped(self):
        assert read_ini(MINIMAL)["geometry"]["slit_width"] == "0.1"


class TestErrors:
    def _error(self, text: str, overrides: list[str] | None = None) -> ConfigError:
        with pytest.raises(ConfigError) as info:
            load_run_config(text=text, overrides=overrides)
        return info.value

    def test_missing_period(self):
        assert self._error(MINIMAL.replace("d = 1\n", "")).key == "geometry.d"

    def test_unknown_key(self):
        assert self._error(MINIMAL, ["solver.bogus=1"]).key == "solver.bogus"

    def test_unknown_section(self):
        assert self._error(MINIMAL, ["plot.style=dark"]).key == "plot"

    def test_fractional_integer(self):
        assert self._error(MINIMAL, ["dtn.D_t=2.5"]).key == "dtn.D_t"

    def test_two_mesh_sources(self):
        assert self._error(MINIMAL, ["mesh.file=cell.msh"]).key == "mesh"

    def test_pec_needs_pec_geometry(self):
        assert self._error(MINIMAL, ["material.model=pec"]).key == "material.model"

    def test_bad_region(self):
        assert self._error(MINIMAL, ["solver.regions=circle:1,2"]).key == "solver.regions"

    def test_empty_regions_allowed_in_config(self):
        assert load_run_config(text=MINIMAL, overrides=["solver.regions="]).regions() == []

    def test_unknown_format(self):
        assert self._error(MINIMAL, ["output.formats=csv,pdf"]).key == "output.formats"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(path=tmp_path / "absent.ini")


class TestSerialization:
    def test_effective_config_round_trip(self):
        config = load_run_config(text=MINIMAL)
        again = load_run_config(text=config.to_ini())
        assert again.sections() == config.sections()
        assert again.config_hash() == config.config_hash()

    def test_hash_tracks_changes(self):
        config = load_run_config(text=MINIMAL)
        assert config.with_overrides(mesh={"refinement": 1}).config_hash() != config.config_hash()
        assert config.with_overrides(mesh={"refinement": 0}).config_hash() == config.config_hash()


class TestPresets:
    def test_all_presets_load(self):
        names = Config().available_presets()
        assert {"pec-delta005", "sheetmetal", "drude-sommerfeld", "trapezoid"} <= set(names)
        for name in names:
            assert _preset(name).regions()

    def test_pec_preset(self):
        config = _preset("pec-delta005")
        assert config.bloch.kappa == pytest.approx(math.pi / 0.4)
        assert config.permittivity().kind == "pec"
        assert config.geometry().H == pytest.approx(0.7)

    def test_sheetmetal_scaling(self):
        model = _preset("sheetmetal").permittivity()
        assert model.kind == "drude_lossless"
        assert model.omega_p_hat == pytest.approx(1.0)

    def test_gold_scaling(self):
        model = _preset("drude-sommerfeld").permittivity()
        assert model.omega_p_hat == pytest.approx(4.6)
        assert model.gamma_hat == pytest.approx(0.0358333, rel=1e-5)

    def test_trapezoid_preset(self):
        slit = _preset("trapezoid").geometry().slit
        assert slit.kind == "trapezoid"
        assert (slit.top_width, slit.base_width) == (0.05, 0.1)
