# tests/test_band_structure.py

import math

import pytest

from src.models.errors import ConfigError
from src.services.band_structure import link_branches, run_band_sweep, sweep_async
from src.services.export_services import BAND_COLUMNS
from src.services.pipeline import EXIT_OK


class TestLinkBranches:
    def test_follows_nearest_real_part(self):
        samples = [[1.0, 2.0], [2.1 - 0.1j, 1.05], [1.1, 2.2]]
        assert link_branches(samples) == [[0, 1], [1, 0], [0, 1]]

    def test_new_eigenvalue_opens_branch(self):
        assert link_branches([[1.0], [1.02, 3.0], [3.1]]) == [[0], [0, 1], [1]]

    def test_empty_sample_is_bridged(self):
        assert link_branches([[1.0, 2.0], [], [2.05, 0.98]]) == [[0, 1], [], [1, 0]]

    def test_nothing_found(self):
        assert link_branches([[], []]) == [[], []]


class TestSweep:
    @pytest.mark.asyncio
    async def test_outcomes_sorted_by_kappa(self, vacuum_mesh, vacuum_config):
        kappas = [math.pi, 0.0, math.pi / 2]
        outcomes = await sweep_async(vacuum_mesh, vacuum_config, kappas, jobs=2)
        assert [o.kappa for o in outcomes] == sorted(kappas)
        assert all(o.operator is not None and not o.errors for o in outcomes)

    @pytest.mark.asyncio
    async def test_failing_sample_is_isolated(self, vacuum_mesh, vacuum_config):
        # the region sits on the Rayleigh anomaly of kappa = 2 only
        config = vacuum_config.with_overrides(solver={"regions": "disk:2,0,0.1"})
        outcomes = await sweep_async(vacuum_mesh, config, [0.0, 2.0], jobs=2)
        assert not outcomes[0].errors
        assert outcomes[1].errors[0]["error"] == "RegionTouchesSingularity"

    def test_band_files(self, vacuum_mesh, vacuum_config, tmp_path):
        config = vacuum_config.with_overrides(bloch={"kappa_count": 3})
        report = run_band_sweep(config, jobs=2, mesh=vacuum_mesh)
        assert (tmp_path / "resonances.bands.csv").is_file()
        assert (tmp_path / "resonances.bands.audit.jsonl").is_file()
        assert [o.kappa for o in report.outcomes] == pytest.approx([0.0, math.pi / 2, math.pi])
        assert report.gaps == []
        assert report.exit_code == EXIT_OK
        assert all(set(BAND_COLUMNS) <= set(row) for row in report.rows)

    def test_sweep_needs_samples(self, vacuum_mesh, vacuum_config):
        with pytest.raises(ConfigError) as info:
            run_band_sweep(vacuum_config, mesh=vacuum_mesh)
        assert info.value.key == "bloch.kappa_count"
