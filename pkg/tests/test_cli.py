# tests/test_cli.py

import pytest

from src.cli.commands import main, parse_complex
from src.services.mesh_io import export_mesh, import_mesh


class TestOracleCommand:
    def test_first_mode(self, capsys):
        assert main(["oracle", "pec-asymptotic", "--delta", "0.05"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("k_1 = 2.81")

    def test_listing(self, capsys):
        assert main(["oracle", "pec-asymptotic", "--delta", "0.01", "--m-max", "3", "--kappa", "pi/d"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert [line.split()[0] for line in lines] == ["k_1", "k_2", "k_3"]

    def test_bad_kappa_expression(self):
        assert main(["oracle", "pec-asymptotic", "--delta", "0.05", "--kappa", "pi/q"]) == 1


class TestConfigHandling:
    def test_unknown_preset(self):
        assert main(["solve", "--preset", "no-such-preset"]) == 1

    def test_no_config_source(self):
        assert main(["solve"]) == 1

    def test_dump_effective_config(self, capsys):
        assert main(["solve", "--preset", "pec-delta005", "--set", "mesh.refinement=2", "--dump-effective-config"]) == 0
        out = capsys.readouterr().out
        assert "[geometry]" in out
        assert "refinement = 2" in out

    def test_bad_override(self):
        assert main(["solve", "--preset", "pec-delta005", "--set", "mesh.grading=0.5", "--dump-effective-config"]) == 1

    def test_empty_regions(self, tmp_path):
        code = main(["solve", "--preset", "pec-delta005", "--set", "solver.regions=", "--output-dir", str(tmp_path)])
        assert code == 1

    def test_sweep_without_samples(self, tmp_path):
        assert main(["sweep", "--preset", "pec-delta005", "--output-dir", str(tmp_path)]) == 1

    def test_parse_complex(self):
        assert parse_complex("2.5,-0.1") == 2.5 - 0.1j


class TestMeshCommands:
    def test_info(self, slab_mesh, tmp_path, capsys):
        path = export_mesh(slab_mesh, tmp_path / "slab.msh")
        assert main(["mesh", "info", "--input", str(path)]) == 0
        out = capsys.readouterr().out
        assert f"nodes      {slab_mesh.n_nodes}" in out

    def test_refine(self, slab_mesh, tmp_path):
        source = export_mesh(slab_mesh, tmp_path / "slab.msh")
        target = tmp_path / "fine.msh"
        assert main(["mesh", "refine", "--input", str(source), "--levels", "2", "--output", str(target)]) == 0
        fine = import_mesh(target)
        assert fine.level == 2
        assert fine.n_triangles == 16 * slab_mesh.n_triangles

    def test_unreadable_mesh(self, tmp_path):
        path = tmp_path / "broken.msh"
        path.write_text("NODES two\n")
        assert main(["mesh", "info", "--input", str(path)]) == 1

    def test_missing_subcommand(self):
        with pytest.raises(SystemExit):
            main(["mesh"])
