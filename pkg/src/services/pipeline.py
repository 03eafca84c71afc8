# src/services/pipeline.py
"""
End-to-end solve: mesh -> blocks -> operator per Bloch wavenumber ->
contour solver per region -> eigenvalue table, audit log and field files.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from config.settings import Config
from src.models.errors import ConfigError, ResonanceError
from src.models.mesh import Mesh
from src.models.run_config import RunConfig
from src.services.assembly import NepOperator, assemble_blocks, dump_matrix
from src.services.eigenfunctions import export_eigenfunction
from src.services.export_services import EIGENVALUE_COLUMNS, ExportService
from src.services.materials import scaled_to_thz
from src.services.mesh_generator import generate_mesh, refine_to_level
from src.services.mesh_io import export_mesh, import_mesh
from src.services.nep_solver import EigenResult, RegionResult, solve_region

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_PARTIAL = 3


@dataclass
class KappaOutcome:
    """Everything one Bloch wavenumber produced, failures included"""

    kappa: float
    regions: list[tuple[str, RegionResult]] = field(default_factory=list)
    errors: list[dict[str, Any]] = field(default_factory=list)
    operator: NepOperator | None = None
    attempted: int = 0

    @property
    def eigenvalues(self) -> list[tuple[str, EigenResult]]:
        found = [(label, r) for label, result in self.regions for r in result.eigenvalues]
        return sorted(found, key=lambda item: (item[1].k.real, item[1].k.imag))


@dataclass
class SolveReport:
    rows: list[dict[str, Any]]
    outcomes: list[KappaOutcome]
    files: list[Path]
    exit_code: int

    @property
    def errors(self) -> list[dict[str, Any]]:
        return [e for o in self.outcomes for e in o.errors]


# ============= BUILDING =============


def build_mesh(config: RunConfig) -> Mesh:
    """Imported or generated mesh, uniformly refined to mesh.refinement"""
    if config.mesh.file is not None:
        logger.info(f"📂 Loading mesh {config.mesh.file}")
        mesh = import_mesh(config.mesh.file)
    else:
        mesh = generate_mesh(config.geometry(), config.mesh.target_h, config.mesh.grading)
    if config.mesh.refinement > mesh.level:
        mesh = refine_to_level(mesh, config.mesh.refinement - mesh.level)
        logger.info(f"🔧 Refined to level {mesh.level}: {mesh.n_nodes} nodes")
    return mesh


def build_operator(mesh: Mesh, config: RunConfig, kappa: float) -> NepOperator:
    blocks = assemble_blocks(mesh, kappa, config.dtn.D_t)
    return NepOperator(blocks, config.permittivity(), dtn_mode=config.dtn.mode, margin=config.dtn.margin)


def eigen_residual(op: NepOperator, k: complex, vector: np.ndarray) -> float:
    """||G(k) v|| / ||v|| on a fresh evaluation"""
    norm = np.linalg.norm(vector)
    if norm == 0:
        return float("inf")
    return float(np.linalg.norm(op.evaluate(k) @ vector) / norm)


# ============= SOLVING =============


def solve_kappa(mesh: Mesh, config: RunConfig, kappa: float, regions: list | None = None) -> KappaOutcome:
    """All regions at one kappa; a failing region is recorded and skipped"""
    regions = config.regions() if regions is None else regions
    outcome = KappaOutcome(kappa=kappa, attempted=len(regions))
    try:
        outcome.operator = build_operator(mesh, config, kappa)
    except ConfigError:
        raise
    except ResonanceError as exc:
        logger.error(f"❌ kappa={kappa:.6g}: operator build failed: {exc}")
        outcome.errors.append({"kappa": kappa, "region": None, "error": type(exc).__name__, "detail": str(exc), "exit_code": exc.exit_code})
        return outcome

    solver = config.solver_config()
    for index, region in enumerate(regions):
        label = f"R{index}"
        try:
            result = solve_region(outcome.operator, region, solver, region_label=label)
        except ConfigError:
            raise
        except ResonanceError as exc:
            logger.error(f"❌ Region {label} at kappa={kappa:.6g} failed: {exc}")
            outcome.errors.append({"kappa": kappa, "region": label, "error": type(exc).__name__, "detail": str(exc), "exit_code": exc.exit_code})
            continue
        outcome.regions.append((label, result))
    return outcome


def eigen_rows(outcome: KappaOutcome, config: RunConfig, mesh: Mesh) -> list[dict[str, Any]]:
    scaling = config.scaling()
    config_hash = config.config_hash()
    rows = []
    for label, result in outcome.eigenvalues:
        rows.append(
            {
                "kappa": outcome.kappa,
                "re": result.k.real,
                "im": result.k.imag,
                "residual": eigen_residual(outcome.operator, result.k, result.eigenvector),
                "metric": result.residual,
                "disk_id": result.disk_id,
                "region": label,
                "mesh_level": mesh.level,
                "dofs": outcome.operator.dimension,
                "config_hash": config_hash,
                "thz": scaled_to_thz(result.k, scaling),
            }
        )
    return rows


def merged_audit(outcomes: list[KappaOutcome], rows: list[dict[str, Any]]) -> list[dict[str, Any]]:
    """Region audits in (kappa, region) order, failures and output rows appended, renumbered"""
    events: list[dict[str, Any]] = []
    for outcome in outcomes:
        for label, result in outcome.regions:
            events.extend({**e, "kappa": outcome.kappa, "region": label} for e in result.audit.events)
        events.extend({"event": "region_error", **e} for e in outcome.errors)
    events.extend({"event": "row", **row} for row in rows)
    return [{**e, "seq": i} for i, e in enumerate(events)]


def exit_code_for(outcomes: list[KappaOutcome]) -> int:
    attempted = sum(o.attempted for o in outcomes)
    # an operator that failed to build takes all of its regions with it
    failed = sum(len(o.errors) if o.operator is not None else o.attempted for o in outcomes)
    if failed == 0:
        return EXIT_OK
    if failed >= attempted:
        return max(e["exit_code"] for o in outcomes for e in o.errors)
    return EXIT_PARTIAL


def output_directory(config: RunConfig, override: str | Path | None = None) -> Path:
    if override is not None:
        return Path(override)
    if config.output.directory is not None:
        return Path(config.output.directory)
    return Config().OUTPUT_DIR


def write_fields(mesh: Mesh, outcome: KappaOutcome, mesh_path: Path, index: int) -> list[Path]:
    """One field file per eigenvalue, next to the mesh file it refers to"""
    directory = mesh_path.parent
    written = []
    for j, (label, result) in enumerate(outcome.eigenvalues):
        path = directory / f"kappa{index:03d}_{label}_{j:02d}.field"
        written.append(export_eigenfunction(mesh, result.eigenvector, path, k=result.k, kappa=outcome.kappa, mesh_path=mesh_path))
    return written


def run_solve(
    config: RunConfig,
    output_dir: str | Path | None = None,
    export_fields: bool | None = None,
    dump_matrix_at: complex | None = None,
    mesh: Mesh | None = None,
) -> SolveReport:
    """Solve every (kappa, region) pair of the config and write the results"""
    regions = config.regions()
    if not regions:
        raise ConfigError("no search regions given", key="solver.regions")
    directory = output_directory(config, output_dir)
    export_fields = config.output.export_fields if export_fields is None else export_fields
    name = config.output.name

    mesh = mesh if mesh is not None else build_mesh(config)
    outcomes, rows, files = [], [], []
    mesh_path = directory / f"{name}_fields" / "mesh.msh"
    if export_fields:
        files.append(export_mesh(mesh, mesh_path))
    for index, kappa in enumerate(config.kappas()):
        logger.info(f"🔧 Solving kappa={kappa:.6g} ({index + 1}/{len(config.kappas())})")
        outcome = solve_kappa(mesh, config, kappa, regions)
        outcomes.append(outcome)
        if outcome.operator is None:
            continue
        rows.extend(eigen_rows(outcome, config, mesh))
        if dump_matrix_at is not None:
            files.append(dump_matrix(outcome.operator, dump_matrix_at, directory / f"{name}.matrix.kappa{index:03d}.coo"))
        if export_fields:
            files.extend(write_fields(mesh, outcome, mesh_path, index))

    files.extend(ExportService.export_tables(rows, directory / name, EIGENVALUE_COLUMNS, config.formats(), "Resonances"))
    files.append(ExportService.write_audit_log(merged_audit(outcomes, rows), directory / f"{name}.audit.jsonl"))
    effective = directory / f"{name}.config.ini"
    effective.write_text(config.to_ini(), encoding="utf-8")
    files.append(effective)

    code = exit_code_for(outcomes)
    logger.info(f"✅ {len(rows)} eigenvalues written to {directory} (exit code {code})")
    return SolveReport(rows=rows, outcomes=outcomes, files=files, exit_code=code)
