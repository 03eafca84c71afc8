# src/services/convergence.py
"""
Mesh convergence study: the same region solved on a ladder of uniformly
refined meshes, with observed orders log2(|k^j - k^(j-1)| / |k^(j+1) - k^j|).
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from src.models.errors import ConfigError
from src.models.mesh import Mesh
from src.models.run_config import RunConfig
from src.services.export_services import CONVERGENCE_COLUMNS, ExportService
from src.services.mesh_generator import refine_levels
from src.services.nep_solver import Disk
from src.services.pipeline import (
    KappaOutcome,
    build_mesh,
    exit_code_for,
    merged_audit,
    output_directory,
    solve_kappa,
)

logger = logging.getLogger(__name__)

MIN_LEVELS = 4
# differences below this (relative to |k|) make an order meaningless
DIFFERENCE_FLOOR = 1e-14


@dataclass
class ConvergenceReport:
    rows: list[dict[str, Any]]
    outcomes: list[KappaOutcome]
    files: list[Path]
    exit_code: int

    @property
    def orders(self) -> list[float | None]:
        return [row["order"] for row in self.rows]


def convergence_orders(values: Sequence[complex | None]) -> list[float | None]:
    """Order at interior levels; None at the ends and wherever it is undefined"""
    orders: list[float | None] = [None] * len(values)
    for j in range(1, len(values) - 1):
        prev, here, after = values[j - 1], values[j], values[j + 1]
        if prev is None or here is None or after is None:
            continue
        floor = DIFFERENCE_FLOOR * max(abs(here), 1.0)
        before_step, after_step = abs(here - prev), abs(after - here)
        if before_step <= floor or after_step <= floor:
            continue
        orders[j] = math.log2(before_step / after_step)
    return orders


def region_center(region) -> complex:
    if isinstance(region, Disk):
        return region.center
    return complex((region.x0 + region.x1) / 2, (region.y0 + region.y1) / 2)


def track(found: Sequence[complex], reference: complex) -> complex | None:
    """The eigenvalue nearest to the reference (previous level or region centre)"""
    if not found:
        return None
    return min(found, key=lambda k: abs(k - reference))


def run_convergence(config: RunConfig, output_dir: str | Path | None = None, mesh: Mesh | None = None) -> ConvergenceReport:
    """Solve the first region of the config on `converge.levels` refinement levels"""
    levels = config.converge.levels
    if levels < MIN_LEVELS:
        raise ConfigError(f"a convergence ladder needs at least {MIN_LEVELS} levels, got {levels}", key="converge.levels")
    regions = config.regions()
    if not regions:
        raise ConfigError("no search regions given", key="solver.regions")
    region = regions[0]
    kappa = config.kappas()[0]
    directory = output_directory(config, output_dir)

    base = mesh if mesh is not None else build_mesh(config)
    reference = region_center(region)
    outcomes, values, rows = [], [], []
    for level_mesh in refine_levels(base, levels - 1):
        logger.info(f"🔧 Level {level_mesh.level}: {level_mesh.n_nodes} nodes, h={level_mesh.h:.4g}")
        outcome = solve_kappa(level_mesh, config, kappa, [region])
        outcomes.append(outcome)
        k = track([r.k for _, r in outcome.eigenvalues], reference)
        if k is not None:
            reference = k
        else:
            logger.warning(f"⚠️ No eigenvalue at level {level_mesh.level}")
        values.append(k)
        rows.append(
            {
                "level": level_mesh.level,
                "dofs": outcome.operator.dimension if outcome.operator is not None else None,
                "h": level_mesh.h,
                "re": k.real if k is not None else None,
                "im": k.imag if k is not None else None,
            }
        )

    for row, order in zip(rows, convergence_orders(values)):
        row["order"] = order

    name = config.output.name
    files = ExportService.export_tables(rows, directory / f"{name}.convergence", CONVERGENCE_COLUMNS, config.formats(), "Convergence")
    files.append(ExportService.write_audit_log(merged_audit(outcomes, rows), directory / f"{name}.convergence.audit.jsonl"))
    logger.info(f"📊 Orders: {', '.join('-' if o is None else f'{o:.4f}' for o in (r['order'] for r in rows))}")
    return ConvergenceReport(rows=rows, outcomes=outcomes, files=files, exit_code=exit_code_for(outcomes))
