# src/services/band_structure.py
"""
Band sweeps over the Brillouin zone: one solve per kappa sample (run
concurrently), eigenfunction classification, and branch linking across
neighbouring samples.
"""

import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from scipy.optimize import linear_sum_assignment

from config.settings import Config
from src.models.errors import ConfigError
from src.models.mesh import Mesh
from src.models.run_config import RunConfig
from src.services.eigenfunctions import classify
from src.services.export_services import BAND_COLUMNS, ExportService
from src.services.materials import scaled_to_thz
from src.services.mesh_io import export_mesh
from src.services.pipeline import (
    KappaOutcome,
    build_mesh,
    eigen_residual,
    exit_code_for,
    merged_audit,
    output_directory,
    solve_kappa,
    write_fields,
)

logger = logging.getLogger(__name__)


@dataclass
class BandReport:
    rows: list[dict[str, Any]]
    outcomes: list[KappaOutcome]
    files: list[Path]
    exit_code: int

    @property
    def gaps(self) -> list[float]:
        """kappa samples that produced no operator or lost a region"""
        return [o.kappa for o in self.outcomes if o.errors]


# ============= BRANCHES =============


def link_branches(samples: list[list[complex]]) -> list[list[int]]:
    """
    Branch index for every eigenvalue of every sample (samples ordered by
    kappa). Eigenvalues of consecutive non-empty samples are matched by a
    minimum-cost assignment on |Re k| distance; unmatched ones open new
    branches.
    """
    labels: list[list[int]] = []
    next_branch = 0
    previous: list[complex] = []
    previous_labels: list[int] = []
    for ks in samples:
        current = [-1] * len(ks)
        if previous and ks:
            cost = np.abs(np.subtract.outer(np.real(previous), np.real(ks)))
            rows, cols = linear_sum_assignment(cost)
            for r, c in zip(rows, cols):
                current[c] = previous_labels[r]
        for i, label in enumerate(current):
            if label < 0:
                current[i] = next_branch
                next_branch += 1
        labels.append(current)
        if ks:
            previous, previous_labels = list(ks), current
    return labels


# ============= SWEEP =============


async def sweep_async(mesh: Mesh, config: RunConfig, kappas: list[float], jobs: int) -> list[KappaOutcome]:
    """Solve all kappa samples, at most `jobs` at a time, in worker threads"""
    semaphore = asyncio.Semaphore(jobs)
    loop = asyncio.get_running_loop()
    regions = config.regions()

    with ThreadPoolExecutor(max_workers=jobs) as pool:

        async def one(kappa: float) -> KappaOutcome:
            async with semaphore:
                return await loop.run_in_executor(pool, solve_kappa, mesh, config, kappa, regions)

        results = await asyncio.gather(*(one(kappa) for kappa in kappas), return_exceptions=True)

    outcomes = []
    for kappa, result in zip(kappas, results):
        if isinstance(result, ConfigError):
            raise result
        if isinstance(result, Exception):
            logger.error(f"❌ kappa={kappa:.6g} failed: {result}")
            outcome = KappaOutcome(kappa=kappa, attempted=len(regions))
            outcome.errors.append(
                {"kappa": kappa, "region": None, "error": type(result).__name__, "detail": str(result), "exit_code": 2}
            )
            outcomes.append(outcome)
        else:
            outcomes.append(result)
    return sorted(outcomes, key=lambda o: o.kappa)


def band_rows(outcomes: list[KappaOutcome], config: RunConfig, mesh: Mesh) -> list[dict[str, Any]]:
    geometry = config.geometry()
    scaling = config.scaling()
    per_sample = [[r.k for _, r in o.eigenvalues] if o.operator is not None else [] for o in outcomes]
    branches = link_branches(per_sample)

    rows = []
    for outcome, labels in zip(outcomes, branches):
        if outcome.operator is None:
            continue
        for (_, result), branch in zip(outcome.eigenvalues, labels):
            label = classify(mesh, result.eigenvector, geometry, config.classify.shell, config.classify.majority).label
            rows.append(
                {
                    "kappa": outcome.kappa,
                    "branch": branch,
                    "re": result.k.real,
                    "im": result.k.imag,
                    "residual": eigen_residual(outcome.operator, result.k, result.eigenvector),
                    "classification": label,
                    "thz": scaled_to_thz(result.k, scaling),
                }
            )
    rows.sort(key=lambda r: (r["kappa"], r["re"]))
    return rows


def run_band_sweep(
    config: RunConfig,
    output_dir: str | Path | None = None,
    jobs: int | None = None,
    export_fields: bool | None = None,
    mesh: Mesh | None = None,
) -> BandReport:
    """Band structure over kappa_count samples of [0, kappa_max]"""
    if config.bloch.kappa_count is None:
        raise ConfigError("a sweep needs kappa_count >= 2", key="bloch.kappa_count")
    if not config.regions():
        raise ConfigError("no search regions given", key="solver.regions")
    jobs = jobs or Config().JOBS
    if jobs < 1:
        raise ConfigError("jobs must be at least 1", key="jobs")
    directory = output_directory(config, output_dir)
    export_fields = config.output.export_fields if export_fields is None else export_fields
    name = config.output.name

    mesh = mesh if mesh is not None else build_mesh(config)
    kappas = config.kappas()
    logger.info(f"📊 Sweeping {len(kappas)} kappa samples with {jobs} worker(s)")
    outcomes = asyncio.run(sweep_async(mesh, config, kappas, jobs))

    rows = band_rows(outcomes, config, mesh)
    files = ExportService.export_tables(rows, directory / f"{name}.bands", BAND_COLUMNS, config.formats(), "Band structure")
    files.append(ExportService.write_audit_log(merged_audit(outcomes, rows), directory / f"{name}.bands.audit.jsonl"))
    if export_fields:
        mesh_path = export_mesh(mesh, directory / f"{name}_fields" / "mesh.msh")
        files.append(mesh_path)
        for index, outcome in enumerate(outcomes):
            if outcome.operator is not None:
                files.extend(write_fields(mesh, outcome, mesh_path, index))

    gaps = [o.kappa for o in outcomes if o.errors]
    if gaps:
        logger.warning(f"⚠️ {len(gaps)} kappa sample(s) incomplete: {', '.join(f'{k:.6g}' for k in gaps)}")
    code = exit_code_for(outcomes)
    logger.info(f"✅ Band structure: {len(rows)} rows over {len(kappas)} samples")
    return BandReport(rows=rows, outcomes=outcomes, files=files, exit_code=code)
