# src/services/nep_solver.py
"""
Multi-step contour-integral eigensolver for holomorphic matrix functions.

Step 1  spectral indicator ||(1/2 pi i) oint G(z)^-1 p dz|| per disk of a cover
Step 2  Beyn extraction on the kept disks (moments C0, C1, thin SVD, small eig)
Step 3  validation of each candidate by the smallest eigenvalue of G(k)

Works on any operator exposing dimension, evaluate(k), factorize(k),
check_holomorphic(k) and singularities(): the FEM NepOperator or a
MatrixFunctionOperator wrapping a plain callable.
"""

import logging
import math
from collections import deque
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Literal, Protocol

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.errors import (
    IterationStalled,
    NotHolomorphicAt,
    NumericalError,
    RegionTouchesSingularity,
    SingularAt,
    SubspaceTooSmall,
)
from src.services.dtn import branch_cut_hits_disk
from src.services.linear_solve import FactorHandle, factorize_matrix

logger = logging.getLogger(__name__)

SPLIT_RADIUS_FACTOR = 0.575
DENSE_NULLSPACE_LIMIT = 512
INSIDE_TOLERANCE = 1e-9

# rng stream ids under the configured seed
PROBE_STREAM = 0
SUBSPACE_STREAM = 1
VALIDATION_STREAM = 2


# ============= MODELS =============


class Disk(BaseModel):
    """Circular contour z0 + r exp(i theta_j), theta_j = 2 pi j / N_t"""

    model_config = ConfigDict(frozen=True)

    center: complex
    radius: float = Field(..., gt=0.0)
    n_nodes: int = Field(default=64, ge=8, description="Trapezoid nodes N_t")

    def unit_nodes(self) -> np.ndarray:
        return np.exp(2j * np.pi * np.arange(self.n_nodes) / self.n_nodes)

    def nodes(self) -> np.ndarray:
        return self.center + self.radius * self.unit_nodes()

    def contains(self, z: complex, tolerance: float = INSIDE_TOLERANCE) -> bool:
        return abs(complex(z) - self.center) <= self.radius * (1 + tolerance)

    def children(self) -> list["Disk"]:
        """Seven disks (one central, six on a ring) covering this one"""
        ring = self.center + (math.sqrt(3) / 2) * self.radius * np.exp(1j * np.pi * np.arange(6) / 3)
        radius = SPLIT_RADIUS_FACTOR * self.radius
        return [Disk(center=c, radius=radius, n_nodes=self.n_nodes) for c in [self.center, *ring]]

    def describe(self) -> dict[str, Any]:
        return {"center": self.center, "radius": self.radius, "n_nodes": self.n_nodes}


class Rectangle(BaseModel):
    """Search rectangle [x0, x1] x [y0, y1] covered by disks of the given radius"""

    model_config = ConfigDict(frozen=True)

    x0: float
    x1: float
    y0: float
    y1: float
    disk_radius: float = Field(..., gt=0.0)

    @model_validator(mode="after")
    def _check_bounds(self):
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise ValueError("rectangle needs x0 < x1 and y0 < y1")
        return self

    def contains(self, z: complex, tolerance: float = 0.0) -> bool:
        z = complex(z)
        return self.x0 - tolerance <= z.real <= self.x1 + tolerance and self.y0 - tolerance <= z.imag <= self.y1 + tolerance

    def describe(self) -> dict[str, Any]:
        return {"rect": [self.x0, self.x1, self.y0, self.y1], "disk_radius": self.disk_radius}


Region = Disk | Rectangle


class SolverConfig(BaseModel):
    """Thresholds and sizes of the contour solver"""

    model_config = ConfigDict(frozen=True)

    indicator_threshold: float = Field(default=0.2, gt=0.0, lt=1.0)
    svd_tol: float = Field(default=1e-10, gt=0.0)
    L1: int = Field(default=24, ge=1, description="Initial probe-subspace width")
    L1_max: int = Field(default=192, ge=1)
    accept_tol: float = Field(default=1e-12, gt=0.0)
    reject_tol: float = Field(default=1e-5, gt=0.0)
    refine_radius_factor: float = Field(default=0.1, gt=0.0, lt=1.0)
    rng_seed: int = 0
    max_recursion_depth: int = Field(default=3, ge=0)
    n_nodes: int = Field(default=64, ge=8, description="Default N_t for cover disks")
    metric_mode: Literal["absolute", "relative"] = "absolute"
    overlap: float = Field(default=0.15, ge=0.0, lt=1.0)
    dedup_factor: float = Field(default=1e-8, gt=0.0)
    max_inverse_iterations: int = Field(default=200, ge=1)
    inverse_tol: float = Field(default=1e-10, gt=0.0)
    verify_quadrature: bool = False
    workers: int = Field(default=1, ge=1, description="Threads for quadrature-node factorizations")

    @model_validator(mode="after")
    def _check_thresholds(self):
        if not 0 < self.accept_tol < self.reject_tol < 1:
            raise ValueError("need 0 < accept_tol < reject_tol < 1")
        if self.L1 > self.L1_max:
            raise ValueError("L1 must not exceed L1_max")
        return self


@dataclass(frozen=True)
class Candidate:
    k: complex
    vector: np.ndarray
    inside: bool


@dataclass(frozen=True)
class BeynResult:
    candidates: list[Candidate]
    singular_values: np.ndarray
    rank: int
    l1: int
    saturated: bool
    # C1 reaches directions C0 misses (cancelling residues or too many eigenvalues)
    deficient: bool = False


@dataclass(frozen=True)
class Validation:
    lambda0: complex
    eigenvector: np.ndarray
    method: Literal["inverse_iteration", "smallest_singular_value", "singular"]
    iterations: int = 0

    def __iter__(self):
        return iter((self.lambda0, self.eigenvector))


@dataclass(frozen=True)
class EigenResult:
    """Verified eigenvalue with its validation metric and origin"""

    k: complex
    residual: float
    eigenvector: np.ndarray
    disk: Disk
    disk_id: str
    lambda0: complex = 0j
    depth: int = 0
    provenance: dict[str, Any] = field(default_factory=dict)


@dataclass
class AuditLog:
    """Append-only list of solver events"""

    events: list[dict[str, Any]] = field(default_factory=list)

    def record(self, event: str, **fields: Any) -> None:
        self.events.append({"seq": len(self.events), "event": event, **fields})

    def of_kind(self, event: str) -> list[dict[str, Any]]:
        return [e for e in self.events if e["event"] == event]


@dataclass
class RegionResult:
    eigenvalues: list[EigenResult]
    audit: AuditLog
    region: Region | None = None


# ============= OPERATORS =============


class NepLike(Protocol):
    @property
    def dimension(self) -> int: ...

    def evaluate(self, k: complex): ...

    def factorize(self, k: complex) -> FactorHandle: ...

    def check_holomorphic(self, k: complex) -> None: ...

    def singularities(self) -> list[tuple[str, complex]]: ...


class MatrixFunctionOperator:
    """Any callable z -> square matrix (dense or sparse) as an operator"""

    def __init__(
        self,
        func: Callable[[complex], Any],
        dimension: int,
        singularities: Sequence[tuple[str, complex]] = (),
        margin: float = 1e-10,
    ):
        self.func = func
        self._dimension = int(dimension)
        self._singularities = [(reason, complex(p)) for reason, p in singularities]
        self.margin = margin

    @property
    def dimension(self) -> int:
        return self._dimension

    def singularities(self) -> list[tuple[str, complex]]:
        return list(self._singularities)

    def check_holomorphic(self, k: complex) -> None:
        for reason, point in self._singularities:
            if abs(complex(k) - point) < self.margin:
                raise NotHolomorphicAt(complex(k), reason, near=point)

    def evaluate(self, k: complex):
        self.check_holomorphic(k)
        matrix = self.func(complex(k))
        return matrix if sp.issparse(matrix) else np.asarray(matrix, dtype=complex)

    def factorize(self, k: complex) -> FactorHandle:
        return factorize_matrix(self.evaluate(k), k)


# ============= QUADRATURE =============


def _gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def contour_moments(op: NepLike, disk: Disk, rhs: np.ndarray, workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """
    Trapezoid approximations of (1/2 pi i) oint G^-1 rhs dz and
    (1/2 pi i) oint z G^-1 rhs dz on the disk boundary.
    """
    unit = disk.unit_nodes()
    nodes = disk.center + disk.radius * unit
    weights = disk.radius * unit / disk.n_nodes

    def solve_at(z: complex) -> np.ndarray:
        return op.factorize(z).solve(rhs)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            solutions = list(pool.map(solve_at, nodes))
    else:
        solutions = [solve_at(z) for z in nodes]

    C0 = np.zeros(rhs.shape, dtype=complex)
    C1 = np.zeros(rhs.shape, dtype=complex)
    # summed in node order regardless of completion order
    for z, w, X in zip(nodes, weights, solutions):
        C0 += w * X
        C1 += (w * z) * X
    return C0, C1


def make_probe(dimension: int, seed: int) -> np.ndarray:
    probe = _gaussian(np.random.default_rng([seed, PROBE_STREAM]), dimension)
    return probe / np.linalg.norm(probe)


def indicator(op: NepLike, disk: Disk, probe: np.ndarray, workers: int = 1) -> float:
    """Norm of the spectral projection of the (normalized) probe"""
    probe = np.asarray(probe, dtype=complex)
    norm = np.linalg.norm(probe)
    if norm == 0:
        raise ValueError("probe must be nonzero")
    C0, _ = contour_moments(op, disk, probe / norm, workers)
    return float(np.linalg.norm(C0))


def beyn_extract(
    op: NepLike,
    disk: Disk,
    L1: int,
    svd_tol: float = 1e-10,
    rng_seed: int = 0,
    allow_saturated: bool = False,
    workers: int = 1,
) -> BeynResult:
    """
    Eigenvalue candidates inside the disk from the first two contour moments.

    Raises SubspaceTooSmall when every singular value of C0 is above svd_tol
    and the probe block can still grow. A block as wide as the operator
    cannot grow; it is then returned with saturated=True.
    """
    dim = op.dimension
    l1 = min(int(L1), dim)
    V = _gaussian(np.random.default_rng([rng_seed, SUBSPACE_STREAM]), (dim, l1))
    C0, C1 = contour_moments(op, disk, V, workers)

    U, s, Wh = la.svd(C0, full_matrices=False)
    rank = int(np.count_nonzero(s > svd_tol))
    saturated = rank == l1
    if saturated and l1 < dim and not allow_saturated:
        raise SubspaceTooSmall(l1, s)
    combined = la.svdvals(np.hstack([C0, C1]))
    deficient = int(np.count_nonzero(combined > svd_tol * max(1.0, abs(disk.center) + disk.radius))) > rank
    if rank == 0:
        return BeynResult([], s, 0, l1, saturated, deficient)

    V0 = U[:, :rank]
    W0 = Wh[:rank].conj().T
    D = (V0.conj().T @ C1 @ W0) / s[:rank]
    values, vectors = la.eig(D)
    candidates = []
    for value, coeffs in zip(values, vectors.T):
        vector = V0 @ coeffs
        candidates.append(Candidate(k=complex(value), vector=vector / np.linalg.norm(vector), inside=disk.contains(value)))
    candidates.sort(key=lambda c: (c.k.real, c.k.imag))
    return BeynResult(candidates, s, rank, l1, saturated, deficient)


# ============= VALIDATION =============


def _dense(matrix) -> np.ndarray:
    return matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)


def _one_norm(matrix) -> float:
    return float(spla.norm(matrix, 1) if sp.issparse(matrix) else np.linalg.norm(matrix, 1))


def null_direction(op: NepLike, k: complex, seed: int = 0) -> np.ndarray:
    """Estimate of the null vector of a (numerically) singular G(k)"""
    if op.dimension <= DENSE_NULLSPACE_LIMIT:
        _, _, Vh = la.svd(_dense(op.evaluate(k)))
        return Vh[-1].conj()
    shifted = complex(k) + 1e-8 * max(1.0, abs(k))
    handle = op.factorize(shifted)
    x = _gaussian(np.random.default_rng([seed, VALIDATION_STREAM]), op.dimension)
    for _ in range(3):
        x = handle.solve(x)
        x /= np.linalg.norm(x)
    return x


def validate(
    op: NepLike,
    k: complex,
    max_iterations: int = 200,
    tol: float = 1e-10,
    seed: int = 0,
) -> Validation:
    """
    Smallest-magnitude eigenvalue lambda0 of G(k) by inverse iteration.

    Falls back to the smallest singular value when the iteration does not
    settle (two eigenvalues of equal magnitude); raises IterationStalled if
    that fails as well.
    """
    k = complex(k)
    try:
        handle = op.factorize(k)
    except SingularAt:
        return Validation(0j, null_direction(op, k, seed), "singular")

    rng = np.random.default_rng([seed, VALIDATION_STREAM])
    start = _gaussian(rng, op.dimension)
    start /= np.linalg.norm(start)

    x = start
    for iteration in range(1, max_iterations + 1):
        y = handle.solve(x)
        mu = np.vdot(x, y)
        if mu != 0 and np.linalg.norm(y - mu * x) <= tol * abs(mu):
            return Validation(1.0 / mu, y / np.linalg.norm(y), "inverse_iteration", iteration)
        norm = np.linalg.norm(y)
        if not np.isfinite(norm) or norm == 0:
            break
        x = y / norm

    x = start
    for iteration in range(1, max_iterations + 1):
        y = handle.solve(handle.solve(x), adjoint=True)
        nu = float(np.vdot(x, y).real)
        if nu > 0 and np.linalg.norm(y - nu * x) <= tol * nu:
            return Validation(complex(1.0 / math.sqrt(nu)), x, "smallest_singular_value", iteration)
        norm = np.linalg.norm(y)
        if not np.isfinite(norm) or norm == 0:
            break
        x = y / norm
    raise IterationStalled(f"inverse iteration at k={k} did not converge in {max_iterations} steps")


def validation_metric(op: NepLike, k: complex, lambda0: complex, mode: str) -> float:
    if mode == "relative":
        return abs(lambda0) / _one_norm(op.evaluate(k))
    return abs(lambda0)


# ============= REGIONS =============


def cover_rectangle(rect: Rectangle, n_nodes: int, overlap: float = 0.15) -> list[Disk]:
    """Hexagonal lattice of equal disks covering the rectangle"""
    r = rect.disk_radius
    dx = math.sqrt(3.0) * r * (1.0 - overlap)
    dy = 1.5 * r * (1.0 - overlap)
    n_rows = max(1, math.ceil((rect.y1 - rect.y0) / dy)) + 1
    n_cols = max(1, math.ceil((rect.x1 - rect.x0) / dx)) + 1
    ys = np.linspace(rect.y0, rect.y1, n_rows)
    xs = np.linspace(rect.x0, rect.x1, n_cols)
    step = xs[1] - xs[0] if n_cols > 1 else 0.0
    disks = []
    for row, y in enumerate(ys):
        row_xs = xs if row % 2 == 0 else np.append(xs - step / 2, xs[-1] + step / 2)
        disks += [Disk(center=complex(x, y), radius=r, n_nodes=n_nodes) for x in row_xs]
    return disks


def region_offenders(op: NepLike, region: Region, cover: list[Disk]) -> list[tuple[str, complex]]:
    """Singular points in the region or on any cover contour, plus crossing branch cuts"""
    offenders: list[tuple[str, complex]] = []
    for reason, point in op.singularities():
        in_region = region.contains(point) if isinstance(region, Disk) else region.contains(point, tolerance=0.0)
        if in_region or any(d.contains(point) for d in cover):
            offenders.append((reason, point))
    kappa_n = getattr(op, "kappa_n", None)
    if callable(kappa_n):
        crossing: set[float] = set()
        for disk in cover:
            crossing.update(branch_cut_hits_disk(disk.center, disk.radius, kappa_n()))
        offenders += [("branch_cut", complex(kn)) for kn in sorted(crossing)]
    return offenders


@dataclass
class _Job:
    disk: Disk
    disk_id: str
    depth: int
    reason: str


def solve_region(op: NepLike, region: Region, config: SolverConfig | None = None, region_label: str = "") -> RegionResult:
    """
    Verified eigenvalues of G inside the region.

    Disks of the cover whose normalized indicator reaches the threshold are
    searched; candidates are accepted, refined in a smaller disk, rerouted
    to a fresh disk (found outside their disk) or discarded.
    """
    config = config or SolverConfig()
    audit = AuditLog()
    audit.record("region", label=region_label, **region.describe())

    if isinstance(region, Disk):
        cover = [region]
    else:
        cover = cover_rectangle(region, config.n_nodes, config.overlap)
    audit.record("cover", disks=len(cover))

    offenders = region_offenders(op, region, cover)
    if offenders:
        audit.record("region_error", error="RegionTouchesSingularity", offenders=offenders)
        raise RegionTouchesSingularity(offenders)

    # Step 1
    probe = make_probe(op.dimension, config.rng_seed)
    measured = [_indicator_with_nudge(op, disk, probe, config, audit) for disk in cover]
    cover = [disk for disk, _ in measured]
    values = [value for _, value in measured]
    scale = max(values) if values else 0.0
    queue: deque[_Job] = deque()
    for index, (disk, value) in enumerate(zip(cover, values)):
        normalized = value / scale if scale > 0 else 0.0
        disk_id = f"{region_label or 'r'}-d{index}"
        audit.record("indicator", disk_id=disk_id, center=disk.center, radius=disk.radius, value=value, normalized=normalized)
        if isinstance(region, Disk) or normalized >= config.indicator_threshold:
            audit.record("disk_kept", disk_id=disk_id)
            queue.append(_Job(disk, disk_id, 0, "cover"))
        else:
            audit.record("discarded", disk_id=disk_id, reason="indicator_below_threshold")
    logger.info(f"📊 Indicators: {len(queue)}/{len(cover)} disks kept")

    accepted: list[EigenResult] = []
    dedup_radius = config.dedup_factor * (region.radius if isinstance(region, Disk) else region.disk_radius)

    def accept(result: EigenResult) -> None:
        for i, other in enumerate(accepted):
            if abs(other.k - result.k) < max(dedup_radius, 1e-14 * abs(result.k)):
                keep = other if other.residual <= result.residual else result
                audit.record("duplicate", k=result.k, kept=keep.k, disk_id=result.disk_id)
                accepted[i] = keep
                return
        accepted.append(result)
        audit.record("accepted", k=result.k, residual=result.residual, disk_id=result.disk_id)
        logger.info(f"✅ Accepted k={result.k.real:.10f}{result.k.imag:+.10f}i (metric {result.residual:.2e})")

    spawned = 0

    def spawn(disk: Disk, parent: _Job, tag: str, reason: str) -> _Job:
        nonlocal spawned
        spawned += 1
        job = _Job(disk, f"{parent.disk_id}.{tag}{spawned}", parent.depth + 1, reason)
        queue.append(job)
        return job

    # Steps 2 and 3
    while queue:
        job = queue.popleft()
        beyn = _extract_with_growth(op, job, config, audit)
        if beyn is None:
            continue
        audit.record(
            "beyn", disk_id=job.disk_id, l1=beyn.l1, rank=beyn.rank, saturated=beyn.saturated,
            deficient=beyn.deficient, singular_values=beyn.singular_values,
        )

        progressed = False
        can_recurse = job.depth < config.max_recursion_depth
        for cand in beyn.candidates:
            audit.record("candidate", disk_id=job.disk_id, k=cand.k, inside=cand.inside)
            if not region.contains(cand.k):
                audit.record("discarded", disk_id=job.disk_id, k=cand.k, reason="outside_region")
                continue
            try:
                check = validate(op, cand.k, config.max_inverse_iterations, config.inverse_tol, config.rng_seed)
                metric = validation_metric(op, cand.k, check.lambda0, config.metric_mode)
            except (IterationStalled, NotHolomorphicAt) as exc:
                audit.record("discarded", disk_id=job.disk_id, k=cand.k, reason=type(exc).__name__)
                continue
            audit.record("validated", disk_id=job.disk_id, k=cand.k, metric=metric, method=check.method)

            if metric > config.reject_tol:
                audit.record("discarded", disk_id=job.disk_id, k=cand.k, metric=metric, reason="above_reject_tol")
            elif not cand.inside:
                # found outside its disk: search again around it, never accept directly
                if can_recurse:
                    fresh = spawn(Disk(center=cand.k, radius=job.disk.radius / 2, n_nodes=job.disk.n_nodes), job, "x", "rerouted")
                    audit.record("rerouted", disk_id=job.disk_id, k=cand.k, to=fresh.disk_id)
                    progressed = True
                else:
                    audit.record("discarded", disk_id=job.disk_id, k=cand.k, metric=metric, reason="outside_disk")
            elif metric < config.accept_tol:
                accept(
                    EigenResult(
                        k=cand.k, residual=metric, eigenvector=check.eigenvector, disk=job.disk,
                        disk_id=job.disk_id, lambda0=check.lambda0, depth=job.depth,
                        provenance={"disk": job.disk.describe(), "reason": job.reason, "method": check.method},
                    )
                )
                progressed = True
            elif can_recurse:
                smaller = Disk(center=cand.k, radius=job.disk.radius * config.refine_radius_factor, n_nodes=job.disk.n_nodes)
                child = spawn(smaller, job, "r", "refine")
                audit.record("refine", disk_id=job.disk_id, k=cand.k, metric=metric, to=child.disk_id)
                progressed = True
            else:
                audit.record("discarded", disk_id=job.disk_id, k=cand.k, metric=metric, reason="refine_limit")

        if can_recurse and (beyn.deficient or (beyn.saturated and not progressed)):
            for child in job.disk.children():
                spawn(child, job, "s", "split")
            audit.record("disk_split", disk_id=job.disk_id, children=7)

        if config.verify_quadrature and any(r.disk_id == job.disk_id for r in accepted):
            _verify_quadrature(op, job, beyn, config, audit)

    accepted.sort(key=lambda r: (r.k.real, r.k.imag))
    logger.info(f"✅ Region {region_label or ''} done: {len(accepted)} eigenvalues")
    return RegionResult(eigenvalues=accepted, audit=audit, region=region)


def _extract_with_growth(op: NepLike, job: _Job, config: SolverConfig, audit: AuditLog) -> BeynResult | None:
    """Beyn with L1 doubled on saturation up to min(dimension, L1_max)"""
    cap = min(op.dimension, config.L1_max)
    l1 = min(config.L1, cap)
    while True:
        try:
            return beyn_extract(op, job.disk, l1, config.svd_tol, config.rng_seed, allow_saturated=l1 >= cap, workers=config.workers)
        except SubspaceTooSmall:
            grown = min(2 * l1, cap)
            audit.record("subspace_enlarged", disk_id=job.disk_id, l1=l1, to=grown)
            l1 = grown
        except NumericalError as exc:
            audit.record("discarded", disk_id=job.disk_id, reason=type(exc).__name__, detail=str(exc))
            logger.warning(f"⚠️ Disk {job.disk_id} skipped: {exc}")
            return None


def _verify_quadrature(op: NepLike, job: _Job, beyn: BeynResult, config: SolverConfig, audit: AuditLog) -> None:
    doubled = Disk(center=job.disk.center, radius=job.disk.radius, n_nodes=2 * job.disk.n_nodes)
    try:
        check = beyn_extract(op, doubled, beyn.l1, config.svd_tol, config.rng_seed, allow_saturated=True, workers=config.workers)
    except NumericalError as exc:
        audit.record("beyn", disk_id=job.disk_id, verification=True, error=str(exc))
        return
    shifts = [
        min((abs(c.k - d.k) for d in check.candidates), default=float("inf"))
        for c in beyn.candidates
        if c.inside
    ]
    audit.record("beyn", disk_id=job.disk_id, verification=True, n_nodes=doubled.n_nodes, max_shift=max(shifts, default=0.0))


def _indicator_with_nudge(
    op: NepLike, disk: Disk, probe: np.ndarray, config: SolverConfig, audit: AuditLog
) -> tuple[Disk, float]:
    """Indicator of the disk; a contour through an eigenvalue is widened by 1%"""
    for _ in range(3):
        try:
            return disk, indicator(op, disk, probe, config.workers)
        except SingularAt as exc:
            audit.record("cover", nudged=disk.describe(), at=exc.k)
            disk = Disk(center=disk.center, radius=disk.radius * 1.01, n_nodes=disk.n_nodes)
    return disk, indicator(op, disk, probe, config.workers)
