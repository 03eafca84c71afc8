# src/models/errors.py
"""
Exception hierarchy for the resonance solver.

Configuration problems map to exit code 1, numerical failures to exit code 2.
"""

from typing import Any


class ResonanceError(Exception):
    """Base class for every error raised by the package"""

    exit_code = 2


# ============= CONFIGURATION / INPUT =============

class ConfigError(ResonanceError):
    """Invalid or incomplete run configuration"""

    exit_code = 1

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class GeometryDegenerate(ResonanceError):
    """Geometry cannot be meshed (slit too narrow, non-positive sizes, ...)"""

    exit_code = 1


class ParseError(ResonanceError):
    """Malformed mesh or field file"""

    exit_code = 1

    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


class InvalidTopology(ResonanceError):
    """Mesh violates the conforming/pairing invariants"""

    exit_code = 1


class DegenerateTriangle(ResonanceError):
    """Triangle with (near) zero area met during assembly"""


# ============= NUMERICS =============

class NumericalError(ResonanceError):
    """Failure inside a numerical kernel"""


class EvaluationAtSingularity(NumericalError):
    """Permittivity evaluated within the exclusion radius of a pole"""

    def __init__(self, k: complex, pole: complex):
        self.k = k
        self.pole = pole
        super().__init__(f"permittivity pole at {pole} too close to k={k}")


class BranchCutHit(NumericalError):
    """k^2 - kappa_n^2 lies on the excluded ray of the square root"""

    def __init__(self, k: complex, kappa_n: float):
        self.k = k
        self.kappa_n = kappa_n
        super().__init__(f"k={k} hits the branch cut of zeta for kappa_n={kappa_n}")


class NotHolomorphicAt(NumericalError):
    """Operator is not holomorphic at the requested point"""

    REASONS = ("material_pole", "material_zero", "rayleigh_anomaly")

    def __init__(self, k: complex, reason: str, near: complex | None = None):
        self.k = k
        self.reason = reason
        self.near = near
        super().__init__(f"G(k) not holomorphic at k={k} ({reason}, near {near})")


class SingularAt(NumericalError):
    """Factorization of G(k) hit a (numerically) zero pivot"""

    def __init__(self, k: complex, pivot: float | None = None):
        self.k = k
        self.pivot = pivot
        super().__init__(f"G(k) numerically singular at k={k} (pivot={pivot})")


class SubspaceTooSmall(NumericalError):
    """Every singular value of C0 is above tolerance: L1 must grow"""

    def __init__(self, l1: int, singular_values: Any):
        self.l1 = l1
        self.singular_values = singular_values
        super().__init__(f"probe subspace of width {l1} saturated")


class IterationStalled(NumericalError):
    """Inverse iteration did not converge"""


class SeriesDiverged(NumericalError):
    """Lattice series failed to reach the requested tolerance"""


class RegionTouchesSingularity(NumericalError):
    """Search region contains or touches a point where G is not holomorphic"""

    def __init__(self, offenders: list[tuple[str, complex]]):
        self.offenders = offenders
        listed = ", ".join(f"{reason}@{point}" for reason, point in offenders)
        super().__init__(f"region touches singularities: {listed}")
