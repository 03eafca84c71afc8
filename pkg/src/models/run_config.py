# src/models/run_config.py
"""
Run configuration: sectioned INI text parsed into validated pydantic models.

Numeric values may be small arithmetic expressions over `pi` and `d`
(the period), e.g. `kappa = pi/(4*d)`; they are evaluated by a restricted
AST walker. Regions are written `disk:re,im,r[,n]; rect:x0,x1,y0,y1,radius`.
"""

import ast
import configparser
import hashlib
import math
import operator
import types
import typing
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.models.errors import ConfigError
from src.models.geometry import GratingGeometry, SlitShape
from src.models.materials import PermittivityModel, Scaling

SECTIONS = ("geometry", "material", "mesh", "dtn", "bloch", "solver", "output", "classify", "converge")

# ============= EXPRESSIONS =============

_BINARY = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_FUNCTIONS = {"sqrt": math.sqrt}


def evaluate_expression(text: str, names: dict[str, float] | None = None) -> float:
    """Evaluate +,-,*,/,** over numbers, sqrt() and the given names"""
    names = {"pi": math.pi, **(names or {})}

    def walk(node: ast.AST) -> float:
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int | float) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id not in names:
                raise ValueError(f"unknown name {node.id!r}")
            return float(names[node.id])
        if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
            return _BINARY[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](walk(node.operand))
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCTIONS
            and len(node.args) == 1
            and not node.keywords
        ):
            return _FUNCTIONS[node.func.id](walk(node.args[0]))
        raise ValueError(f"unsupported expression element {type(node).__name__}")

    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {text!r}") from exc
    try:
        return walk(tree)
    except ZeroDivisionError as exc:
        raise ValueError(f"division by zero in {text!r}") from exc


def _is_numeric(annotation: Any) -> type | None:
    """float or int when the annotation is (optionally) one of them"""
    if annotation in (float, int):
        return annotation
    if typing.get_origin(annotation) in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(annotation) if a is not type(None)]
        if len(args) == 1 and args[0] in (float, int):
            return args[0]
    return None


class _Section(BaseModel):
    """Base for INI sections: unknown keys rejected, expressions evaluated"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    @field_validator("*", mode="before")
    @classmethod
    def _evaluate(cls, value: Any, info):
        if not isinstance(value, str):
            return value
        text = value.strip()
        kind = _is_numeric(cls.model_fields[info.field_name].annotation)
        if kind is None:
            return None if text.lower() == "none" else text
        if text.lower() in ("", "none"):
            return None
        names = (info.context or {}).get("names", {})
        number = evaluate_expression(text, names)
        if kind is int:
            if number != int(number):
                raise ValueError(f"expected an integer, got {number}")
            return int(number)
        return number


# ============= SECTIONS =============


class GeometrySection(_Section):
    d: float = Field(..., gt=0.0)
    ell: float = Field(..., ge=0.0)
    H: float | None = None
    slit: Literal["rectangle", "trapezoid"] | None = "rectangle"
    slit_width: float | None = Field(default=None, gt=0.0)
    top_width: float | None = Field(default=None, gt=0.0)
    base_width: float | None = Field(default=None, gt=0.0)
    metal_kind: Literal["pec", "dispersive"] = "dispersive"


class MaterialSection(_Section):
    model: Literal["vacuum", "pec", "drude_lossless", "drude_sommerfeld"] = "drude_sommerfeld"
    omega_p: float | None = Field(default=None, gt=0.0, description="Plasma frequency (1/s)")
    gamma: float = Field(default=0.0, ge=0.0, description="Damping (1/s)")
    omega_p_hat: float | None = Field(default=None, gt=0.0)
    gamma_hat: float | None = Field(default=None, ge=0.0)
    alpha: float = Field(default=1.0, gt=0.0)
    c: float = Field(default=3.0e8, gt=0.0)
    exclusion_radius: float = Field(default=1e-6, gt=0.0)


class MeshSection(_Section):
    file: str | None = None
    target_h: float | None = Field(default=None, gt=0.0)
    grading: float = Field(default=1.0, ge=1.0)
    refinement: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _one_source(self):
        if (self.file is None) == (self.target_h is None):
            raise ValueError("give exactly one of mesh.file and mesh.target_h")
        return self


class DtnSection(_Section):
    D_t: int = Field(default=50, ge=0)
    mode: Literal["dense", "lowrank"] = "dense"
    margin: float = Field(default=1e-6, gt=0.0)


class BlochSection(_Section):
    kappa: float = 0.0
    kappa_count: int | None = Field(default=None, ge=2)
    kappa_max: float | None = None


class SolverSection(_Section):
    indicator_threshold: float = 0.2
    svd_tol: float = 1e-10
    L1: int = 24
    L1_max: int = 192
    accept_tol: float = 1e-12
    reject_tol: float = 1e-5
    refine_radius_factor: float = 0.1
    rng_seed: int = 0
    max_recursion_depth: int = 3
    n_nodes: int = 64
    metric_mode: Literal["absolute", "relative"] = "absolute"
    overlap: float = 0.15
    dedup_factor: float = 1e-8
    max_inverse_iterations: int = 200
    inverse_tol: float = 1e-10
    verify_quadrature: bool = False
    workers: int = 1
    regions: str = ""


class OutputSection(_Section):
    directory: str | None = None
    name: str = "resonances"
    formats: str = "csv"
    export_fields: bool = False

    @field_validator("formats")
    @classmethod
    def _known_formats(cls, value: str) -> str:
        unknown = set(cls.format_list(value)) - {"csv", "xlsx"}
        if unknown:
            raise ValueError(f"unknown formats {sorted(unknown)}")
        return value

    @staticmethod
    def format_list(value: str) -> list[str]:
        return [f.strip().lower() for f in value.split(",") if f.strip()]


class ClassifySection(_Section):
    shell: float = Field(default=0.05, gt=0.0, description="Surface shell width as a fraction of d")
    majority: float = Field(default=0.5, gt=0.0, lt=1.0)


class ConvergeSection(_Section):
    levels: int = Field(default=4, ge=1)


_SECTION_MODELS: dict[str, type[_Section]] = {
    "geometry": GeometrySection,
    "material": MaterialSection,
    "mesh": MeshSection,
    "dtn": DtnSection,
    "bloch": BlochSection,
    "solver": SolverSection,
    "output": OutputSection,
    "classify": ClassifySection,
    "converge": ConvergeSection,
}


# ============= REGIONS =============


def parse_regions(text: str, names: dict[str, float], default_nodes: int = 64) -> list:
    """`disk:re,im,r[,n]; rect:x0,x1,y0,y1,radius` -> Disk / Rectangle list"""
    from src.services.nep_solver import Disk, Rectangle

    regions = []
    for chunk in (c.strip() for c in text.split(";")):
        if not chunk:
            continue
        kind, _, args = chunk.partition(":")
        values = [evaluate_expression(a, names) for a in args.split(",") if a.strip()]
        kind = kind.strip().lower()
        if kind == "disk" and len(values) in (3, 4):
            n_nodes = int(values[3]) if len(values) == 4 else default_nodes
            regions.append(Disk(center=complex(values[0], values[1]), radius=values[2], n_nodes=n_nodes))
        elif kind == "rect" and len(values) == 5:
            regions.append(Rectangle(x0=values[0], x1=values[1], y0=values[2], y1=values[3], disk_radius=values[4]))
        else:
            raise ValueError(f"bad region {chunk!r}")
    return regions


# ============= RUN CONFIG =============


class RunConfig(BaseModel):
    """Validated run configuration (all sections)"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    geometry_section: GeometrySection
    material: MaterialSection = MaterialSection()
    mesh: MeshSection
    dtn: DtnSection = DtnSection()
    bloch: BlochSection = BlochSection()
    solver: SolverSection = SolverSection()
    output: OutputSection = OutputSection()
    classify: ClassifySection = ClassifySection()
    converge: ConvergeSection = ConvergeSection()

    @model_validator(mode="after")
    def _consistent(self):
        pec_model = self.material.model == "pec"
        if pec_model != (self.geometry_section.metal_kind == "pec"):
            raise ValueError("material.model = pec requires geometry.metal_kind = pec (and vice versa)")
        return self

    # --- construction ---

    @classmethod
    def from_sections(cls, sections: dict[str, dict[str, str]]) -> "RunConfig":
        unknown = set(sections) - set(SECTIONS)
        if unknown:
            raise ConfigError(f"unknown section(s) {sorted(unknown)}", key=sorted(unknown)[0])
        if "geometry" not in sections or "d" not in sections["geometry"]:
            raise ConfigError("missing value", key="geometry.d")
        if "mesh" not in sections:
            raise ConfigError("missing section", key="mesh")

        try:
            d = evaluate_expression(sections["geometry"]["d"])
        except ValueError as exc:
            raise ConfigError(str(exc), key="geometry.d") from exc
        context = {"names": {"d": d}}

        parsed: dict[str, _Section] = {}
        for name, model in _SECTION_MODELS.items():
            raw = sections.get(name, {})
            try:
                parsed[name] = model.model_validate(raw, context=context)
            except ValidationError as exc:
                raise _config_error(name, exc) from None
            except ValueError as exc:
                raise ConfigError(str(exc), key=name) from exc

        try:
            config = cls(geometry_section=parsed.pop("geometry"), **parsed)
        except ValidationError as exc:
            raise ConfigError(exc.errors()[0]["msg"], key="material.model") from None
        # fail early on regions and derived models
        config.regions()
        config.geometry()
        config.permittivity()
        config.solver_config()
        return config

    # --- derived models ---

    @property
    def names(self) -> dict[str, float]:
        return {"d": self.geometry_section.d}

    def geometry(self) -> GratingGeometry:
        g = self.geometry_section
        slit = None
        try:
            if g.slit == "rectangle":
                if g.slit_width is None:
                    raise ConfigError("rectangular slit needs slit_width", key="geometry.slit_width")
                slit = SlitShape.rectangle(g.slit_width)
            elif g.slit == "trapezoid":
                if g.top_width is None or g.base_width is None:
                    raise ConfigError("trapezoid slit needs top_width and base_width", key="geometry.top_width")
                slit = SlitShape.trapezoid(g.top_width, g.base_width)
            H = g.H if g.H is not None else GratingGeometry.default_height(g.d, g.ell)
            return GratingGeometry(d=g.d, ell=g.ell, H=H, slit=slit, metal_kind=g.metal_kind)
        except ValidationError as exc:
            raise ConfigError(exc.errors()[0]["msg"], key="geometry") from None

    def scaling(self) -> Scaling:
        return Scaling(alpha=self.material.alpha, c=self.material.c)

    def permittivity(self) -> PermittivityModel:
        from src.services.materials import scale_drude

        m = self.material
        if m.model in ("vacuum", "pec"):
            return PermittivityModel(kind=m.model, exclusion_radius=m.exclusion_radius)
        if m.omega_p_hat is not None:
            omega_p_hat, gamma_hat = m.omega_p_hat, m.gamma_hat or 0.0
        elif m.omega_p is not None:
            omega_p_hat, gamma_hat = scale_drude(m.omega_p, m.gamma, self.scaling())
            if m.gamma_hat is not None:
                gamma_hat = m.gamma_hat
        else:
            raise ConfigError("Drude models need omega_p or omega_p_hat", key="material.omega_p")
        try:
            return PermittivityModel(
                kind=m.model,
                omega_p_hat=omega_p_hat,
                gamma_hat=gamma_hat if m.model == "drude_sommerfeld" else 0.0,
                exclusion_radius=m.exclusion_radius,
            )
        except ValidationError as exc:
            raise ConfigError(exc.errors()[0]["msg"], key="material") from None

    def solver_config(self):
        from src.services.nep_solver import SolverConfig

        fields = self.solver.model_dump(exclude={"regions"})
        try:
            return SolverConfig(**fields)
        except ValidationError as exc:
            raise _config_error("solver", exc) from None

    def regions(self) -> list:
        try:
            return parse_regions(self.solver.regions, self.names, self.solver.n_nodes)
        except (ValueError, ValidationError) as exc:
            raise ConfigError(str(exc), key="solver.regions") from None

    def kappas(self) -> list[float]:
        """The single kappa, or kappa_count samples over [0, kappa_max]"""
        b = self.bloch
        if b.kappa_count is None:
            return [b.kappa]
        upper = b.kappa_max if b.kappa_max is not None else math.pi / self.geometry_section.d
        step = upper / (b.kappa_count - 1)
        return [i * step for i in range(b.kappa_count)]

    def formats(self) -> list[str]:
        return OutputSection.format_list(self.output.formats)

    # --- serialization ---

    def sections(self) -> dict[str, dict[str, Any]]:
        return {
            name: (self.geometry_section if name == "geometry" else getattr(self, name)).model_dump()
            for name in SECTIONS
        }

    def to_ini(self) -> str:
        """Effective configuration with every default filled in"""
        lines = []
        for name, values in self.sections().items():
            lines.append(f"[{name}]")
            for key, value in values.items():
                lines.append(f"{key} = {_ini_value(value)}")
            lines.append("")
        return "\n".join(lines)

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_ini().encode("utf-8")).hexdigest()[:12]

    def with_overrides(self, **sections: dict[str, Any]) -> "RunConfig":
        """Copy with some keys replaced (values as INI text or plain numbers)"""
        raw = {name: {k: _ini_value(v) for k, v in values.items()} for name, values in self.sections().items()}
        for name, values in sections.items():
            raw.setdefault(name, {}).update({k: _ini_value(v) for k, v in values.items()})
        return RunConfig.from_sections(raw)


def _ini_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _config_error(section: str, exc: ValidationError) -> ConfigError:
    first = exc.errors()[0]
    field = ".".join(str(p) for p in first.get("loc", ()) if p != "__root__")
    return ConfigError(first["msg"], key=f"{section}.{field}" if field else section)


# ============= LOADING =============


def read_ini(text: str) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return {section: dict(parser.items(section)) for section in parser.sections()}


def apply_overrides(sections: dict[str, dict[str, str]], overrides: list[str]) -> dict[str, dict[str, str]]:
    """Apply `section.key=value` strings"""
    result = {name: dict(values) for name, values in sections.items()}
    for item in overrides:
        target, sep, value = item.partition("=")
        section, dot, key = target.strip().partition(".")
        if not sep or not dot or not key:
            raise ConfigError(f"override {item!r} is not section.key=value")
        result.setdefault(section, {})[key.strip()] = value.strip()
    return result


def load_run_config(path: str | Path | None = None, text: str | None = None, overrides: list[str] | None = None) -> RunConfig:
    """Parse a run config from a file path or INI text, then apply overrides"""
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file {path} not found")
        text = path.read_text(encoding="utf-8")
    if text is None:
        raise ConfigError("no configuration given (use --preset or --config)")
    return RunConfig.from_sections(apply_overrides(read_ini(text), overrides or []))
