# src/cli/commands.py
"""
Command-line front end.

    run.py solve    --preset pec-delta005 [--set mesh.refinement=2]
    run.py sweep    --config my.ini --jobs 4
    run.py converge --preset pec-delta005 --levels 4
    run.py oracle pec-asymptotic --delta 0.05 --d 0.4 --kappa pi/d
    run.py mesh gen|refine|info ...

Exit codes: 0 ok, 1 config error, 2 numerical failure, 3 partial.
"""

import argparse
import logging
from pathlib import Path

from config.settings import Config
from src.models.errors import ConfigError, ResonanceError
from src.models.run_config import RunConfig, evaluate_expression, load_run_config
from src.services.pipeline import EXIT_OK

logger = logging.getLogger(__name__)


# ============= CONFIG HELPERS =============


def _add_config_options(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--preset", help="Bundled run config name (see config/presets)")
    source.add_argument("--config", type=Path, help="Path to an INI run config")
    parser.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE", help="Override a config value (repeatable)")
    parser.add_argument("--output-dir", type=Path, help="Directory for result files")
    parser.add_argument("--dump-effective-config", action="store_true", help="Print the resolved config and exit")


def load_config(args: argparse.Namespace, extra: list[str] | None = None) -> RunConfig:
    settings = Config()
    overrides = list(args.set) + list(extra or [])
    if args.preset:
        path = settings.preset_path(args.preset)
        if not path.is_file():
            available = ", ".join(settings.available_presets()) or "none"
            raise ConfigError(f"unknown preset {args.preset!r} (available: {available})", key="preset")
        return load_run_config(path=path, overrides=overrides)
    if args.config:
        return load_run_config(path=args.config, overrides=overrides)
    raise ConfigError("give --preset or --config")


def parse_complex(text: str) -> complex:
    try:
        re_part, im_part = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {text!r}") from None
    return complex(re_part, im_part)


# ============= HANDLERS =============


def cmd_solve(args: argparse.Namespace) -> int:
    from src.services.pipeline import run_solve

    extra = [f"solver.workers={args.jobs}"] if args.jobs else []
    config = load_config(args, extra)
    if args.dump_effective_config:
        print(config.to_ini())
        return EXIT_OK
    report = run_solve(
        config,
        output_dir=args.output_dir,
        export_fields=True if args.export_fields else None,
        dump_matrix_at=args.dump_matrix_at,
    )
    for row in report.rows:
        print(f"kappa={row['kappa']:.6g}  k={row['re']:.10f}{row['im']:+.10f}i  residual={row['residual']:.2e}  disk={row['disk_id']}")
    for error in report.errors:
        print(f"❌ kappa={error['kappa']:.6g} region={error['region']}: {error['error']}: {error['detail']}")
    return report.exit_code


def cmd_sweep(args: argparse.Namespace) -> int:
    from src.services.band_structure import run_band_sweep

    extra = [f"bloch.kappa_count={args.kappa_count}"] if args.kappa_count else []
    config = load_config(args, extra)
    if args.dump_effective_config:
        print(config.to_ini())
        return EXIT_OK
    report = run_band_sweep(
        config,
        output_dir=args.output_dir,
        jobs=args.jobs,
        export_fields=True if args.export_fields else None,
    )
    for row in report.rows:
        print(f"kappa={row['kappa']:.6g}  branch={row['branch']}  k={row['re']:.8f}{row['im']:+.8f}i  {row['classification']}")
    return report.exit_code


def cmd_converge(args: argparse.Namespace) -> int:
    from src.services.convergence import run_convergence

    extra = [f"converge.levels={args.levels}"] if args.levels else []
    config = load_config(args, extra)
    if args.dump_effective_config:
        print(config.to_ini())
        return EXIT_OK
    report = run_convergence(config, output_dir=args.output_dir)
    print(f"{'level':>5} {'dofs':>8} {'Re k':>14} {'Im k':>14} {'order':>8}")
    for row in report.rows:
        re_k = "-" if row["re"] is None else f"{row['re']:.8f}"
        im_k = "-" if row["im"] is None else f"{row['im']:.8f}"
        order = "" if row["order"] is None else f"{row['order']:.4f}"
        print(f"{row['level']:>5} {row['dofs'] or '-':>8} {re_k:>14} {im_k:>14} {order:>8}")
    return report.exit_code


def cmd_oracle(args: argparse.Namespace) -> int:
    from src.services.pec_oracle import asymptotic_eigenvalues

    try:
        kappa = evaluate_expression(args.kappa, {"d": args.d})
    except ValueError as exc:
        raise ConfigError(str(exc), key="kappa") from exc
    m_max = args.m_max or args.m
    values = asymptotic_eigenvalues(m_max, kappa, args.delta, args.d, args.series_tol)
    first = 1 if args.m_max else args.m
    for m, k in enumerate(values, start=1):
        if m >= first:
            print(f"k_{m} = {k.real:.10f}{k.imag:+.10f}i")
    return EXIT_OK


def cmd_mesh_gen(args: argparse.Namespace) -> int:
    from src.services.mesh_io import export_mesh
    from src.services.pipeline import build_mesh

    config = load_config(args)
    if args.dump_effective_config:
        print(config.to_ini())
        return EXIT_OK
    mesh = build_mesh(config)
    export_mesh(mesh, args.output)
    _print_mesh_info(mesh)
    return EXIT_OK


def cmd_mesh_refine(args: argparse.Namespace) -> int:
    from src.services.mesh_generator import refine_to_level
    from src.services.mesh_io import export_mesh, import_mesh

    mesh = refine_to_level(import_mesh(args.input), args.levels)
    export_mesh(mesh, args.output)
    _print_mesh_info(mesh)
    return EXIT_OK


def cmd_mesh_info(args: argparse.Namespace) -> int:
    from src.services.mesh_io import import_mesh

    _print_mesh_info(import_mesh(args.input))
    return EXIT_OK


def _print_mesh_info(mesh) -> None:
    from src.models.mesh import METAL, VACUUM

    print(f"level      {mesh.level}")
    print(f"nodes      {mesh.n_nodes}")
    print(f"triangles  {mesh.n_triangles}")
    print(f"edges      {mesh.n_edges}")
    print(f"h          {mesh.h:.6g}")
    print(f"area       vacuum={mesh.region_area(VACUUM):.6g} metal={mesh.region_area(METAL):.6g}")
    print(f"pairs      {len(mesh.pairs)}")
    for name, members in mesh.boundary.items():
        print(f"boundary   {name}: {len(members)} nodes")


# ============= PARSER =============


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="run.py", description="Resonances of periodic metallic gratings")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ... (default from RESONANCE_LOG_LEVEL)")
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="Eigenvalues in the configured regions")
    _add_config_options(solve)
    solve.add_argument("--jobs", type=int, help="Worker threads for the contour quadrature")
    solve.add_argument("--export-fields", action="store_true", help="Write eigenfunction field files")
    solve.add_argument("--dump-matrix-at", type=parse_complex, metavar="RE,IM", help="Dump G(k) in coordinate form")
    solve.set_defaults(handler=cmd_solve)

    sweep = commands.add_parser("sweep", help="Band structure over the Brillouin zone")
    _add_config_options(sweep)
    sweep.add_argument("--jobs", type=int, help="Concurrent kappa samples (default RESONANCE_JOBS)")
    sweep.add_argument("--kappa-count", type=int, help="Number of kappa samples in [0, pi/d]")
    sweep.add_argument("--export-fields", action="store_true")
    sweep.set_defaults(handler=cmd_sweep)

    converge = commands.add_parser("converge", help="Refinement ladder with observed orders")
    _add_config_options(converge)
    converge.add_argument("--levels", type=int, help="Number of mesh levels (>= 4)")
    converge.set_defaults(handler=cmd_converge)

    oracle = commands.add_parser("oracle", help="Closed-form reference values")
    oracles = oracle.add_subparsers(dest="oracle", required=True)
    pec = oracles.add_parser("pec-asymptotic", help="Small-slit asymptotics, PEC rectangular slits, slab thickness 1")
    pec.add_argument("--m", type=int, default=1)
    pec.add_argument("--m-max", type=int, help="List k_1 .. k_M")
    pec.add_argument("--kappa", default="pi/d", help="Bloch wavenumber (expression over pi and d)")
    pec.add_argument("--delta", type=float, required=True)
    pec.add_argument("--d", type=float, default=0.4)
    pec.add_argument("--series-tol", type=float, default=1e-12)
    pec.set_defaults(handler=cmd_oracle)

    mesh = commands.add_parser("mesh", help="Mesh generation and inspection")
    meshes = mesh.add_subparsers(dest="mesh_command", required=True)
    gen = meshes.add_parser("gen", help="Generate (and refine) the configured mesh")
    _add_config_options(gen)
    gen.add_argument("--output", type=Path, required=True)
    gen.set_defaults(handler=cmd_mesh_gen)
    refine = meshes.add_parser("refine", help="Uniformly refine a mesh file")
    refine.add_argument("--input", type=Path, required=True)
    refine.add_argument("--levels", type=int, default=1)
    refine.add_argument("--output", type=Path, required=True)
    refine.set_defaults(handler=cmd_mesh_refine)
    info = meshes.add_parser("info", help="Summarize a mesh file")
    info.add_argument("--input", type=Path, required=True)
    info.set_defaults(handler=cmd_mesh_info)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = (args.log_level or Config().LOG_LEVEL).upper()
    logging.getLogger().setLevel(getattr(logging, level, logging.INFO))
    try:
        return args.handler(args)
    except ResonanceError as exc:
        logger.error(f"❌ {type(exc).__name__}: {exc}")
        return exc.exit_code
