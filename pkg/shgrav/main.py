"""
Command-line surface: python -m shgrav.main <subcommand> [options]

Subcommands: info, coeffs, com, eval, compare-mascon, propagate, verify.
Failures print one line, `error category=<c> code=<exit> message=<text>`, to
stderr and exit with the code of the failure class (2 usage, 3 input or output, 4 mesh,
5 density, 6 numeric domain, 7 model, 8 propagation, 9 verification).
"""

import argparse
import json
import logging
import os
import sys
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import __version__
from .artifacts import write_csv, write_json
from .constants import G_DEFAULT, MGAL, SHMODEL_FORMAT_VERSION
from .density import load_density
from .errors import GravityPipelineError, InputError, OutputError, UsageError, VerificationError
from .field import SHField, ellipsoid_grid
from .mascon import build_mascons, compare_sh_mascon
from .mesh import brillouin_radius, load_obj, mesh_info
from .oracle import SamplingMode, mc_coefficients, verify_report
from .propagate import (
    MasconGravity,
    TRAJECTORY_HEADER,
    RotationModel,
    SHGravity,
    StateVector,
    compare_trajectories,
    propagate_many,
    trajectory_columns,
)
from .shcoeff import SlabScheme, center_of_mass, compute_coefficients, load_model, save_model

logger = logging.getLogger("CLI")

# Environment configuration
SHGRAV_THREADS = int(os.getenv("SHGRAV_THREADS", "1"))
SHGRAV_LOG_LEVEL = os.getenv("SHGRAV_LOG_LEVEL", "INFO").upper()

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class RunConfig(BaseModel):
    """Validated options of one CLI invocation."""
    model_config = ConfigDict(frozen=True)

    command: str
    mesh: Optional[str] = None
    density: Optional[str] = None
    model: Optional[str] = None
    nmax: int = Field(default=4, ge=0)
    n_q: int = Field(default=10, ge=1)
    r0: Optional[float] = Field(default=None, gt=0)
    G: float = Field(default=G_DEFAULT, gt=0)
    output: Optional[str] = None
    seed: int = 0
    threads: int = Field(default=1, ge=1)
    deterministic: bool = False
    slabs: SlabScheme = SlabScheme.Z
    fix_winding: bool = False

    def check_paths(self) -> None:
        for name in ("mesh", "model"):
            path = getattr(self, name)
            if path is not None and not os.path.isfile(path):
                raise InputError(f"--{name} file not found: {path}")
        if self.output is not None:
            _check_output_dir(self.output, "--output")


def _check_output_dir(path: str, flag: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(directory):
        raise OutputError(f"{flag} directory does not exist: {directory}")


def build_config(args: argparse.Namespace) -> RunConfig:
    fields = {k: getattr(args, k) for k in RunConfig.model_fields if getattr(args, k, None) is not None}
    try:
        cfg = RunConfig(**fields)
    except ValidationError as e:
        err = e.errors()[0]
        raise UsageError(f"--{'.'.join(str(p) for p in err['loc'])}: {err['msg']}")
    cfg.check_paths()
    return cfg


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_resolution(text: str) -> float:
    value = text.strip().lower()
    if value.endswith("deg"):
        value = value[:-3]
    try:
        res = float(value)
    except ValueError:
        raise UsageError(f"--res must look like '2deg' or '2', got {text!r}")
    if not res > 0:
        raise UsageError(f"--res must be positive, got {text!r}")
    return res


def _require(cfg: RunConfig, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(cfg, n) is None]
    if missing:
        raise UsageError(f"{cfg.command} requires {', '.join(missing)}")


def _emit(payload: dict, output: Optional[str]) -> None:
    if output:
        write_json(output, payload)
    else:
        print(json.dumps(payload, indent=1))


# --- subcommands ---

def cmd_info(cfg: RunConfig, args) -> None:
    _require(cfg, "mesh")
    mesh = load_obj(cfg.mesh, fix_winding=cfg.fix_winding)
    _emit(mesh_info(mesh), cfg.output)


def _compute(cfg: RunConfig):
    _require(cfg, "mesh", "density")
    mesh = load_obj(cfg.mesh, fix_winding=cfg.fix_winding)
    density = load_density(cfg.density)
    model = compute_coefficients(
        mesh, density, cfg.nmax, cfg.n_q, R0=cfg.r0, G=cfg.G,
        scheme=cfg.slabs, threads=cfg.threads, deterministic=cfg.deterministic,
    )
    return mesh, density, model


def cmd_coeffs(cfg: RunConfig, args) -> None:
    _require(cfg, "output")
    _, _, model = _compute(cfg)
    save_model(model, cfg.output)


def cmd_com(cfg: RunConfig, args) -> None:
    _require(cfg, "model")
    model = load_model(cfg.model)
    com = center_of_mass(model)
    _emit({"com_m": com.tolist(), "R0_m": model.R0, "nmax": model.nmax}, cfg.output)


def _query_points(args):
    if args.ellipsoid is not None:
        grid = ellipsoid_grid(*args.ellipsoid, parse_resolution(args.res))
        return grid.points, grid
    if args.points is not None:
        try:
            pts = np.loadtxt(args.points, delimiter=",", ndmin=2, comments="#")
        except (OSError, ValueError) as e:
            raise InputError(f"cannot read points from {args.points}: {e}")
        if pts.shape[1] != 3:
            raise InputError(f"{args.points} must have three columns x,y,z")
        return pts, None
    if args.point is not None:
        return np.array([args.point], dtype=float), None
    raise UsageError("eval requires one of --point, --points or --ellipsoid")


def cmd_eval(cfg: RunConfig, args) -> None:
    _require(cfg, "model", "output")
    model = load_model(cfg.model)
    field = SHField(model, args.brillouin_r, paper_exact_eq11=args.paper_exact_eq11)
    pts, grid = _query_points(args)
    batch = field.evaluate_points(pts, threads=cfg.threads)

    header = ["x", "y", "z", "U", "ax", "ay", "az", "inside_brillouin"]
    columns = [pts[:, 0], pts[:, 1], pts[:, 2], batch.U, batch.a[:, 0], batch.a[:, 1], batch.a[:, 2], batch.inside_brillouin]
    if grid is not None:
        header = ["lon_deg", "lat_deg"] + header
        columns = [grid.lon_deg, grid.lat_deg] + columns
    write_csv(cfg.output, header, columns)
    logger.info(f"Evaluated {len(pts)} points, {int(batch.inside_brillouin.sum())} inside the Brillouin sphere")


def cmd_compare_mascon(cfg: RunConfig, args) -> None:
    _require(cfg, "output")
    if args.ellipsoid is None:
        raise UsageError("compare-mascon requires --ellipsoid A B C")
    if cfg.model is not None:
        _require(cfg, "mesh", "density")
        mesh = load_obj(cfg.mesh, fix_winding=cfg.fix_winding)
        density = load_density(cfg.density)
        model = load_model(cfg.model)
    else:
        mesh, density, model = _compute(cfg)

    mascons = build_mascons(mesh, density, cfg.n_q, cfg.slabs)
    grid = ellipsoid_grid(*args.ellipsoid, parse_resolution(args.res))
    cmp = compare_sh_mascon(model, mascons, grid.points, G=cfg.G, brillouin_r=brillouin_radius(mesh), threads=cfg.threads)
    write_csv(
        cfg.output,
        ["lon_deg", "lat_deg", "a_sh_ms2", "a_mascon_ms2", "da_ms2", "da_mgal", "inside_brillouin"],
        [grid.lon_deg, grid.lat_deg, cmp.norm_sh, cmp.norm_mascon, cmp.delta, cmp.delta_mgal, cmp.inside_brillouin],
    )
    logger.info(f"✅ max |da| = {cmp.max_delta:.3e} m/s^2 ({cmp.max_delta / MGAL:.4f} mgal)")


def _gravity_source(cfg: RunConfig, args):
    if cfg.model is not None:
        return SHGravity(load_model(cfg.model), args.brillouin_r, paper_exact_eq11=args.paper_exact_eq11)
    _require(cfg, "mesh", "density")
    mesh = load_obj(cfg.mesh, fix_winding=cfg.fix_winding)
    mascons = build_mascons(mesh, load_density(cfg.density), cfg.n_q, cfg.slabs)
    return MasconGravity(mascons, cfg.G, brillouin_radius(mesh))


def cmd_propagate(cfg: RunConfig, args) -> None:
    _require(cfg, "output")
    if args.position is None or args.velocity is None:
        raise UsageError("propagate requires --position and --velocity")
    for flag, value in (("--duration", args.duration), ("--tol", args.tol), ("--sample-dt", args.sample_dt)):
        if not value > 0:
            raise UsageError(f"{flag} must be positive, got {value!r}")
    try:
        rot = RotationModel(axis=tuple(args.spin_axis), period_s=args.spin_period, theta0=args.theta0)
    except ValidationError as e:
        raise UsageError(f"invalid rotation model: {e.errors()[0]['msg']}")

    state0 = StateVector(0.0, np.array(args.position), np.array(args.velocity))
    kwargs = dict(tol=args.tol, sample_dt=args.sample_dt)
    sources = [_gravity_source(cfg, args)]
    if args.compare_model is not None:
        if not os.path.isfile(args.compare_model):
            raise InputError(f"--compare-model file not found: {args.compare_model}")
        sources.append(SHGravity(load_model(args.compare_model), args.brillouin_r, paper_exact_eq11=args.paper_exact_eq11))

    root, ext = os.path.splitext(cfg.output)
    compare_path = args.compare_output or f"{root}.compare{ext or '.csv'}"
    if len(sources) == 2:
        _check_output_dir(compare_path, "--compare-output")

    trajectories = propagate_many(state0, args.duration, sources, rot, threads=min(cfg.threads, len(sources)), **kwargs)
    write_csv(cfg.output, TRAJECTORY_HEADER, trajectory_columns(trajectories[0]))

    if len(trajectories) == 2:
        diff = compare_trajectories(trajectories[0], trajectories[1])
        write_csv(compare_path, ["t", "dr_m", "dv_ms"], [diff.t, diff.dr, diff.dv])
        logger.info(f"✅ Final divergence: |dr| = {diff.dr[-1]:.3f} m, |dv| = {diff.dv[-1]:.5f} m/s")


def cmd_verify(cfg: RunConfig, args) -> None:
    mesh, density, model = _compute(cfg)
    estimates = mc_coefficients(
        mesh, density, cfg.nmax, args.samples, cfg.seed, R0=model.R0,
        mode=args.mode, n_q=cfg.n_q, scheme=cfg.slabs, threads=cfg.threads,
    )
    report = verify_report(model, estimates)
    _emit(report.to_dict(), cfg.output)
    logger.info(f"Oracle agreement: {report.pass_fraction:.3f} of entries within |z| <= {report.z_limit:g}")
    if report.pass_fraction < args.min_pass:
        raise VerificationError(
            f"only {report.pass_fraction:.3f} of coefficients agree with the oracle (required {args.min_pass:g})"
        )


COMMANDS = {
    "info": cmd_info,
    "coeffs": cmd_coeffs,
    "com": cmd_com,
    "eval": cmd_eval,
    "compare-mascon": cmd_compare_mascon,
    "propagate": cmd_propagate,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="python -m shgrav.main",
        description="Variable-density spherical-harmonics gravity fields for small bodies.",
        epilog=(
            f"Files: meshes are OBJ; density specs are JSON objects tagged by 'type'; "
            f"SHModel files are JSON, format_version {SHMODEL_FORMAT_VERSION}. See docs/FILE_FORMATS.md."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=SHGRAV_LOG_LEVEL, choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, mesh=False, density=False, model=False, degree=False):
        if mesh:
            p.add_argument("--mesh", help="OBJ shape model (meters, body frame)")
            p.add_argument("--fix-winding", action="store_true", help="flip all faces when the total volume is negative")
        if density:
            p.add_argument("--density", help="density spec: inline JSON or path to a JSON file")
        if model:
            p.add_argument("--model", help="SHModel JSON file")
        if degree:
            p.add_argument("--nmax", type=int, default=4, help="maximum degree (default 4)")
            p.add_argument("--nq", dest="n_q", type=int, default=10, help="radial segments per tetrahedron (default 10)")
            p.add_argument("--r0", type=float, help="reference radius in m (default: Brillouin radius)")
            p.add_argument("--G", dest="G", type=float, default=G_DEFAULT, help=f"gravitational constant (default {G_DEFAULT})")
            p.add_argument("--slabs", choices=[s.value for s in SlabScheme], default=SlabScheme.Z.value,
                           help="slab orientation: z planes (default) or radial shells")
        p.add_argument("-o", "--output", help="output artifact path")
        p.add_argument("--threads", type=int, default=SHGRAV_THREADS, help="worker threads (env SHGRAV_THREADS)")
        p.add_argument("--deterministic", action="store_true", help="reduce partial sums in a fixed order")

    def query(p):
        p.add_argument("--point", type=float, nargs=3, metavar=("X", "Y", "Z"))
        p.add_argument("--points", help="CSV file of x,y,z rows (m)")
        p.add_argument("--ellipsoid", type=float, nargs=3, metavar=("A", "B", "C"), help="semi-axes in m")
        p.add_argument("--res", default="2deg", help="angular resolution of the ellipsoid grid (default 2deg)")

    p = sub.add_parser("info", help="mesh report as JSON")
    common(p, mesh=True)

    p = sub.add_parser("coeffs", help="compute an SHModel")
    common(p, mesh=True, density=True, degree=True)

    p = sub.add_parser("com", help="center of mass from degree-1 coefficients")
    common(p, model=True)

    p = sub.add_parser("eval", help="potential and acceleration CSV")
    common(p, model=True)
    query(p)
    p.add_argument("--brillouin-r", type=float, help="override the Brillouin radius (m)")
    p.add_argument("--paper-exact-eq11", action="store_true",
                   help="multiply the longitude derivative by (n+1); breaks gradient consistency")

    p = sub.add_parser("compare-mascon", help="SH vs mascon acceleration map CSV")
    common(p, mesh=True, density=True, model=True, degree=True)
    query(p)

    p = sub.add_parser("propagate", help="trajectory CSV in the inertial and body frames")
    common(p, mesh=True, density=True, model=True, degree=True)
    p.add_argument("--position", type=float, nargs=3, metavar=("X", "Y", "Z"), help="initial position in N (m)")
    p.add_argument("--velocity", type=float, nargs=3, metavar=("VX", "VY", "VZ"), help="initial velocity in N (m/s)")
    p.add_argument("--duration", type=float, default=86400.0, help="propagation time span (s, default 86400)")
    p.add_argument("--spin-axis", type=float, nargs=3, default=[0.0, 0.0, 1.0])
    p.add_argument("--spin-period", type=float, help="rotation period (s); omit for a non-rotating body")
    p.add_argument("--theta0", type=float, default=0.0, help="rotation angle at t=0 (rad)")
    p.add_argument("--tol", type=float, default=1e-10, help="relative integration tolerance (default 1e-10)")
    p.add_argument("--sample-dt", type=float, default=60.0, help="output cadence (s, default 60)")
    p.add_argument("--compare-model", help="second SHModel propagated from the same state")
    p.add_argument("--compare-output", help="|dr|,|dv| CSV path (default <output>.compare.csv)")
    p.add_argument("--brillouin-r", type=float)
    p.add_argument("--paper-exact-eq11", action="store_true")

    p = sub.add_parser("verify", help="analytic coefficients vs Monte-Carlo oracle")
    common(p, mesh=True, density=True, degree=True)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=[m.value for m in SamplingMode], default=SamplingMode.SEGMENT.value,
                   help="density sampling: slab centers (default) or the density at each sample")
    p.add_argument("--min-pass", type=float, default=0.95, help="required fraction of entries with |z| <= 3")

    return parser


def setup_logging(level: str) -> None:
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT, stream=sys.stderr)


def run(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        setup_logging(args.log_level)
        cfg = build_config(args)
        logger.debug(f"Run config: {cfg.model_dump()}")
        COMMANDS[cfg.command](cfg, args)
        return 0
    except GravityPipelineError as e:
        print(e.one_line(), file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.debug("Unhandled failure", exc_info=True)
        err = GravityPipelineError(f"{type(e).__name__}: {e}")
        print(err.one_line(), file=sys.stderr)
        return err.exit_code


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
