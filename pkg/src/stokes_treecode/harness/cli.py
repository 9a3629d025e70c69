from __future__ import annotations

import argparse
import logging
import pathlib
import sys
from typing import List, Optional, Sequence

from ..config import (
    CUBE_DENSITY,
    DEFAULT_LEAF_SIZE,
    DEFAULT_ORDER,
    DEFAULT_SEED,
    DEFAULT_THETA,
    DEFAULT_WORKERS,
)
from ..engine import TreecodeParams
from ..errors import ParameterError, TreecodeError
from ..kernels import KernelSelection
from ..testcases import SPHERE_NORMALS, CubeCaseConfig, SphereCaseConfig
from .io import write_particles
from .report import BenchReport
from .runner import (
    FORMATS,
    MODES,
    SHRINK_MODES,
    TESTCASES,
    RunConfig,
    execute,
    load_particles,
    write_report,
)
from .studies import (
    SWEEP_ORDERS,
    SWEEP_THETAS,
    format_scaling,
    parameter_sweep,
    size_scaling,
    strong_scaling,
    weak_scaling,
)

COMMANDS = ("run", "sweep", "scaling", "strong-scaling", "weak-scaling", "generate")


def _list_of(kind):
    def parse(text: str) -> List:
        try:
            values = [kind(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"expected a comma-separated list, got {text!r}"
            ) from None
        if not values:
            raise argparse.ArgumentTypeError("list is empty")
        return values

    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stokes-treecode",
        description="Stokeslet/stresslet treecode benchmarks",
    )
    parser.add_argument(
        "command",
        nargs="?",
        default="run",
        choices=COMMANDS,
        help="Operation to perform (default: run)",
    )
    parser.add_argument("--testcase", choices=TESTCASES, default="sphere")
    parser.add_argument(
        "--n", type=int, default=10000, help="Cube particle count (weak: per worker)"
    )
    parser.add_argument(
        "--levels", type=int, default=5, help="Sphere refinement L (N = 20*4^L)"
    )
    parser.add_argument(
        "--sphere-normals",
        choices=SPHERE_NORMALS,
        default="radial",
        help="Sphere normal field: outward (radial) or isotropic random",
    )
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--density", type=float, default=CUBE_DENSITY)
    parser.add_argument("--input", dest="input_path", help="Particle file (file case)")
    parser.add_argument("--order", type=int, default=DEFAULT_ORDER, help="Order p")
    parser.add_argument(
        "--theta", type=float, default=DEFAULT_THETA, help="MAC parameter"
    )
    parser.add_argument(
        "--n0", type=int, default=DEFAULT_LEAF_SIZE, help="Leaf capacity N0"
    )
    parser.add_argument(
        "--shrink",
        choices=SHRINK_MODES,
        default="auto",
        help="Shrink clusters to bounding boxes (auto: on for the sphere only)",
    )
    parser.add_argument("--mode", choices=MODES, default="both")
    parser.add_argument("--workers", type=int, default=DEFAULT_WORKERS)
    parser.add_argument(
        "--kernels",
        choices=["stokeslet", "stresslet", "both"],
        help="Kernels to sum (default: whatever weights the particles carry)",
    )
    parser.add_argument("--out", help="Write the report (or particles) here")
    parser.add_argument("--format", dest="fmt", choices=FORMATS, default="human")
    parser.add_argument(
        "--orders", type=_list_of(int), default=list(SWEEP_ORDERS), help="e.g. 0,2,4"
    )
    parser.add_argument(
        "--thetas",
        type=_list_of(float),
        default=list(SWEEP_THETAS),
        help="e.g. 0.8,0.5,0.2",
    )
    parser.add_argument(
        "--sizes",
        type=_list_of(int),
        default=[50000, 200000, 800000],
        help="Cube sizes for 'scaling'",
    )
    parser.add_argument(
        "--workers-list",
        dest="workers_list",
        type=_list_of(int),
        default=[1, 2, 4, 8],
        help="Worker counts for strong/weak scaling",
    )
    parser.add_argument(
        "--memory", action="store_true", help="Report peak RSS and moment bytes"
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v info, -vv debug"
    )
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    kernels = KernelSelection.from_name(args.kernels) if args.kernels else None
    params = TreecodeParams(
        order=args.order,
        theta=args.theta,
        leaf_size=args.n0,
        kernels=kernels,
        workers=args.workers,
    )
    return RunConfig(
        mode=args.mode,
        testcase=args.testcase,
        params=params,
        shrink=args.shrink,
        sphere=SphereCaseConfig(
            levels=args.levels, seed=args.seed, normals=args.sphere_normals
        ),
        cube=CubeCaseConfig(
            n=args.n,
            density=args.density,
            seed=args.seed,
            stresslets=bool(kernels and kernels.stresslet_enabled),
        ),
        input_path=pathlib.Path(args.input_path) if args.input_path else None,
        out=pathlib.Path(args.out) if args.out else None,
        fmt=args.fmt,
        memory=args.memory,
    )


def _emit(report: BenchReport, config: RunConfig, extra: str = "") -> None:
    if config.out is not None:
        write_report(report, config.out, config.fmt)
        print(f"Wrote {len(report)} row(s) to {config.out}")
        return
    print(report.to_csv() if config.fmt == "csv" else report.render_human())
    if extra and config.fmt == "human":
        print()
        print(extra)


def _dispatch(args: argparse.Namespace, config: RunConfig) -> None:
    if args.command == "run":
        _emit(BenchReport([execute(config).row]), config)
        return

    config.validate()
    params = config.resolved_params()
    if args.command == "generate":
        if config.out is None:
            raise ParameterError("'generate' needs --out")
        particles = load_particles(config)
        write_particles(config.out, particles)
        print(f"Wrote {particles.count} particles to {config.out}")
    elif args.command == "sweep":
        report = parameter_sweep(
            load_particles(config), params, orders=args.orders, thetas=args.thetas
        )
        _emit(report, config)
    elif args.command == "scaling":
        report = size_scaling(
            args.sizes, params, density=config.cube.density, seed=config.cube.seed
        )
        _emit(report, config)
    elif args.command == "strong-scaling":
        report = strong_scaling(load_particles(config), args.workers_list, params)
        _emit(report, config, format_scaling(report))
    elif args.command == "weak-scaling":
        report = weak_scaling(
            config.cube.n,
            args.workers_list,
            params,
            density=config.cube.density,
            seed=config.cube.seed,
        )
        _emit(report, config, format_scaling(report, weak=True))


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(
        level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    try:
        config = config_from_args(args)
        _dispatch(args, config)
    except (TreecodeError, OSError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
