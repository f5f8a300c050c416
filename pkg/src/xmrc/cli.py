"""Operator command line.

Subcommands: recon, mask, phantom, eval, demo, bench, serve. Every path
is a thin wrapper over the library: containers written here are bitwise
identical to direct API calls. Summary output is single-line key=value so
scripts and CI can grep it.

Exit codes: 0 success, 1 usage error, 2 runtime error (the typed error
name is printed to stderr).
"""

import argparse
import statistics
import sys
import time
from pathlib import Path

from .container import (
    read_container_file,
    write_container_file,
)
from .demo import acs_rows_of, build_demo_objects
from .errors import KindMismatch, MissingACS, XmrcError
from .metrics import error_map, error_map_to_pgm, rlne
from .phantoms import estimate_coil_maps, shepp_logan
from .sampling import MaskParams, generate_mask
from .solver import SolverParams, pfista_parallel, pfista_single
from .transforms import FrameSpec
from .types import (
    CoilSensitivities,
    ComplexImage,
    KSpaceGrid,
    MultiCoilKSpace,
    SamplingMask,
)

USAGE_ERROR = 1
RUNTIME_ERROR = 2


class CliParser(argparse.ArgumentParser):
    """argparse, but usage errors exit 1 (2 is reserved for runtime errors)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _positive_int(value):
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return n


def _gamma(value):
    g = float(value)
    if not 0.0 < g <= 1.0:
        raise argparse.ArgumentTypeError(f"gamma must be in (0, 1], got {value}")
    return g


def _rate(value):
    r = float(value)
    if not 0.0 < r <= 1.0:
        raise argparse.ArgumentTypeError(f"rate must be in (0, 1], got {value}")
    return r


def _center_fraction(value):
    c = float(value)
    if not 0.0 <= c < 1.0:
        raise argparse.ArgumentTypeError(f"center fraction must be in [0, 1), got {value}")
    return c


def _positive_float(value):
    x = float(value)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return x


def _nonnegative_float(value):
    x = float(value)
    if x < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return x


def _size(value):
    """Accept '256' (square) or '256x192' (ny x nx)."""
    parts = value.lower().split("x")
    try:
        dims = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like 256 or 256x192, got {value!r}")
    if len(dims) == 1:
        dims = dims * 2
    if len(dims) != 2 or min(dims) < 2:
        raise argparse.ArgumentTypeError(f"size must look like 256 or 256x192, got {value!r}")
    return tuple(dims)


def _add_solver_flags(p):
    p.add_argument("--lambda", dest="lam", type=_positive_float, default=1e-3,
                   help="regularization weight (default 1e-3)")
    p.add_argument("--lambda-mode", choices=["absolute", "relative-to-zero-filled"],
                   default="relative-to-zero-filled")
    p.add_argument("--gamma", type=_gamma, default=1.0, help="step size in (0, 1]")
    p.add_argument("--iters", type=_positive_int, default=200, help="iteration budget")
    p.add_argument("--tol", type=_nonnegative_float, default=1e-6,
                   help="relative iterate-change stopping tolerance")
    p.add_argument("--frame", choices=["identity", "undecimated-haar"],
                   default="undecimated-haar")
    p.add_argument("--levels", type=_positive_int, default=3)


def _solver_params(args) -> SolverParams:
    return SolverParams(
        lam=args.lam,
        gamma=args.gamma,
        max_iter=args.iters,
        tol=args.tol,
        frame=FrameSpec(args.frame, args.levels),
        lambda_mode=args.lambda_mode,
    )


def build_parser() -> CliParser:
    parser = CliParser(prog="xmrc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    p = sub.add_parser("recon",
                       help="reconstruct an image from undersampled k-space")
    p.add_argument("--in", dest="in_path", required=True, help="k-space container (.xmrc)")
    p.add_argument("--mask", required=True, help="sampling mask container")
    p.add_argument("--maps", default=None, help="coil-map container (parallel only)")
    p.add_argument("--truth", default=None, help="ground-truth image for RLNE/error map")
    p.add_argument("--out", required=True, help="output image container")
    p.add_argument("--method", choices=["pfista", "pfista_parallel"], required=True)
    _add_solver_flags(p)

    p = sub.add_parser("mask", help="generate a sampling mask")
    p.add_argument("--kind", choices=["pseudo-radial", "cartesian-lines", "full"], required=True)
    p.add_argument("--rate", type=_rate, required=True)
    p.add_argument("--center-fraction", type=_center_fraction, default=0.0)
    p.add_argument("--size", type=_size, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("phantom", help="generate the demo phantom")
    p.add_argument("--size", type=_size, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="RLNE between two image containers")
    p.add_argument("--truth", required=True)
    p.add_argument("--in", dest="in_path", required=True, help="reconstruction to score")

    p = sub.add_parser("demo", help="write the full demo fixture set")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--size", type=_size, default=(256, 256))
    p.add_argument("--seed", type=int, default=1234)

    p = sub.add_parser("bench",
                       help="time both methods on a demo fixture directory (CSV)")
    p.add_argument("--in", dest="in_path", required=True, help="fixture directory from `xmrc demo`")
    p.add_argument("--reps", type=_positive_int, default=3)
    _add_solver_flags(p)

    p = sub.add_parser("serve", help="run the reconstruction service")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--data-dir", default=None)
    p.add_argument("--workers", type=_positive_int, default=None)

    return parser


# ---------------------------------------------------------------------------


def _expect(obj, cls, what):
    if not isinstance(obj, cls):
        raise KindMismatch(f"{what}: expected {cls.__name__}, got {type(obj).__name__}")
    return obj


def cmd_recon(args) -> int:
    params = _solver_params(args)
    mask = _expect(read_container_file(args.mask), SamplingMask, args.mask)
    truth = None
    if args.truth:
        truth = _expect(read_container_file(args.truth), ComplexImage, args.truth)
    if args.method == "pfista":
        y = _expect(read_container_file(args.in_path), KSpaceGrid, args.in_path)
        result = pfista_single(y, mask, params)
    else:
        y = _expect(read_container_file(args.in_path), MultiCoilKSpace, args.in_path)
        if args.maps:
            maps = _expect(read_container_file(args.maps), CoilSensitivities, args.maps)
        else:
            acs = acs_rows_of(mask)
            if acs == 0:
                raise MissingACS("no --maps and no fully sampled center rows in the mask")
            maps = estimate_coil_maps(y, acs)
        result = pfista_parallel(y, mask, maps, params)
    write_container_file(args.out, result.image)
    quality = "n/a"
    if truth is not None:
        quality = f"{rlne(truth, result.image):.6f}"
        pgm = error_map_to_pgm(error_map(truth, result.image))
        Path(args.out).with_suffix(".pgm").write_bytes(pgm)
    print(f"iters={result.iterations_run} rlne={quality} time={result.wall_time:.3f}")
    return 0


def cmd_mask(args) -> int:
    ny, nx = args.size
    params = MaskParams(args.kind, args.rate, center_fraction=args.center_fraction, seed=args.seed)
    mask = generate_mask(ny, nx, params)
    write_container_file(args.out, mask)
    print(f"rate={mask.rate:.6f}")
    return 0


def cmd_phantom(args) -> int:
    ny, nx = args.size
    write_container_file(args.out, shepp_logan(ny, nx))
    print(f"size={ny}x{nx}")
    return 0


def cmd_eval(args) -> int:
    truth = _expect(read_container_file(args.truth), ComplexImage, args.truth)
    recon = _expect(read_container_file(args.in_path), ComplexImage, args.in_path)
    print(f"rlne={rlne(truth, recon):.6f}")
    return 0


def cmd_demo(args) -> int:
    ny, nx = args.size
    if ny != nx:
        raise KindMismatch("demo fixtures are square; pass a single size")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, obj in build_demo_objects(ny, args.seed).items():
        write_container_file(out / f"{name}.xmrc", obj)
    print(f"fixtures={out}")
    return 0


def cmd_bench(args) -> int:
    fixtures = Path(args.in_path)
    needed = {
        "pfista": ("kspace_single.xmrc", "mask_radial_30.xmrc", None),
        "pfista_parallel": ("kspace_multi.xmrc", "mask_cartesian_25.xmrc", "coil_maps.xmrc"),
    }
    for files in needed.values():
        for f in files:
            if f and not (fixtures / f).exists():
                raise FileNotFoundError(f"missing fixture {fixtures / f}")
    truth = read_container_file(fixtures / "phantom.xmrc")
    params = _solver_params(args)
    print("method,reps,median_solver_seconds,median_total_seconds,rlne")
    for method, (data_f, mask_f, maps_f) in needed.items():
        solver_times, total_times, quality = [], [], None
        for _ in range(args.reps):
            t0 = time.perf_counter()
            y = read_container_file(fixtures / data_f)
            mask = read_container_file(fixtures / mask_f)
            if method == "pfista":
                result = pfista_single(y, mask, params)
            else:
                maps = read_container_file(fixtures / maps_f)
                result = pfista_parallel(y, mask, maps, params)
            total_times.append(time.perf_counter() - t0)
            solver_times.append(result.wall_time)
            quality = rlne(truth, result.image)
        print(
            f"{method},{args.reps},{statistics.median(solver_times):.4f},"
            f"{statistics.median(total_times):.4f},{quality:.6f}"
        )
    return 0


def cmd_serve(args) -> int:
    import dataclasses

    import uvicorn

    from .service import ServiceConfig, create_app

    overrides = {"port": args.port, "data_dir": args.data_dir, "workers": args.workers}
    if args.config:
        config = ServiceConfig.from_file(args.config, **overrides)
    elif args.data_dir is not None:
        config = ServiceConfig(
            data_dir=args.data_dir,
            port=args.port if args.port is not None else ServiceConfig.port,
            workers=args.workers if args.workers is not None else ServiceConfig.workers,
        )
    else:
        print("xmrc serve: error: --data-dir (or --config) is required", file=sys.stderr)
        return USAGE_ERROR
    if config.ui_dir is None:
        detected = _default_ui_dir()
        if detected:
            config = dataclasses.replace(config, ui_dir=detected)
    uvicorn.run(create_app(config), host="0.0.0.0", port=config.port, log_level="info")
    return 0


def _default_ui_dir():
    """Browser-client build dir: next to the cwd, or next to this checkout."""
    candidates = [Path("frontend/dist")]
    try:
        candidates.append(Path(__file__).resolve().parents[2] / "frontend" / "dist")
    except IndexError:
        pass
    for candidate in candidates:
        if candidate.is_dir():
            return str(candidate.resolve())
    return None


_COMMANDS = {
    "recon": cmd_recon,
    "mask": cmd_mask,
    "phantom": cmd_phantom,
    "eval": cmd_eval,
    "demo": cmd_demo,
    "bench": cmd_bench,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except XmrcError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    except (OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
