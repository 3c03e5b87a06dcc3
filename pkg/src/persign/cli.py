"""Command line front end.

Exit codes: 0 success, 1 usage error, 2 input parse error, 3 numeric or
validation failure during computation.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import time

import numpy as np

from . import io as pio
from .homology import FieldSpec, fiber_barcode, hilbert_function, make_grid
from .measures import euler_signed_measure, hilbert_signed_measure
from .pipeline import (PipelineConfig, run_pipeline, sample_seed,
                       stability_experiment, stability_rows_to_csv)
from .simplicial import (build_function_rips, build_rips,
                         lower_star_multifiltration, validate_complex,
                         vertex_descriptor)
from .transport import SWConfig, kr_distance, sw_gram

USAGE_ERROR, INPUT_ERROR, NUMERIC_ERROR = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """argparse normally exits 2 on usage problems; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _add_global_flags(parser, suppress: bool):
    """The global flags are legal both before and after the subcommand; the
    per-subcommand copies use SUPPRESS defaults so they never clobber values
    parsed by the top-level parser."""
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    parser.add_argument("--config", help="INI config file", **kw)
    parser.add_argument("--seed", type=int, help="override the config seed",
                        **kw)
    parser.add_argument("--threads", type=int,
                        help="worker threads for fiber sweeps",
                        **({"default": argparse.SUPPRESS} if suppress
                           else {"default": 1}))
    parser.add_argument("--keep-going", action="store_true",
                        help="skip failing inputs instead of aborting", **kw)
    parser.add_argument("--out", help="output file or directory", **kw)


def _build_parser() -> _Parser:
    parser = _Parser(prog="persign",
                     description="Multiparameter persistence signed measures: "
                                 "build, compare, vectorize.")
    _add_global_flags(parser, suppress=False)
    parser.set_defaults(config=None, seed=None, keep_going=False, out=None)
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    def add_parser(name, **kw):
        p = sub.add_parser(name, **kw)
        _add_global_flags(p, suppress=True)
        return p

    p = add_parser("rips", help="Rips complex of a point cloud")
    p.add_argument("cloud")
    p.add_argument("--max-edge-length", type=float, required=True)
    p.add_argument("--max-dim", type=int, default=2)

    p = add_parser("function-rips",
                       help="Rips plus a vertex descriptor axis")
    p.add_argument("cloud")
    p.add_argument("--max-edge-length", type=float, required=True)
    p.add_argument("--max-dim", type=int, default=2)
    p.add_argument("--descriptor", default="kde_codensity",
                   choices=("degree", "closeness", "hks", "kde_codensity",
                            "dtm"))
    p.add_argument("--t", type=float, default=10.0)
    p.add_argument("--bandwidth", type=float, default=0.1)
    p.add_argument("--mass", type=float, default=0.1)

    p = add_parser("graph", help="lower-star complex of a vertex-"
                                     "attributed graph")
    p.add_argument("edges")
    p.add_argument("attributes")
    p.add_argument("--use", required=True,
                   help="comma-separated attribute names, one per axis")

    p = add_parser("measure", help="signed measures of a complex file")
    p.add_argument("complex")
    p.add_argument("--degrees", default="0")
    p.add_argument("--kind", default="hilbert", choices=("hilbert", "euler"))
    p.add_argument("--resolution", type=int, default=50)
    p.add_argument("--beta", type=float, default=0.01)
    p.add_argument("--field", type=int, default=11)

    p = add_parser("barcode", help="barcode of one grid fiber of a complex")
    p.add_argument("complex")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--fiber", default="",
                   help="comma-separated grid indices, one per leading axis "
                        "(empty for one-parameter complexes)")
    p.add_argument("--resolution", type=int, default=50)
    p.add_argument("--beta", type=float, default=0.01)
    p.add_argument("--field", type=int, default=11)

    p = add_parser("distance", help="transport distance of two measures")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--p", default="1")

    p = add_parser("gram", help="sliced-Wasserstein kernel Gram matrix")
    p.add_argument("measures", nargs="+")
    p.add_argument("--directions", type=int, default=50)
    p.add_argument("--scale", type=float, default=1.0)

    p = add_parser("featurize",
                       help="full pipeline: inputs to feature vectors")
    p.add_argument("inputs", nargs="+")

    p = add_parser("stability", help="random-walk stability experiment")
    p.add_argument("edges")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--walks", type=int, default=12)
    p.add_argument("--noise", type=float, default=0.5)
    p.add_argument("--resolution", type=int, default=128)
    p.add_argument("--euler", action="store_true",
                   help="Euler measures instead of degree-0 Hilbert measures")

    p = add_parser("bench", help="fiber-sweep timing report")
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--max-edge-length", type=float, default=0.35)
    p.add_argument("--resolution", type=int, default=20)

    p = add_parser("validate", help="check a complex file")
    p.add_argument("complex")
    return parser


def _require_out(args, parser):
    if not args.out:
        parser.error(f"{args.command} requires --out")
    return args.out


def _load_config(args) -> PipelineConfig:
    if args.config:
        try:
            with open(args.config) as handle:
                text = handle.read()
        except OSError as exc:
            raise pio.InputError(str(exc.strerror or exc), path=args.config)
        cfg = PipelineConfig.from_ini(text, path=args.config)
    else:
        cfg = PipelineConfig()
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def _cmd_rips(args, parser):
    cloud = pio.read_point_cloud(args.cloud)
    c = build_rips(cloud, args.max_edge_length, args.max_dim)
    pio.write_complex(c, _require_out(args, parser))
    print(f"wrote {len(c.simplices)} simplices, 1 parameter")


def _cmd_function_rips(args, parser):
    cloud = pio.read_point_cloud(args.cloud)
    desc = vertex_descriptor(cloud, args.descriptor, t=args.t,
                             bandwidth=args.bandwidth, mass=args.mass)
    c = build_function_rips(cloud, np.asarray(desc), args.max_edge_length,
                            args.max_dim)
    pio.write_complex(c, _require_out(args, parser))
    print(f"wrote {len(c.simplices)} simplices, 2 parameters")


def _cmd_graph(args, parser):
    graph = pio.read_graph(args.edges, args.attributes)
    names = tuple(part.strip() for part in args.use.split(",") if part.strip())
    c = lower_star_multifiltration(graph, names)
    pio.write_complex(c, _require_out(args, parser))
    print(f"wrote {len(c.simplices)} simplices, {len(names)} parameters")


def _cmd_measure(args, parser):
    out = _require_out(args, parser)
    c = pio.read_complex(args.complex)
    grid = make_grid(c, args.resolution, args.beta)
    degrees = tuple(int(part) for part in args.degrees.split(",") if part.strip())
    os.makedirs(out, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.complex))[0]
    if args.kind == "euler":
        mu = euler_signed_measure(c, grid)
        path = os.path.join(out, f"{stem}.measure-euler.json")
        pio.write_measure(mu, path)
        print(f"wrote {path} ({len(mu)} atoms)")
        return
    h = hilbert_function(c, degrees, grid, field=FieldSpec(args.field),
                         threads=args.threads)
    for d in degrees:
        mu = hilbert_signed_measure(h, d)
        path = os.path.join(out, f"{stem}.measure-h{d}.json")
        pio.write_measure(mu, path)
        print(f"wrote {path} ({len(mu)} atoms)")


def _cmd_barcode(args, parser):
    c = pio.read_complex(args.complex)
    fiber = tuple(int(part) for part in args.fiber.split(",") if part.strip())
    grid = (make_grid(c, args.resolution, args.beta)
            if c.num_parameters > 1 else None)
    b = fiber_barcode(c, fiber, args.degree, grid=grid,
                      field=FieldSpec(args.field))
    for birth, death in b.bars:
        print(f"[{birth!r}, {'inf' if death == float('inf') else repr(death)})")
    print(f"{len(b.bars)} bars in degree {args.degree}")


def _cmd_distance(args, parser):
    mu = pio.read_measure(args.left)
    nu = pio.read_measure(args.right)
    p = float("inf") if args.p in ("inf", "infinity") else float(args.p)
    if p in (1.0, 2.0):
        p = int(p)
    print(repr(kr_distance(mu, nu, p)))


def _cmd_gram(args, parser):
    measures = [pio.read_measure(path) for path in args.measures]
    seed = args.seed if args.seed is not None else 0
    cfg = SWConfig.sample(measures[0].dim, num_directions=args.directions,
                          scale=args.scale, seed=seed)
    labels = [os.path.splitext(os.path.basename(p))[0] for p in args.measures]
    gram = sw_gram(measures, cfg, labels=labels)
    pio.write_gram(gram, _require_out(args, parser))
    print(f"wrote {len(gram)}x{len(gram)} Gram matrix")


def _cmd_featurize(args, parser):
    cfg = _load_config(args)
    manifest = run_pipeline(args.inputs, cfg, _require_out(args, parser),
                            threads=args.threads, keep_going=args.keep_going)
    done = len(manifest["samples"])
    failed = len(manifest["failures"])
    print(f"{done} samples processed, {failed} failed")


def _cmd_stability(args, parser):
    out = _require_out(args, parser)
    graph = pio.read_graph(args.edges)
    seed = args.seed if args.seed is not None else 0
    rows = stability_experiment(graph, steps=args.steps, walks=args.walks,
                                noise=args.noise, seed=seed,
                                resolution=args.resolution,
                                measure="euler" if args.euler else "hilbert",
                                threads=args.threads)
    pio.atomic_write_text(out, stability_rows_to_csv(rows))
    print(f"wrote {len(rows)} pair rows")


def _cmd_bench(args, parser):
    from .simplicial import PointCloud

    seed = args.seed if args.seed is not None else 0
    rng = np.random.default_rng(seed)
    cloud = PointCloud(rng.random((args.points, 2)))
    desc = vertex_descriptor(cloud, "kde_codensity", bandwidth=0.2)
    c = build_function_rips(cloud, np.asarray(desc), args.max_edge_length, 2)
    grid = make_grid(c, args.resolution, 0.01)
    hilbert_function(c, (0, 1), grid, threads=1)  # warm the jit
    t0 = time.perf_counter()
    hilbert_function(c, (0, 1), grid, threads=1)
    t1 = time.perf_counter()
    hilbert_function(c, (0, 1), grid, threads=args.threads)
    t2 = time.perf_counter()
    print(f"{len(c.simplices)} simplices, grid {grid.shape}")
    print(f"1 thread: {t1 - t0:.3f}s, {args.threads} threads: {t2 - t1:.3f}s")


def _cmd_validate(args, parser):
    c = pio.read_complex(args.complex)
    report = validate_complex(c)
    if report.ok:
        print(f"ok: {len(c.simplices)} simplices")
    else:
        print(str(report))
        raise SystemExit(NUMERIC_ERROR)


_COMMANDS = {
    "rips": _cmd_rips,
    "function-rips": _cmd_function_rips,
    "graph": _cmd_graph,
    "measure": _cmd_measure,
    "barcode": _cmd_barcode,
    "distance": _cmd_distance,
    "gram": _cmd_gram,
    "featurize": _cmd_featurize,
    "stability": _cmd_stability,
    "bench": _cmd_bench,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _COMMANDS[args.command](args, parser)
    except pio.InputError as exc:
        print(f"persign: input error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"persign: error: {exc}", file=sys.stderr)
        return NUMERIC_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
