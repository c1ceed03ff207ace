"""Command-line interface.

Subcommands: ``features``, ``persistence``, ``benchmark``, ``sweep`` and
``generate``. Machine-readable output (file paths, JSON) goes to stdout,
logs to stderr. Exit codes: 0 success, 1 runtime failure, 2 bad usage.
"""
from __future__ import annotations

import argparse
import logging
import os
import platform
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__

log = logging.getLogger("topf")

WEIGHTS = {"none": "unweighted", "triangle": "triangle", "effres": "effective_resistance"}


def _dataset(name: str) -> str:
    from .tcbs import canonical_name
    try:
        return canonical_name(name)
    except KeyError as exc:
        raise argparse.ArgumentTypeError(str(exc.args[0])) from None


def _positive(x: str) -> float:
    v = float(x)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{x} is not positive")
    return v


def _nonneg(x: str) -> float:
    v = float(x)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"{x} is negative")
    return v


def _grid(text: str) -> list[float]:
    """``start:stop:count`` (inclusive linspace) or a comma separated list."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            if int(n) < 1:
                raise ValueError
            return [float(v) for v in np.linspace(float(a), float(b), int(n))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use start:stop:count or a,b,c") from None


def _add_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="point cloud file, one point per row")
    src.add_argument("--bench", type=_dataset, help="benchmark cloud name instead of a file")
    p.add_argument("--format", choices=("csv", "whitespace"), default="csv", help="input format")
    p.add_argument("--labels", action="store_true", help="last input column holds integer labels")
    p.add_argument("--seed", type=int, default=0, help="seed for benchmark generation")
    p.add_argument("--scale", type=_positive, default=1.0, help="point-count multiplier for --bench")


def _add_complex(p):
    p.add_argument("--max-dim", type=int, default=None,
                   help="largest homology dimension (default: ambient dimension - 1)")
    p.add_argument("--complex", choices=("auto", "alpha", "vr"), default="auto",
                   help="filtration type; auto = alpha in 2-d/3-d, Vietoris-Rips otherwise")
    p.add_argument("--max-radius", type=_positive, default=None,
                   help="cut the filtration at this value")
    p.add_argument("--alpha-values", choices=("gabriel", "circumradius"), default="gabriel",
                   help="alpha filtration values")


def _add_pipeline(p):
    _add_complex(p)
    p.add_argument("--lambda", dest="lam", type=float, default=0.3,
                   help="interpolation between birth and death")
    p.add_argument("--interpolation", choices=("geometric", "linear"), default="geometric",
                   help="snapshot time rule")
    p.add_argument("--delta", type=_positive, default=0.07, help="thresholding parameter")
    p.add_argument("--beta", type=_nonneg, default=0.0, help="feature selection factor")
    p.add_argument("--min-rel-quot", type=_nonneg, default=0.1, help="steep drop-off quotient")
    p.add_argument("--max-total-quot", type=_nonneg, default=10.0,
                   help="largest lifetime ratio to the most persistent class")
    p.add_argument("--min-0-ratio", type=_nonneg, default=5.0,
                   help="required persistence ratio of 0-dim over higher-dim classes")
    p.add_argument("--weights", choices=tuple(WEIGHTS), default="triangle", help="simplex weights")


def _config(args, **extra):
    from .features import TopfConfig
    return TopfConfig(max_dim=args.max_dim, complex=args.complex, max_radius=args.max_radius,
                      lam=args.lam, delta=args.delta, beta=args.beta,
                      min_rel_quot=args.min_rel_quot, max_total_quot=args.max_total_quot,
                      min_0_ratio=args.min_0_ratio, weights=WEIGHTS[args.weights],
                      interpolation=args.interpolation, alpha_values=args.alpha_values, **extra)


def _load(args):
    from .pointcloud import generate_benchmark, load_point_cloud
    if args.bench is not None:
        return generate_benchmark(args.bench, args.seed, args.scale)
    return load_point_cloud(args.input, args.format, args.labels)


def _stem(args) -> str:
    if args.bench is not None:
        return f"{args.bench}_seed{args.seed}"
    return os.path.splitext(os.path.basename(args.input))[0]


def cmd_features(args) -> int:
    from .features import topf
    pc = _load(args)
    config = _config(args, no_feature_column=args.no_feature_column)
    if args.dump_chains:
        os.makedirs(args.dump_chains, exist_ok=True)
    fm = topf(pc, config, dump_dir=args.dump_chains)
    out = args.output or f"{_stem(args)}_features.csv"
    meta = args.meta or os.path.splitext(out)[0] + ".json"
    fm.to_csv(out, pc.points)
    fm.meta_json(meta)
    log.info("%d points, %d feature columns", fm.shape[0], fm.shape[1])
    print(out)
    print(meta)
    return 0


def cmd_persistence(args) -> int:
    from .complex import build_filtration
    from .persistence import compute_persistence
    pc = _load(args)
    max_dim = args.max_dim if args.max_dim is not None else max(pc.ambient_dim - 1, 0)
    fc = build_filtration(pc, max_dim, args.complex, args.max_radius,
                          alpha_values=args.alpha_values)
    diag = compute_persistence(fc, min(max_dim, fc.dim - 1))
    log.info("%d pairs", len(diag.pairs))
    if args.output:
        diag.to_json(args.output)
        print(args.output)
    else:
        sys.stdout.write(diag.to_json() + "\n")
    return 0


def cmd_benchmark(args) -> int:
    from .bench import run_benchmark, write_benchmark
    from .tcbs import BENCHMARKS
    names = list(BENCHMARKS) if args.all else args.datasets
    if not names:
        raise _Usage("name datasets with --datasets or pass --all")
    rows = run_benchmark(names, _config(args), args.repeats, args.seed, args.scale, args.restarts)
    out = args.output or "benchmark.csv"
    js = args.json or os.path.splitext(out)[0] + ".json"
    write_benchmark(rows, out, js, timing=args.record_timing)
    for r in rows:
        log.warning("%s: mean ARI %.3f, mean runtime %.2fs", r.dataset, r.mean_ari, r.mean_runtime)
    print(out)
    print(js)
    return 1 if all(not r.aris for r in rows) else 0


def cmd_sweep(args) -> int:
    from .bench import robustness_sweep
    grid = args.grid
    if args.kind == "outliers":
        grid = [int(round(g)) for g in grid]
    rep = robustness_sweep(args.dataset, args.kind, grid, args.repeats, _config(args),
                           args.seed, args.scale, args.restarts)
    out = args.output or f"sweep_{rep.dataset}_{args.kind}.csv"
    js = args.json or os.path.splitext(out)[0] + ".json"
    rep.write(out, js)
    print(out)
    print(js)
    return 1 if all(not a for a in rep.aris) else 0


def cmd_generate(args) -> int:
    from .pointcloud import generate_benchmark, save_point_cloud
    pc = generate_benchmark(args.dataset, args.seed, args.scale)
    out = args.output or f"{args.dataset}_seed{args.seed}.csv"
    save_point_cloud(pc, out, args.format, labels=True)
    print(out)
    return 0


class _Usage(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = argparse.ArgumentParser(prog="topf", formatter_class=fmt,
                                description="Topological point features for point clouds.")
    p.add_argument("--version", action="version", version=version_string())
    p.add_argument("-v", "--verbose", action="count", default=0, help="more log output on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("features", formatter_class=fmt, help="compute the per-point feature matrix")
    _add_source(f)
    _add_pipeline(f)
    f.add_argument("--no-feature-column", action="store_true",
                   help="append a 1 - max column for points without structure")
    f.add_argument("--output", help="feature CSV path")
    f.add_argument("--meta", help="column metadata JSON path (default: next to --output)")
    f.add_argument("--dump-chains", metavar="DIR", help="write each harmonic chain as CSV here")
    f.set_defaults(func=cmd_features)

    q = sub.add_parser("persistence", formatter_class=fmt, help="persistence diagram as JSON")
    _add_source(q)
    _add_complex(q)
    q.add_argument("--output", help="JSON path (default: stdout)")
    q.set_defaults(func=cmd_persistence)

    b = sub.add_parser("benchmark", formatter_class=fmt, help="clustering benchmark table")
    _add_pipeline(b)
    sel = b.add_mutually_exclusive_group()
    sel.add_argument("--all", action="store_true", help="all seven benchmark clouds")
    sel.add_argument("--datasets", nargs="+", type=_dataset, help="benchmark cloud names")
    b.add_argument("--repeats", type=int, default=20, help="runs per dataset")
    b.add_argument("--seed", type=int, default=0, help="master seed")
    b.add_argument("--scale", type=_positive, default=1.0, help="point-count multiplier")
    b.add_argument("--restarts", type=int, default=10, help="k-means restarts")
    b.add_argument("--record-timing", action="store_true",
                   help="write wall-clock runtimes into the report (reruns then differ)")
    b.add_argument("--output", help="CSV path")
    b.add_argument("--json", help="JSON path (default: next to --output)")
    b.set_defaults(func=cmd_benchmark)

    s = sub.add_parser("sweep", formatter_class=fmt, help="noise or outlier robustness sweep")
    _add_pipeline(s)
    s.add_argument("--dataset", type=_dataset, required=True, help="benchmark cloud name")
    s.add_argument("--kind", choices=("gaussian", "outliers"), default="gaussian",
                   help="perturbation type")
    s.add_argument("--grid", type=_grid, required=True,
                   help="noise sigmas or outlier counts: start:stop:count or a,b,c")
    s.add_argument("--repeats", type=int, default=5, help="runs per grid cell")
    s.add_argument("--seed", type=int, default=0, help="master seed")
    s.add_argument("--scale", type=_positive, default=1.0, help="point-count multiplier")
    s.add_argument("--restarts", type=int, default=10, help="k-means restarts")
    s.add_argument("--output", help="CSV path")
    s.add_argument("--json", help="JSON path (default: next to --output)")
    s.set_defaults(func=cmd_sweep)

    g = sub.add_parser("generate", formatter_class=fmt, help="export a labelled benchmark cloud")
    g.add_argument("dataset", type=_dataset, help="benchmark cloud name")
    g.add_argument("--seed", type=int, default=0, help="generator seed")
    g.add_argument("--scale", type=_positive, default=1.0, help="point-count multiplier")
    g.add_argument("--format", choices=("csv", "whitespace"), default="csv", help="output format")
    g.add_argument("--output", help="output path")
    g.set_defaults(func=cmd_generate)
    return p


def version_string() -> str:
    import scipy
    return (f"topf {__version__} (python {platform.python_version()}, numpy {np.__version__}, "
            f"scipy {scipy.__version__})")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    try:
        return args.func(args)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"topf: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"topf: error: {exc}", file=sys.stderr)
        log.debug("traceback", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
