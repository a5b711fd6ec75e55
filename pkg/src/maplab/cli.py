"""Command line interface: sample, enumerate, certify, experiment, convert.

All randomness flows from an explicit ``--seed``; outputs are byte-identical
for identical argument vectors regardless of ``--threads`` (env fallback
``MAPLAB_THREADS``).  Exit codes: 0 success, 1 hard-assertion failure (the
counterexample bundle path is printed), 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments as exps
from .bijections import (
    build_bundle,
    bundle_json,
    cvs_inverse,
    trivial_map_to_quad,
    trivial_quad_to_map,
)
from .core_map import dual, read_map_text, write_map_text
from .errors import AssertionFailure, MapLabError
from .trees import (
    enumerate_trees,
    read_tree_text,
    sample_uniform_tree,
    write_tree_text,
)
from .verify import certify, report_json


def _default_threads() -> int:
    env = os.environ.get("MAPLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _write_output(path: str | None, text: str, force: bool) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    p = Path(path)
    if p.exists() and not force:
        raise MapLabError(f"{p} exists; pass --force to overwrite")
    p.write_text(text)


def _parse_grid(value: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in value.split(",") if tok)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maplab",
        description="rooted planar maps: bijections, certification, Monte Carlo experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="sample a uniform tree, quadrangulation or map")
    p_sample.add_argument("what", choices=["tree", "quad", "map"])
    p_sample.add_argument("--n", type=int, required=True)
    p_sample.add_argument("--seed", type=int, required=True)
    p_sample.add_argument("--eps", type=int, choices=[0, 1], default=None,
                          help="epsilon bit for quad sampling (default: drawn from the seed)")
    p_sample.add_argument("--format", choices=["text", "bundle"], default="text")
    p_sample.add_argument("--out", default=None)
    p_sample.add_argument("--force", action="store_true")

    p_enum = sub.add_parser("enumerate", help="enumerate well-labeled trees")
    p_enum.add_argument("what", choices=["trees"])
    p_enum.add_argument("--n", type=int, required=True)
    p_enum.add_argument("--out", default=None, help="write one 'n dyck labels...' line per tree")
    p_enum.add_argument("--force", action="store_true")

    p_cert = sub.add_parser("certify", help="exhaustive certification at one size")
    p_cert.add_argument("--n", type=int, required=True)
    p_cert.add_argument("--out", default=None)
    p_cert.add_argument("--threads", type=int, default=_default_threads())
    p_cert.add_argument("--force", action="store_true")

    p_exp = sub.add_parser("experiment", help="run a seeded Monte Carlo experiment")
    p_exp.add_argument(
        "kind",
        choices=["moments", "tv", "two-point", "isometry", "delta", "reroot", "nj"],
    )
    p_exp.add_argument("--n", type=int, default=None)
    p_exp.add_argument(
        "--n-grid",
        type=_parse_grid,
        default=None,
        help="comma separated sizes (grid experiments default to 100,1000,10000,100000)",
    )
    p_exp.add_argument("--reps", type=int, required=True)
    p_exp.add_argument("--pairs-per-rep", type=int, default=200)
    p_exp.add_argument("--seed", type=int, required=True)
    p_exp.add_argument("--out", required=True, help="basename; writes .csv and .json")
    p_exp.add_argument("--threads", type=int, default=_default_threads())
    p_exp.add_argument("--force", action="store_true")
    p_exp.add_argument("--large-n", action="store_true", help="allow sizes beyond 200000")

    p_conv = sub.add_parser("convert", help="apply a bijection to a file")
    p_conv.add_argument(
        "kind", choices=["map-to-quad", "quad-to-map", "dual", "tree-to-bundle"]
    )
    p_conv.add_argument("--in", dest="infile", required=True)
    p_conv.add_argument("--out", default=None)
    p_conv.add_argument("--eps", type=int, choices=[0, 1], default=0)
    p_conv.add_argument("--force", action="store_true")
    return parser


def _cmd_sample(args) -> int:
    rng = np.random.default_rng(args.seed)
    tree = sample_uniform_tree(args.n, rng)
    eps = args.eps if args.eps is not None else int(rng.integers(0, 2))
    if args.what == "tree":
        if args.format == "bundle":
            _write_output(args.out, bundle_json(build_bundle(tree, eps)), args.force)
        else:
            _write_output(args.out, write_tree_text(tree), args.force)
        return 0
    cvs = cvs_inverse(tree, eps)
    if args.what == "quad":
        if args.format == "bundle":
            _write_output(args.out, bundle_json(build_bundle(tree, eps)), args.force)
        else:
            _write_output(args.out, write_map_text(cvs.quad.map, cvs.quad.v_star), args.force)
        return 0
    # uniform rooted map: de-point the quadrangulation, then the trivial inverse
    mm = trivial_quad_to_map(cvs.quad.map)
    if args.format == "bundle":
        _write_output(args.out, bundle_json(build_bundle(tree, eps)), args.force)
    else:
        _write_output(args.out, write_map_text(mm), args.force)
    return 0


def _cmd_enumerate(args) -> int:
    count = 0
    lines = []
    for tree in enumerate_trees(args.n):
        count += 1
        if args.out is not None:
            word = "".join(str(int(b)) for b in tree.dyck)
            labels = " ".join(str(int(x)) for x in tree.labels)
            lines.append(f"{tree.n_edges} {word} {labels}")
    if args.out is not None:
        _write_output(args.out, "\n".join(lines) + "\n", args.force)
    print(count)
    return 0


def _cmd_certify(args) -> int:
    ce_path = None
    if args.out:
        ce_path = str(Path(args.out).with_suffix(".counterexample.json"))
    report = certify(args.n, threads=args.threads, counterexample_path=ce_path)
    text = report_json(report)
    if args.out:
        _write_output(args.out, text, args.force)
    else:
        sys.stdout.write(text)
    if not report["pass"]:
        if "counterexample" in report:
            print(f"counterexample bundle: {report['counterexample']}", file=sys.stderr)
        return 1
    return 0


def _cmd_experiment(args) -> int:
    kind = args.kind.replace("-", "_")
    grid = args.n_grid
    n = args.n
    kwargs = {"seed": args.seed, "threads": args.threads}
    if kind in ("moments", "two_point", "reroot"):
        if n is None:
            raise MapLabError(f"experiment {args.kind} needs --n")
        if kind == "moments":
            report = exps.moments_experiment(n, args.reps, **kwargs)
        elif kind == "two_point":
            report = exps.two_point_experiment(n, args.reps, **kwargs)
        else:
            report = exps.reroot_experiment(n, args.reps, **kwargs)
    else:
        if grid is None:
            grid = (n,) if n is not None else exps.DEFAULT_GRID
        kwargs["allow_large"] = args.large_n
        if kind == "tv":
            report = exps.tv_experiment(grid, args.reps, **kwargs)
        elif kind == "isometry":
            out_dir = str(Path(args.out).parent) if args.out else None
            report = exps.isometry_experiment(
                grid, args.reps, args.pairs_per_rep, counterexample_dir=out_dir, **kwargs
            )
        elif kind == "delta":
            report = exps.delta_experiment(grid, args.reps, **kwargs)
        elif kind == "nj":
            report = exps.nj_experiment(grid, args.reps, **kwargs)
        else:
            raise MapLabError(f"unknown experiment {args.kind}")
    csv_path, json_path = report.write(args.out, force=args.force)
    print(f"wrote {csv_path} and {json_path}", file=sys.stderr)
    print(f"runtime: {report.runtime:.2f}s", file=sys.stderr)
    return 0


def _cmd_convert(args) -> int:
    text = Path(args.infile).read_text()
    if args.kind == "tree-to-bundle":
        tree = read_tree_text(text)
        _write_output(args.out, bundle_json(build_bundle(tree, args.eps)), args.force)
        return 0
    m, v_star = read_map_text(text)
    if args.kind == "map-to-quad":
        out = trivial_map_to_quad(m)
        _write_output(args.out, write_map_text(out), args.force)
    elif args.kind == "quad-to-map":
        out = trivial_quad_to_map(m)
        _write_output(args.out, write_map_text(out), args.force)
    else:
        _write_output(args.out, write_map_text(dual(m), v_star), args.force)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "sample":
            return _cmd_sample(args)
        if args.command == "enumerate":
            return _cmd_enumerate(args)
        if args.command == "certify":
            return _cmd_certify(args)
        if args.command == "experiment":
            return _cmd_experiment(args)
        if args.command == "convert":
            return _cmd_convert(args)
        parser.error(f"unknown command {args.command}")
    except AssertionFailure as exc:
        print(f"hard assertion failed: {exc}", file=sys.stderr)
        if exc.bundle_path:
            print(f"counterexample bundle: {exc.bundle_path}", file=sys.stderr)
        return 1
    except MapLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
