"""Batch figure rendering from maplab experiment CSVs.

Either ``maplab-plots --spec spec.json`` (a FigureSpec document) or one
in-line flag set per figure: ``maplab-plots --kind tv --in tv.csv --out
tv.png --logx --logy``.  The render manifest (series checksums) is printed to
stdout as JSON.
"""

from __future__ import annotations

import argparse
import json
import sys

from .figures import KINDS, FigureSpec, SchemaMismatch, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maplab-plots", description=__doc__)
    parser.add_argument("--spec", help="JSON FigureSpec document")
    parser.add_argument("--kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", action="append", default=[],
                        help="input CSV (repeatable)")
    parser.add_argument("--out", help="output image path")
    parser.add_argument("--logx", action="store_true")
    parser.add_argument("--logy", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.spec:
        spec = FigureSpec.from_json(args.spec)
    else:
        if not (args.kind and args.inputs and args.out):
            parser.error("need --spec or all of --kind, --in, --out")
        spec = FigureSpec(inputs=args.inputs, kind=args.kind, out=args.out,
                          logx=args.logx, logy=args.logy)
    try:
        manifest = render(spec)
    except SchemaMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    json.dump(manifest, sys.stdout, indent=2, sort_keys=True)
    print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
