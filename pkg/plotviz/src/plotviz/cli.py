"""Command line front end: plotviz render SPEC.json [--out PATH]."""

import argparse
import sys

from . import __version__
from .artifacts import SchemaError
from .figure import load_spec, render


def build_parser():
    p = argparse.ArgumentParser(
        prog="plotviz",
        description="Render exported eigenvalue-localization artifacts "
                    "into figures.",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("render", help="render a figure spec to svg or png")
    r.add_argument("spec", help="path to a figure spec JSON file")
    r.add_argument("--out", help="override the spec's output path")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code in (0, None) else 2
    try:
        spec = load_spec(args.spec)
        if args.out:
            spec.out = args.out
        path = render(spec)
    except (OSError, SchemaError) as exc:
        print(f"plotviz: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
