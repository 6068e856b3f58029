"""Command line: sqg-plots <report.json|trajectory.csv>... --kind K --out PATH."""

import argparse
import sys

from .figures import FIGURE_KINDS, FigureSpec, SchemaError, render


def build_parser():
    ap = argparse.ArgumentParser(
        prog="sqg-plots",
        description="Render figures from sqgsim CSV/JSON artifacts.",
    )
    ap.add_argument("inputs", nargs="+", help="trajectory/spectrum CSV or report JSON files")
    ap.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    ap.add_argument("--out", required=True, help="output image path (PNG)")
    ap.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        info = render(FigureSpec(inputs=tuple(args.inputs), kind=args.kind, out_path=args.out))
    except SchemaError as e:
        print(f"schema error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return 2
    if not args.quiet:
        notes = f" ({'; '.join(info['annotations'])})" if info["annotations"] else ""
        print(f"{args.kind} -> {info['path']}{notes}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
