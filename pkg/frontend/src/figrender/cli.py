"""Command-line front end: render --kind sweep|cdf|bars --in file.csv --out file.png"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import PlotSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="render", description=__doc__)
    parser.add_argument("--kind", required=True, choices=("sweep", "cdf", "bars"))
    parser.add_argument("--in", dest="input_csv", required=True, help="experiment CSV file")
    parser.add_argument("--out", dest="output", required=True, help="image file to write")
    parser.add_argument("--title", default="", help="optional figure title")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        input_csv=Path(args.input_csv),
        kind=args.kind,
        output_path=Path(args.output),
        title=args.title,
    )
    try:
        out = render(spec)
    except (SchemaError, OSError) as exc:
        print(f"render: error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
