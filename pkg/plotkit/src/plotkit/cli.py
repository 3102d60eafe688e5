"""Standalone figure renderer: plotkit --input rows.csv --kind sweep_curves --out fig.png"""

from __future__ import annotations

import argparse
import sys

from .render import FigureRecipe, PlotkitError, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="plotkit",
        description="Render divexp CSV output into sweep curves or a simplex heat map.",
    )
    ap.add_argument("--input", action="append", required=True,
                    help="input CSV (repeat for multiple files)")
    ap.add_argument("--kind", choices=("sweep_curves", "simplex_heatmap"), required=True)
    ap.add_argument("--out", required=True, help="output image path (.png or .svg)")
    args = ap.parse_args(argv)
    try:
        result = render(FigureRecipe(tuple(args.input), args.kind, args.out))
    except PlotkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {result.path} ({result.kind}, {result.n_points} points)")
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
