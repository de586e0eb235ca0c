"""render_figures: plot a coopscatter run directory.

    render_figures --in DIR [--figs fig1,fig4] [--format png] [--out DIR]

Images are written alongside the CSVs unless --out redirects them.
Exit code 0 when every requested figure rendered, nonzero otherwise.
"""

from __future__ import annotations

import argparse
import sys

from .render import RenderError, render
from .specs import FIGURES


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render_figures",
        description="render the standard plots from coopscatter CSV outputs",
    )
    parser.add_argument("--in", dest="in_dir", required=True, help="run directory with the CSVs")
    parser.add_argument(
        "--figs",
        default="all",
        help=f"comma-separated figure ids (default: all of {','.join(sorted(FIGURES))})",
    )
    parser.add_argument("--format", default="png", choices=("png", "pdf", "svg"))
    parser.add_argument("--out", help="directory for the images (default: same as --in)")
    args = parser.parse_args(argv)

    if args.figs == "all":
        fig_ids = sorted(FIGURES)
    else:
        fig_ids = [f.strip() for f in args.figs.split(",") if f.strip()]
    unknown = [f for f in fig_ids if f not in FIGURES]
    if unknown:
        print(f"error: unknown figure id(s): {', '.join(unknown)}", file=sys.stderr)
        return 2

    code = 0
    for fig_id in fig_ids:
        try:
            result = render(FIGURES[fig_id], args.in_dir, args.out, args.format)
        except RenderError as exc:
            print(f"error: {fig_id}: {exc}", file=sys.stderr)
            code = 1
        else:
            print(f"{fig_id}: wrote {result.path}")
    return code


if __name__ == "__main__":
    sys.exit(main())
