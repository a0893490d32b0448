"""plot-ghost: render a ghostdiff CSV into a figure.

Exit codes: 0 success, 2 malformed input (message carries the offending
line number), 4 on output I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import PlotDataError, PlotJob, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-ghost",
        description="Render a ghostdiff profile or sweep CSV into a figure")
    parser.add_argument("profile_csv", type=Path,
                        help="profile (position_m,value) or sweep CSV")
    parser.add_argument("--overlay", type=Path, default=None,
                        help="experimental points CSV (position_m,counts)")
    parser.add_argument("--out", type=Path, default=Path("fig.png"),
                        help="output image path (default fig.png)")
    parser.add_argument("--no-peak-annotation", action="store_true")
    args = parser.parse_args(argv)

    job = PlotJob(input_csv=args.profile_csv, output_path=args.out,
                  overlay_csv=args.overlay,
                  annotate_peak=not args.no_peak_annotation)
    try:
        result = render(job)
    except PlotDataError as exc:
        print(f"plot-ghost: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"plot-ghost: I/O error: {exc}", file=sys.stderr)
        return 4
    line = f"wrote {result['output']} ({result['kind']}"
    if "fitted_slope" in result:
        line += f", fitted slope {result['fitted_slope']:.4f}"
    print(line + ")")
    return 0


if __name__ == "__main__":
    sys.exit(main())
