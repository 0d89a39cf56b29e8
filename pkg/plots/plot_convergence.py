#!/usr/bin/env python3
"""Log-log convergence panel: errors, regression line, theoretical guide.

Usage:
  plot_convergence.py --in ladder.csv [ladder2.csv ...] --out fig.png
                      [--slopes slopes.csv --keys g1 g2 ...] [--labels ...]

The regression line fits the plotted points of each ladder; the
theoretical-order guide (looked up in the slopes table by the gamma or
nu_s key of each ladder) emanates from the leftmost point. Both axes
are log10.
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from csv_io import LADDER_HEADER, SchemaError, read_slopes, read_table


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--slopes", default=None, help="slopes.csv with theory orders")
    parser.add_argument("--keys", nargs="*", type=float, default=None,
                        help="gamma / nu_s value of each input, for the theory lookup")
    parser.add_argument("--labels", nargs="*", default=None)
    args = parser.parse_args(argv)

    theory = {}
    if args.slopes:
        key_name, cols = read_slopes(args.slopes)
        theory = dict(zip(cols[key_name], cols["theory_slope"]))

    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    for idx, path in enumerate(args.inputs):
        cols = read_table(path, LADDER_HEADER)
        if cols["resolution"].size < 2:
            print(f"error: {path} has fewer than 2 ladder rows", file=sys.stderr)
            return 1
        logx = np.log10(cols["resolution"])
        logy = np.log10(cols["rel_rmse"])
        label = args.labels[idx] if args.labels and idx < len(args.labels) else path
        pts = ax.plot(logx, logy, "o", label=label)
        color = pts[0].get_color()
        slope, intercept = np.polyfit(logx, logy, 1)
        grid = np.linspace(logx.min(), logx.max(), 50)
        ax.plot(grid, slope * grid + intercept, "-", color=color, alpha=0.8)
        key = args.keys[idx] if args.keys and idx < len(args.keys) else None
        if key is not None and theory:
            match = min(theory, key=lambda k: abs(k - key))
            anchor = int(np.argmin(logx))
            ax.plot(
                grid,
                theory[match] * (grid - logx[anchor]) + logy[anchor],
                "--",
                color=color,
                alpha=0.6,
            )
    ax.set_xlabel("log10 resolution")
    ax.set_ylabel("log10 relative error")
    ax.legend(fontsize=7)
    ax.set_title("convergence (dots: observed, solid: regression, dashed: theory)", fontsize=8)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    plt.close(fig)
    return 0


if __name__ == "__main__":
    try:
        sys.exit(main())
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(1)
