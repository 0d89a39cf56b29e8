#!/usr/bin/env python3
"""Fitted convergence orders against the theoretical curve.

Usage: plot_rates.py --in slopes.csv --out fig.png

Plots the regression slope (with its standard error) for every gamma or
nu_s row of the slopes table, next to the theoretical order.
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from csv_io import SchemaError, read_slopes


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="inputs", nargs=1, required=True)
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)

    key, cols = read_slopes(args.inputs[0])
    order = np.argsort(cols[key])
    x = cols[key][order]

    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    ax.errorbar(
        x,
        cols["slope"][order],
        yerr=cols["slope_stderr"][order],
        fmt="ko",
        capsize=3,
        label="observed order",
    )
    ax.plot(x, cols["theory_slope"][order], "b-", label="theoretical order")
    ax.set_xlabel(key)
    ax.set_ylabel("convergence order")
    ax.legend()
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
