#!/usr/bin/env python3
"""Temporal and spatial trace rows for smoothness comparison.

Usage:
  plot_traces.py --in temporal1.csv spatial1.csv [temporal2.csv spatial2.csv ...]
                 --out fig.png [--labels row1 row2 ...]

Each input pair becomes one row: the trace at a fixed point over time
(left) and the trace along the equator at a fixed time (right).
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from csv_io import FIELD_HEADER, SchemaError, read_table


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--labels", nargs="*", default=None)
    args = parser.parse_args(argv)

    if len(args.inputs) % 2 != 0:
        print("error: inputs must be (temporal, spatial) pairs", file=sys.stderr)
        return 1
    pairs = [(args.inputs[i], args.inputs[i + 1]) for i in range(0, len(args.inputs), 2)]

    fig, axes = plt.subplots(len(pairs), 2, figsize=(8.0, 2.2 * len(pairs)), squeeze=False)
    for row, (temporal, spatial) in enumerate(pairs):
        tcols = read_table(temporal, FIELD_HEADER)
        scols = read_table(spatial, FIELD_HEADER)
        axes[row][0].plot(tcols["time"], tcols["value"], "k-", lw=0.8)
        axes[row][0].set_xlabel("t")
        axes[row][1].plot(scols["coord1"], scols["value"], "k-", lw=0.8)
        axes[row][1].set_xlabel("longitude")
        if args.labels and row < len(args.labels):
            axes[row][0].set_ylabel(args.labels[row])
    axes[0][0].set_title("temporal trace")
    axes[0][1].set_title("spatial trace")
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
