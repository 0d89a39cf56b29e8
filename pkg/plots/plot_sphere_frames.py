#!/usr/bin/env python3
"""Mollweide frames of sphere fields, one image per snapshot time.

Usage: plot_sphere_frames.py --in fields.csv --out frames.png

The fields table carries (time, lon, lat, value) rows in radians; each
distinct time becomes <out stem>_t<time>.png.
"""

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from csv_io import FIELD_HEADER, SchemaError, read_table
from mollweide import project


def render_frame(lon, lat, values, time, path):
    x, y = project(lon, lat)
    fig, ax = plt.subplots(figsize=(5.6, 3.2))
    sc = ax.tricontourf(x, y, values, levels=40, cmap="viridis")
    fig.colorbar(sc, ax=ax, shrink=0.8)
    # projection outline
    edge_lat = np.linspace(-np.pi / 2.0, np.pi / 2.0, 200)
    for side in (-np.pi, np.pi):
        ex, ey = project(np.full_like(edge_lat, side), edge_lat)
        ax.plot(ex, ey, "k-", lw=0.7)
    ax.set_title(f"t = {time:g}")
    ax.set_aspect("equal")
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="inputs", nargs=1, required=True)
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)

    cols = read_table(args.inputs[0], FIELD_HEADER)
    out = Path(args.out)
    written = []
    for time in np.unique(cols["time"]):
        mask = cols["time"] == time
        path = out.with_name(f"{out.stem}_t{time:g}{out.suffix or '.png'}")
        render_frame(cols["coord1"][mask], cols["coord2"][mask], cols["value"][mask], time, path)
        written.append(str(path))
    print("\n".join(written))
    return 0


if __name__ == "__main__":
    try:
        sys.exit(main())
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(1)
