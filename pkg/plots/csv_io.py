"""Schema-checked readers for the harness CSV outputs."""

import csv

import numpy as np

LADDER_HEADER = ["level", "resolution", "rel_rmse", "mc_stderr"]
FIELD_HEADER = ["time", "coord1", "coord2", "value"]


class SchemaError(ValueError):
    pass


def read_table(path, expected_header=None):
    """Read a CSV into a dict of float columns, verifying the header."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if expected_header is not None and header != expected_header:
            raise SchemaError(f"{path}: header {header} != expected {expected_header}")
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    cols = {name: np.array([float(row[i]) for row in rows]) for i, name in enumerate(header)}
    return cols


def read_slopes(path):
    """Slopes table; the key column is either gamma or nu_s."""
    with open(path, newline="") as fh:
        header = next(csv.reader(fh))
    if header[:1] not in (["gamma"], ["nu_s"]) or header[1:] != ["slope", "slope_stderr", "theory_slope"]:
        raise SchemaError(f"{path}: unexpected slopes header {header}")
    return header[0], read_table(path)
