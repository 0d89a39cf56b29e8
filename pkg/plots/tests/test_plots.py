"""Figure regeneration from harness CSVs (no mathematics recomputed)."""

import json
import math

import numpy as np
import pytest

import plot_convergence
import plot_rates
import plot_sphere_frames
import plot_traces
from csv_io import SchemaError, read_slopes, read_table
from mollweide import auxiliary_angle, project


# ---------------------------------------------------------------- mollweide

def test_mollweide_solves_defining_equation():
    lat = np.linspace(-np.pi / 2 + 1e-6, np.pi / 2 - 1e-6, 201)
    theta = auxiliary_angle(lat)
    resid = 2.0 * theta + np.sin(2.0 * theta) - np.pi * np.sin(lat)
    assert np.abs(resid).max() < 1e-10


def test_mollweide_landmarks():
    x, y = project(np.array([0.0, np.pi, 0.0]), np.array([0.0, 0.0, np.pi / 2]))
    assert x[0] == pytest.approx(0.0, abs=1e-12)
    assert y[0] == pytest.approx(0.0, abs=1e-12)
    # equator right edge at x = 2 sqrt(2), pole at y = sqrt(2)
    assert x[1] == pytest.approx(2.0 * math.sqrt(2.0), rel=1e-12)
    assert y[2] == pytest.approx(math.sqrt(2.0), rel=1e-12)


# ------------------------------------------------------------- file fixtures

def write_ladder(path, slope=2.0):
    hs = [2.0**-k for k in (4, 5, 6, 7)]
    lines = ["level,resolution,rel_rmse,mc_stderr"]
    for k, h in zip((4, 5, 6, 7), hs):
        lines.append(f"{k},{h!r},{h**slope!r},0.0")
    path.write_text("\n".join(lines) + "\n")


def write_slopes(path, key="gamma"):
    lines = [f"{key},slope,slope_stderr,theory_slope", "0.8,0.31,0.02,0.3", "1.2,0.72,0.02,0.7"]
    path.write_text("\n".join(lines) + "\n")


def write_fields(path, times=(1.0, 2.0)):
    lons = np.linspace(-np.pi, np.pi, 12)
    lats = np.linspace(-np.pi / 2, np.pi / 2, 6)
    lines = ["time,coord1,coord2,value"]
    for t in times:
        for lon in lons:
            for lat in lats:
                lines.append(f"{t!r},{float(lon)!r},{float(lat)!r},{math.sin(lon) * math.cos(lat) * t!r}")
    path.write_text("\n".join(lines) + "\n")


# ------------------------------------------------------------------ schemas

def test_read_table_rejects_bad_header(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(SchemaError):
        read_table(bad, ["level", "resolution", "rel_rmse", "mc_stderr"])


def test_read_table_rejects_empty(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaError):
        read_table(empty)
    header_only = tmp_path / "h.csv"
    header_only.write_text("level,resolution,rel_rmse,mc_stderr\n")
    with pytest.raises(SchemaError):
        read_table(header_only)


def test_read_slopes_accepts_both_keys(tmp_path):
    g = tmp_path / "g.csv"
    write_slopes(g, "gamma")
    assert read_slopes(g)[0] == "gamma"
    n = tmp_path / "n.csv"
    write_slopes(n, "nu_s")
    assert read_slopes(n)[0] == "nu_s"


# ------------------------------------------------------------- convergence

def test_convergence_plot_from_exact_line(tmp_path):
    ladder = tmp_path / "ladder.csv"
    write_ladder(ladder, slope=2.0)
    out = tmp_path / "fig.png"
    rc = plot_convergence.main(["--in", str(ladder), "--out", str(out)])
    assert rc == 0
    assert out.exists() and out.stat().st_size > 0
    # regression on an exact line reproduces the slope
    cols = read_table(ladder)
    slope = np.polyfit(np.log10(cols["resolution"]), np.log10(cols["rel_rmse"]), 1)[0]
    assert slope == pytest.approx(2.0, abs=1e-12)


def test_convergence_plot_with_theory_guide(tmp_path):
    ladder = tmp_path / "ladder.csv"
    write_ladder(ladder)
    slopes = tmp_path / "slopes.csv"
    write_slopes(slopes)
    out = tmp_path / "fig.png"
    rc = plot_convergence.main(
        ["--in", str(ladder), "--out", str(out), "--slopes", str(slopes), "--keys", "0.8", "--labels", "gamma=0.8"]
    )
    assert rc == 0 and out.exists()


def test_convergence_plot_single_row_fails(tmp_path):
    ladder = tmp_path / "one.csv"
    ladder.write_text("level,resolution,rel_rmse,mc_stderr\n4,0.0625,0.1,0.0\n")
    rc = plot_convergence.main(["--in", str(ladder), "--out", str(tmp_path / "x.png")])
    assert rc != 0


def test_convergence_plot_empty_csv_fails(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaError):
        plot_convergence.main(["--in", str(empty), "--out", str(tmp_path / "x.png")])


# -------------------------------------------------------------------- rates

def test_rates_plot(tmp_path):
    slopes = tmp_path / "slopes.csv"
    write_slopes(slopes)
    out = tmp_path / "rates.png"
    assert plot_rates.main(["--in", str(slopes), "--out", str(out)]) == 0
    assert out.exists() and out.stat().st_size > 0


def test_rates_plot_schema_mismatch(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("foo,bar\n1,2\n")
    with pytest.raises(SchemaError):
        plot_rates.main(["--in", str(bad), "--out", str(tmp_path / "x.png")])


# ------------------------------------------------------------ sphere frames

def test_sphere_frames_one_per_time(tmp_path):
    fields = tmp_path / "fields.csv"
    write_fields(fields, times=(1.0, 2.0, 3.0, 4.0))
    out = tmp_path / "frame.png"
    assert plot_sphere_frames.main(["--in", str(fields), "--out", str(out)]) == 0
    for t in (1, 2, 3, 4):
        assert (tmp_path / f"frame_t{t}.png").exists()


def test_sphere_frames_constant_field(tmp_path):
    lons = np.linspace(-np.pi, np.pi, 10)
    lats = np.linspace(-np.pi / 2, np.pi / 2, 5)
    lines = ["time,coord1,coord2,value"]
    for lon in lons:
        for lat in lats:
            lines.append(f"1.0,{float(lon)!r},{float(lat)!r},0.5")
    fields = tmp_path / "const.csv"
    fields.write_text("\n".join(lines) + "\n")
    assert plot_sphere_frames.main(["--in", str(fields), "--out", str(tmp_path / "c.png")]) == 0
    assert (tmp_path / "c_t1.png").exists()


# ------------------------------------------------------------------- traces

def test_traces_rows(tmp_path):
    files = []
    for row in range(4):
        t = tmp_path / f"temporal{row}.csv"
        s = tmp_path / f"spatial{row}.csv"
        t.write_text(
            "time,coord1,coord2,value\n"
            + "\n".join(f"{i * 0.1!r},0.0,0.0,{math.sin(i * 0.1 * (row + 1))!r}" for i in range(50))
            + "\n"
        )
        s.write_text(
            "time,coord1,coord2,value\n"
            + "\n".join(f"5.0,{float(lon)!r},0.0,{math.cos(lon * (row + 1))!r}" for lon in np.linspace(-np.pi, np.pi, 60))
            + "\n"
        )
        files += [str(t), str(s)]
    out = tmp_path / "traces.png"
    rc = plot_traces.main(["--in", *files, "--out", str(out), "--labels", "a", "b", "c", "d"])
    assert rc == 0 and out.exists()


def test_traces_rejects_odd_inputs(tmp_path):
    t = tmp_path / "t.csv"
    t.write_text("time,coord1,coord2,value\n0.0,0.0,0.0,0.0\n")
    assert plot_traces.main(["--in", str(t), "--out", str(tmp_path / "x.png")]) != 0


# ------------------------------------------------- end-to-end with the CLI

def test_end_to_end_from_harness_outputs(tmp_path):
    # drive the primary through its CLI, then regenerate every figure kind
    from fracspde.cli import main as fracspde_main

    ct_cfg = tmp_path / "ct.json"
    ct_cfg.write_text(
        json.dumps(
            {
                "scheme": {"kind": "leftpoint", "theta": 0.0},
                "gammas": [0.8, 1.2],
                "mu": 0.1,
                "ref_level": 10,
                "ladder_levels": [6, 7, 8],
                "replicas": 10,
                "seed": 1,
            }
        )
    )
    ct_out = tmp_path / "ct"
    assert fracspde_main(["converge-time", "--config", str(ct_cfg), "--out", str(ct_out), "--quiet"]) == 0

    sphere_cfg = tmp_path / "sp.json"
    sphere_cfg.write_text(
        json.dumps(
            {
                "model": {
                    "spde": {"gamma": 1.5, "alpha": 0.5, "beta": 1.0, "kappa": 2.828, "r": 10.0, "sigma": 10.0, "d": 2}
                },
                "M": 16,
                "T": 2.0,
                "h": 0.5,
                "snapshot_times": [1.0, 2.0],
                "grid": {"n_lon": 10, "n_lat": 5},
                "m": 1,
                "seed": 2,
            }
        )
    )
    sp_out = tmp_path / "sp"
    assert fracspde_main(["sphere", "--config", str(sphere_cfg), "--out", str(sp_out), "--quiet"]) == 0

    figs = tmp_path / "figs"
    figs.mkdir()
    assert (
        plot_convergence.main(
            [
                "--in",
                str(ct_out / "ladder_gamma_0.8.csv"),
                str(ct_out / "ladder_gamma_1.2.csv"),
                "--out",
                str(figs / "convergence.png"),
                "--slopes",
                str(ct_out / "slopes.csv"),
                "--keys",
                "0.8",
                "1.2",
            ]
        )
        == 0
    )
    assert plot_rates.main(["--in", str(ct_out / "slopes.csv"), "--out", str(figs / "rates.png")]) == 0
    assert plot_sphere_frames.main(["--in", str(sp_out / "fields.csv"), "--out", str(figs / "frame.png")]) == 0
    assert (
        plot_traces.main(
            [
                "--in",
                str(sp_out / "trace_temporal.csv"),
                str(sp_out / "trace_spatial.csv"),
                "--out",
                str(figs / "traces.png"),
            ]
        )
        == 0
    )
    assert (figs / "convergence.png").exists()
    assert (figs / "rates.png").exists()
    assert (figs / "frame_t1.png").exists() and (figs / "frame_t2.png").exists()
    assert (figs / "traces.png").exists()
