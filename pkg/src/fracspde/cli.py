"""Command-line entry point with JSON configs and fixed-format CSV outputs.

Commands: params, simulate, converge-time, converge-space, sphere.
Exit codes: 0 ok, 1 config parse/validation, 2 model invalid, 3 I/O.
Every file-writing command also emits a manifest.json recording the
config hash, the effective seed and a content hash per output file.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator

from . import __version__
from ._rng import derive_seed
from .experiments import (
    SpectralConfig,
    SphereConfig,
    TemporalConfig,
    sphere_experiment,
    spectral_convergence,
    temporal_convergence,
)
from .kernel import LeftPoint, Projection
from .mesh import build_geometric_mesh, build_uniform_mesh
from .noise import sample_block
from .simulate import assemble_field, simulate_paths
from .spectral import (
    ModelError,
    RangeParams,
    SpdeParams,
    eigen_rectangle,
    eigen_sphere,
    mu_lambda,
    theory_rates,
    to_range,
    to_spde,
)

_NUM = {"type": "number"}
_INT = {"type": "integer"}
_SEED = {"type": "integer", "minimum": 0}

_SPDE_KEYS = {
    "gamma": _NUM,
    "alpha": _NUM,
    "beta": _NUM,
    "kappa": _NUM,
    "r": _NUM,
    "sigma": _NUM,
    "d": {"type": "integer", "enum": [1, 2, 3]},
}
_RANGE_KEYS = {
    "nu_s": _NUM,
    "nu_t": _NUM,
    "r_s": _NUM,
    "r_t": _NUM,
    "beta_s": _NUM,
    "sigma": _NUM,
    "d": {"type": "integer", "enum": [1, 2, 3]},
}
_MODEL = {
    "type": "object",
    "properties": {
        "spde": {"type": "object", "properties": _SPDE_KEYS, "required": sorted(_SPDE_KEYS), "additionalProperties": False},
        "range": {"type": "object", "properties": _RANGE_KEYS, "required": sorted(_RANGE_KEYS), "additionalProperties": False},
    },
    "minProperties": 1,
    "maxProperties": 1,
    "additionalProperties": False,
}
_SCHEME = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["leftpoint", "projection"]},
        "theta": _NUM,
        "m": {"type": "integer", "minimum": 0, "maximum": 3},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

_SCHEMAS = {
    "params": {
        "type": "object",
        "properties": {
            "model": _MODEL,
            "declared": {"type": "object", "properties": _RANGE_KEYS, "additionalProperties": False},
            "m": {"type": "integer", "minimum": 0, "maximum": 3},
        },
        "required": ["model"],
        "additionalProperties": False,
    },
    "simulate": {
        "type": "object",
        "properties": {
            "model": _MODEL,
            "domain": {
                "type": "object",
                "properties": {"kind": {"enum": ["rectangle", "sphere"]}},
                "required": ["kind"],
                "additionalProperties": False,
            },
            "M": {"type": "integer", "minimum": 1},
            "mesh": {
                "type": "object",
                "properties": {
                    "T": _NUM,
                    "N": {"type": "integer", "minimum": 1},
                    "h": _NUM,
                    "ratio": _NUM,
                },
                "required": ["T"],
                "additionalProperties": False,
            },
            "scheme": _SCHEME,
            "output_times": {"type": "array", "items": _NUM, "minItems": 1},
            "grid": {
                "type": "object",
                "properties": {
                    "n_per_axis": {"type": "integer", "minimum": 2},
                    "n_lon": {"type": "integer", "minimum": 2},
                    "n_lat": {"type": "integer", "minimum": 2},
                },
                "additionalProperties": False,
            },
            "seed": _SEED,
            "out": {"type": "string"},
        },
        "required": ["model", "domain", "M", "mesh", "scheme", "output_times", "seed"],
        "additionalProperties": False,
    },
    "converge-time": {
        "type": "object",
        "properties": {
            "scheme": _SCHEME,
            "reference_scheme": _SCHEME,
            "gammas": {"type": "array", "items": _NUM, "minItems": 1},
            "mu": _NUM,
            "lambda": _NUM,
            "T": _NUM,
            "ref_level": {"type": "integer", "minimum": 1},
            "ladder_levels": {"type": "array", "items": _INT, "minItems": 1},
            "replicas": {"type": "integer", "minimum": 2},
            "seed": _SEED,
            "out": {"type": "string"},
        },
        "required": ["scheme", "gammas", "ref_level", "ladder_levels", "seed"],
        "additionalProperties": False,
    },
    "converge-space": {
        "type": "object",
        "properties": {
            "nu_s_values": {"type": "array", "items": _NUM, "minItems": 1},
            "nu_t": _NUM,
            "r_s": _NUM,
            "r_t": _NUM,
            "beta_s": _NUM,
            "sigma": _NUM,
            "d": {"type": "integer", "enum": [1, 2, 3]},
            "ref_log2_m": {"type": "integer", "minimum": 1},
            "ladder_log2_m": {"type": "array", "items": _INT, "minItems": 1},
            "h_level": {"type": "integer", "minimum": 0},
            "time_domain": {"enum": ["literal", "unit"]},
            "eval_time": _NUM,
            "m": {"type": "integer", "minimum": 0, "maximum": 3},
            "fit_subset": {"type": "array", "items": _INT},
            "seed": _SEED,
            "out": {"type": "string"},
        },
        "required": ["nu_s_values", "ref_log2_m", "ladder_log2_m", "seed"],
        "additionalProperties": False,
    },
    "sphere": {
        "type": "object",
        "properties": {
            "model": _MODEL,
            "M": {"type": "integer", "minimum": 1},
            "T": _NUM,
            "h": _NUM,
            "snapshot_times": {"type": "array", "items": _NUM, "minItems": 1},
            "grid": {
                "type": "object",
                "properties": {
                    "n_lon": {"type": "integer", "minimum": 2},
                    "n_lat": {"type": "integer", "minimum": 2},
                },
                "additionalProperties": False,
            },
            "trace_point": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
            "trace_time": _NUM,
            "m": {"type": "integer", "minimum": 0, "maximum": 3},
            "label": {"type": "string"},
            "seed": _SEED,
            "out": {"type": "string"},
        },
        "required": ["model", "M", "T", "h", "seed"],
        "additionalProperties": False,
    },
}


class ConfigError(ValueError):
    pass


def _load_config(path: str, command: str) -> dict:
    with open(path) as fh:
        text = fh.read()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    validator = Draft202012Validator(_SCHEMAS[command])
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        where = "/".join(str(p) for p in first.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {first.message}")
    return cfg


def _parse_model(block: dict) -> tuple[SpdeParams, str]:
    try:
        if "spde" in block:
            return SpdeParams(**block["spde"]), "spde"
        rng = dict(block["range"])
        d = rng.pop("d")
        return to_spde(RangeParams(**rng), d), "range"
    except ModelError:
        raise
    except ValueError as exc:
        raise ModelError(str(exc)) from exc


def _parse_scheme(block: dict):
    if block["kind"] == "leftpoint":
        return LeftPoint(theta=block.get("theta", 0.0))
    return Projection(m=block.get("m", 1))


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if value == 0.0:
        value = 0.0  # normalise -0.0
    return repr(value)


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _config_hash(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _write_manifest(out_dir: Path, cfg: dict, seed: int, files: list[Path]) -> None:
    entries = {}
    for f in sorted(files):
        entries[f.name] = hashlib.sha256(f.read_bytes()).hexdigest()
    manifest = {
        "artifact": "fracspde",
        "version": __version__,
        "config_sha256": _config_hash(cfg),
        "seed": int(seed),
        "files": entries,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _progress(args, msg: str) -> None:
    if not args.quiet:
        print(f"[fracspde] {msg}", file=sys.stderr)


def _resolve_out(args, cfg: dict) -> Path:
    out = args.out or cfg.get("out") or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _resolve_seed(args, cfg: dict) -> int:
    return int(args.seed) if args.seed is not None else int(cfg["seed"])


def _resolve_threads(args) -> int:
    if args.threads is not None:
        return max(1, int(args.threads))
    env = os.environ.get("FRACSPDE_THREADS")
    return max(1, int(env)) if env else 1


def cmd_params(args) -> int:
    cfg = _load_config(args.config, "params")
    sp, given = _parse_model(cfg["model"])
    lines = [
        f"gamma={sp.gamma:g} alpha={sp.alpha:g} beta={sp.beta:g} "
        f"kappa={sp.kappa:g} r={sp.r:g} sigma={sp.sigma:g} d={sp.d}"
    ]
    if not sp.existence_ok:
        lines.append(f"existence: FAILED (nu_s={sp.nu_s:g} <= 0; need beta + (2 gamma - 1) alpha > d/2)")
        print("\n".join(lines))
        return 2
    rp = to_range(sp)
    lines.append(
        f"nu_s={rp.nu_s:g} nu_t={rp.nu_t:g} beta_s={rp.beta_s:g} r_s={rp.r_s:g} r_t={rp.r_t:g}"
    )
    lines.append("existence: ok (nu_s > 0)")
    declared = cfg.get("declared", {})
    for key, value in sorted(declared.items()):
        recomputed = getattr(rp, key)
        if not math.isclose(recomputed, value, rel_tol=1e-9, abs_tol=1e-12):
            lines.append(
                f"warning: declared {key}={value:g} differs from recomputed {key}={recomputed:g}"
            )
    m = cfg.get("m", 0)
    rates = theory_rates(sp, m)
    lines.append(
        f"rates(m={m}): spatial_mse_order={rates.spatial_mse_order:g} "
        f"temporal_mse_order={rates.temporal_mse_order:g} zeta={rates.zeta:g} "
        f"cost_exponent={rates.cost_exponent:g}"
    )
    if rates.log_factor:
        lines.append("note: gamma = m + 3/2, a logarithmic factor 1 + sqrt(log(t/h)) is active")
    if given == "spde":
        back = to_spde(rp, sp.d)
        lines.append(
            f"round-trip: gamma={back.gamma:g} alpha={back.alpha:g} beta={back.beta:g} "
            f"kappa={back.kappa:g} r={back.r:g} sigma={back.sigma:g}"
        )
    print("\n".join(lines))
    return 0


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config, "simulate")
    sp, _ = _parse_model(cfg["model"])
    sp.require_existence()
    seed = _resolve_seed(args, cfg)
    out_dir = _resolve_out(args, cfg)
    scheme = _parse_scheme(cfg["scheme"])

    domain = cfg["domain"]["kind"]
    if domain == "sphere":
        basis = eigen_sphere(cfg["M"])
    else:
        basis = eigen_rectangle(sp.d, cfg["M"])
    mesh_block = cfg["mesh"]
    if "N" in mesh_block:
        n_int = mesh_block["N"]
    elif "h" in mesh_block:
        n_int = round(mesh_block["T"] / mesh_block["h"])
    else:
        raise ConfigError("mesh block needs either N or h")
    if "ratio" in mesh_block:
        mesh = build_geometric_mesh(mesh_block["T"], n_int, mesh_block["ratio"])
    else:
        mesh = build_uniform_mesh(mesh_block["T"], n_int)

    mu, lam = mu_lambda(sp, basis)
    noise = sample_block(mesh, mu, scheme.order, derive_seed(seed, "simulate"))
    _progress(args, f"simulate: M={basis.M}, N={mesh.n_intervals}, scheme={scheme.label}")
    paths = simulate_paths(sp, basis, mesh, scheme, cfg["output_times"], noise)

    files = []
    paths_csv = out_dir / "paths.csv"
    rows = [
        (p.k, t, v)
        for p in paths
        for t, v in zip(p.times, p.values)
    ]
    _write_csv(paths_csv, ["k", "t", "value"], rows)
    files.append(paths_csv)

    if "grid" in cfg:
        grid_cfg = cfg["grid"]
        if domain == "sphere":
            lon = np.linspace(-math.pi, math.pi, grid_cfg.get("n_lon", 72))
            lat = np.linspace(-math.pi / 2, math.pi / 2, grid_cfg.get("n_lat", 36))
            grid = np.stack(np.meshgrid(lon, lat, indexing="ij"), axis=-1).reshape(-1, 2)
        else:
            axes = [np.linspace(0.0, 1.0, grid_cfg.get("n_per_axis", 32))] * sp.d
            grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, sp.d)
        header = ["time"] + [f"coord{q + 1}" for q in range(grid.shape[1])] + ["value"]
        rows = []
        for tdx in range(len(cfg["output_times"])):
            snap = assemble_field(paths, basis, grid, time_index=tdx)
            for pt, val in zip(snap.points, snap.values):
                rows.append((snap.time, *pt, val))
        fields_csv = out_dir / "fields.csv"
        _write_csv(fields_csv, header, rows)
        files.append(fields_csv)

    _write_manifest(out_dir, cfg, seed, files)
    return 0


def _ladder_rows(table) -> list:
    # level k means resolution 2^-k (temporal) or 2^k basis functions (spectral)
    rows = []
    for res, err, se in zip(table.resolutions, table.errors, table.stderrs):
        level = int(round(abs(math.log2(res))))
        rows.append((level, res, err, se))
    return rows


def cmd_converge_time(args) -> int:
    cfg = _load_config(args.config, "converge-time")
    seed = _resolve_seed(args, cfg)
    out_dir = _resolve_out(args, cfg)
    scheme = _parse_scheme(cfg["scheme"])
    ref_scheme = _parse_scheme(cfg["reference_scheme"]) if "reference_scheme" in cfg else None

    def run(gamma: float):
        tc = TemporalConfig(
            gamma=gamma,
            scheme=scheme,
            mu=cfg.get("mu", 0.1),
            lam=cfg.get("lambda", 1.0),
            T=cfg.get("T", 1.0),
            ref_level=cfg["ref_level"],
            ladder_levels=tuple(cfg["ladder_levels"]),
            replicas=cfg.get("replicas", 100),
            seed=seed,
            reference_scheme=ref_scheme,
        )
        return temporal_convergence(tc)

    threads = _resolve_threads(args)
    gammas = list(cfg["gammas"])
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            tables = list(pool.map(run, gammas))
    else:
        tables = [run(g) for g in gammas]

    files = []
    slope_rows = []
    for gamma, table in zip(gammas, tables):
        _progress(args, f"converge-time gamma={gamma:g}: slope={table.slope:.4f} (theory {table.theory_slope:g})")
        ladder_csv = out_dir / f"ladder_gamma_{gamma:g}.csv"
        _write_csv(ladder_csv, ["level", "resolution", "rel_rmse", "mc_stderr"], _ladder_rows(table))
        files.append(ladder_csv)
        slope_rows.append((gamma, table.slope, table.slope_stderr, table.theory_slope))
    slopes_csv = out_dir / "slopes.csv"
    _write_csv(slopes_csv, ["gamma", "slope", "slope_stderr", "theory_slope"], slope_rows)
    files.append(slopes_csv)
    _write_manifest(out_dir, cfg, seed, files)
    return 0


def cmd_converge_space(args) -> int:
    cfg = _load_config(args.config, "converge-space")
    seed = _resolve_seed(args, cfg)
    out_dir = _resolve_out(args, cfg)

    def run(nu_s: float):
        sc = SpectralConfig(
            nu_s=nu_s,
            nu_t=cfg.get("nu_t", 1.0),
            r_s=cfg.get("r_s", 0.1),
            r_t=cfg.get("r_t", 5.0),
            beta_s=cfg.get("beta_s", 0.5),
            sigma=cfg.get("sigma", 1.0),
            d=cfg.get("d", 2),
            ref_log2_m=cfg["ref_log2_m"],
            ladder_log2_m=tuple(cfg["ladder_log2_m"]),
            h_level=cfg.get("h_level", 7),
            time_domain=cfg.get("time_domain", "literal"),
            eval_time=cfg.get("eval_time", 1.0),
            m=cfg.get("m", 1),
            seed=seed,
            fit_subset=tuple(cfg["fit_subset"]) if "fit_subset" in cfg else None,
        )
        return spectral_convergence(sc)

    threads = _resolve_threads(args)
    nu_values = list(cfg["nu_s_values"])
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            tables = list(pool.map(run, nu_values))
    else:
        tables = [run(v) for v in nu_values]

    files = []
    slope_rows = []
    for nu_s, table in zip(nu_values, tables):
        _progress(args, f"converge-space nu_s={nu_s:g}: slope={table.slope:.4f} (theory {table.theory_slope:g})")
        ladder_csv = out_dir / f"ladder_nu_s_{nu_s:g}.csv"
        _write_csv(ladder_csv, ["level", "resolution", "rel_rmse", "mc_stderr"], _ladder_rows(table))
        files.append(ladder_csv)
        slope_rows.append((nu_s, table.slope, table.slope_stderr, table.theory_slope))
    slopes_csv = out_dir / "slopes.csv"
    _write_csv(slopes_csv, ["nu_s", "slope", "slope_stderr", "theory_slope"], slope_rows)
    files.append(slopes_csv)
    _write_manifest(out_dir, cfg, seed, files)
    return 0


def cmd_sphere(args) -> int:
    cfg = _load_config(args.config, "sphere")
    sp, _ = _parse_model(cfg["model"])
    sp.require_existence()
    seed = _resolve_seed(args, cfg)
    out_dir = _resolve_out(args, cfg)
    grid_cfg = cfg.get("grid", {})
    sc = SphereConfig(
        params=sp,
        M=cfg["M"],
        T=cfg["T"],
        h=cfg["h"],
        snapshot_times=tuple(cfg.get("snapshot_times", (1.0, 2.0, 3.0, 4.0))),
        n_lon=grid_cfg.get("n_lon", 96),
        n_lat=grid_cfg.get("n_lat", 48),
        trace_point=tuple(cfg.get("trace_point", (0.0, 0.0))),
        trace_time=cfg.get("trace_time"),
        m=cfg.get("m", 1),
        seed=seed,
    )
    _progress(args, f"sphere: M={sc.M}, N={round(sc.T / sc.h)}, snapshots={sc.snapshot_times}")
    result = sphere_experiment(sc)
    suffix = f"_{cfg['label']}" if "label" in cfg else ""

    files = []
    field_rows = []
    for snap in result.snapshots:
        for pt, val in zip(snap.points, snap.values):
            field_rows.append((snap.time, pt[0], pt[1], val))
    fields_csv = out_dir / f"fields{suffix}.csv"
    _write_csv(fields_csv, ["time", "coord1", "coord2", "value"], field_rows)
    files.append(fields_csv)

    tt_csv = out_dir / f"trace_temporal{suffix}.csv"
    point = sc.trace_point
    _write_csv(
        tt_csv,
        ["time", "coord1", "coord2", "value"],
        [(t, point[0], point[1], v) for t, v in zip(result.trace_times, result.trace_values)],
    )
    files.append(tt_csv)

    trace_time = sc.trace_time if sc.trace_time is not None else sc.T
    ts_csv = out_dir / f"trace_spatial{suffix}.csv"
    _write_csv(
        ts_csv,
        ["time", "coord1", "coord2", "value"],
        [(trace_time, lon, 0.0, v) for lon, v in zip(result.trace_lons, result.trace_field)],
    )
    files.append(ts_csv)

    _write_manifest(out_dir, cfg, seed, files)
    return 0


_COMMANDS = {
    "params": cmd_params,
    "simulate": cmd_simulate,
    "converge-time": cmd_converge_time,
    "converge-space": cmd_converge_space,
    "sphere": cmd_sphere,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracspde",
        description="Spectral simulation of fractional stochastic evolution equations",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="JSON config file")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument("--out", default=None, help="output directory")
        cmd.add_argument("--threads", type=int, default=None, help="worker threads (env FRACSPDE_THREADS)")
        cmd.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
