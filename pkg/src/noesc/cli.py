"""Experiment front end.

``noesc run`` executes one seeking experiment from a JSON config (or a
named preset) and writes ``iterates.csv``, ``trajectory.csv`` and
``summary.json``; ``noesc compare`` runs two configs and reports
per-window reference-shape and state-excursion metrics side by side.
"""

import argparse
import copy
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .esc import BvpConfig, EscLog, run_esc
from .numerics import IntegratorConfig
from .optimizer import ConstraintSet, PerformanceOracle, PgdConfig, rosenbrock_oracle
from .plant import example_plant
from .trajectory import SaturationMap

PRESETS = {
    # The stock benchmark study: example plant, banana-valley performance,
    # output box |y| <= 1.5 relaxed to asymptotic bounds (-2, 2).
    "s4-default": {
        "plant": {"name": "example", "rho": 1.0, "x0": [0.8, 3.0]},
        "optimizer": {
            "step": 0.002,
            "eps0": 0.01,
            "max_iter": 5000,
            "grad_mode": "analytic",
            "fd_step": 1e-6,
        },
        "constraints": {"x1_min": -1.5, "x1_max": 1.5},
        "trajectory": {
            "y_min": -1.5,
            "y_max": 1.5,
            "delta_y": 0.5,
            "rho_sig": 4.0,
            "gamma": [0.01],
            "delta_k": 1.0,
        },
        "bvp": {"tol": 1e-8, "max_newton_iter": 25, "p_init": 1.0},
        "sim": {"rk4_step": 0.001, "store_every": 10},
        "output": {"dir": "out"},
    }
}

_SECTIONS = ("plant", "optimizer", "constraints", "trajectory", "bvp", "sim", "output")


def _fail(path, message):
    raise ConfigError(f"{path}: {message}")


def _require(section, key, value, kind, path, positive=False):
    if value is None:
        _fail(f"{path}.{key}", "missing required field")
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            _fail(f"{path}.{key}", f"expected a number, got {value!r}")
        value = float(value)
    elif kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            _fail(f"{path}.{key}", f"expected an integer, got {value!r}")
    if positive and not value > 0:
        _fail(f"{path}.{key}", f"must be strictly positive, got {value!r}")
    return value


def validate_config(cfg: dict) -> dict:
    """Normalize and type-check a raw config dict; raises ConfigError."""
    out = {}
    for section in _SECTIONS:
        raw = cfg.get(section, {})
        if not isinstance(raw, dict):
            _fail(section, "expected a table of key/value pairs")
        out[section] = dict(raw)
    unknown = set(cfg) - set(_SECTIONS)
    if unknown:
        _fail(sorted(unknown)[0], "unknown config section")

    p = out["plant"]
    if p.get("name", "example") != "example":
        _fail("plant.name", f"unknown plant {p.get('name')!r}")
    p["name"] = "example"
    p["rho"] = _require("plant", "rho", p.get("rho", 1.0), float, "plant")
    if p["rho"] == 0.0:
        _fail("plant.rho", "must be nonzero")
    x0 = p.get("x0", [0.8, 3.0])
    if not (isinstance(x0, list) and len(x0) == 2):
        _fail("plant.x0", "expected a list of two numbers")
    p["x0"] = [float(v) for v in x0]

    o = out["optimizer"]
    o["step"] = _require("optimizer", "step", o.get("step"), float, "optimizer", positive=True)
    o["eps0"] = _require("optimizer", "eps0", o.get("eps0"), float, "optimizer", positive=True)
    o["max_iter"] = _require("optimizer", "max_iter", o.get("max_iter", 5000), int, "optimizer", positive=True)
    o["grad_mode"] = o.get("grad_mode", "analytic")
    if o["grad_mode"] not in ("analytic", "fd"):
        _fail("optimizer.grad_mode", f"expected 'analytic' or 'fd', got {o['grad_mode']!r}")
    o["fd_step"] = _require("optimizer", "fd_step", o.get("fd_step", 1e-6), float, "optimizer", positive=True)

    c = out["constraints"]
    for key in ("x1_min", "x1_max", "x2_min", "x2_max"):
        if c.get(key) is not None:
            c[key] = _require("constraints", key, c[key], float, "constraints")
        else:
            c[key] = None

    t = out["trajectory"]
    t["y_min"] = _require("trajectory", "y_min", t.get("y_min"), float, "trajectory")
    t["y_max"] = _require("trajectory", "y_max", t.get("y_max"), float, "trajectory")
    if not t["y_min"] < t["y_max"]:
        _fail("trajectory.y_min", "must satisfy y_min < y_max")
    t["delta_y"] = _require("trajectory", "delta_y", t.get("delta_y", 0.5), float, "trajectory", positive=True)
    if t.get("rho_sig") is not None:
        t["rho_sig"] = _require("trajectory", "rho_sig", t["rho_sig"], float, "trajectory", positive=True)
    else:
        t["rho_sig"] = None
    gamma = t.get("gamma", [0.01])
    if isinstance(gamma, (int, float)):
        gamma = [gamma]
    if not (isinstance(gamma, list) and gamma and all(isinstance(v, (int, float)) and v > 0 for v in gamma)):
        _fail("trajectory.gamma", "expected a list of positive numbers")
    t["gamma"] = [float(v) for v in gamma]
    t["delta_k"] = _require("trajectory", "delta_k", t.get("delta_k", 1.0), float, "trajectory", positive=True)

    b = out["bvp"]
    b["tol"] = _require("bvp", "tol", b.get("tol", 1e-8), float, "bvp", positive=True)
    b["max_newton_iter"] = _require("bvp", "max_newton_iter", b.get("max_newton_iter", 25), int, "bvp", positive=True)
    b["p_init"] = _require("bvp", "p_init", b.get("p_init", 1.0), float, "bvp")

    s = out["sim"]
    s["rk4_step"] = _require(
        "sim", "rk4_step", s.get("rk4_step", t["delta_k"] / 1000.0), float, "sim", positive=True
    )
    s["store_every"] = _require("sim", "store_every", s.get("store_every", 10), int, "sim", positive=True)

    out["output"]["dir"] = str(out["output"].get("dir", "out"))
    return out


def _deep_update(base: dict, override: dict) -> dict:
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value
    return base


def load_config(path=None, preset=None, overrides=()) -> dict:
    """Assemble a validated config from file and/or preset plus overrides."""
    cfg = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r} (available: {', '.join(sorted(PRESETS))})")
        cfg = copy.deepcopy(PRESETS[preset])
    if path is not None:
        try:
            with open(path) as fh:
                loaded = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}:1:1: top level must be an object")
        _deep_update(cfg, loaded)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected key.path=value")
        key, _, raw = item.partition("=")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--set {key}: {part} is not a section")
        node[parts[-1]] = value
    if not cfg:
        raise ConfigError("no configuration given (use --config and/or --preset)")
    return validate_config(cfg)


def _build_oracle(cfg: dict) -> PerformanceOracle:
    oracle = rosenbrock_oracle()
    if cfg["optimizer"]["grad_mode"] == "fd":
        return PerformanceOracle(eval=oracle.eval, grad=None, fd_step=cfg["optimizer"]["fd_step"])
    return oracle


def run_experiment(cfg: dict) -> EscLog:
    """Execute one experiment described by a validated config."""
    plant = example_plant(cfg["plant"]["rho"])
    oracle = _build_oracle(cfg)
    c = cfg["constraints"]
    cset = ConstraintSet.box([c["x1_min"], c["x2_min"]], [c["x1_max"], c["x2_max"]])
    o = cfg["optimizer"]
    pgd = PgdConfig(step=o["step"], eps0=o["eps0"], max_iter=o["max_iter"])
    t = cfg["trajectory"]
    sat = SaturationMap.from_output_bounds(t["y_min"], t["y_max"], t["delta_y"], t["rho_sig"])
    b = cfg["bvp"]
    bvp = BvpConfig(tol=b["tol"], max_iter=b["max_newton_iter"], p_init=b["p_init"])
    sim = IntegratorConfig(step=cfg["sim"]["rk4_step"], store_every=cfg["sim"]["store_every"])
    return run_esc(
        plant,
        oracle,
        cset,
        pgd,
        sat,
        t["gamma"],
        t["delta_k"],
        bvp,
        sim,
        cfg["plant"]["x0"],
        config=cfg,
    )


def _fmt(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    return format(float(value), ".17g")


def write_artifacts(log: EscLog, out_dir: Path) -> dict:
    """Write iterates.csv, trajectory.csv and summary.json; returns summary."""
    out_dir.mkdir(parents=True, exist_ok=True)
    n = log.dense_x.shape[1] if log.dense_x.size else len(log.iterates[0].x)
    m = len(log.iterates[0].p_star) if log.iterates[0].p_star is not None else (
        len(log.iterates[-1].p_star) if len(log.iterates) > 1 and log.iterates[-1].p_star is not None else 1
    )

    with open(out_dir / "iterates.csv", "w") as fh:
        cols = (
            ["k"]
            + [f"x{i + 1}" for i in range(n)]
            + ["J", "grad_norm"]
            + [f"p{i + 1}" for i in range(m)]
            + ["bvp_residual", "tracking_error"]
        )
        fh.write(",".join(cols) + "\n")
        for rec in log.iterates:
            p = list(rec.p_star) if rec.p_star is not None else [math.nan] * m
            row = (
                [str(rec.k)]
                + [_fmt(v) for v in rec.x]
                + [_fmt(rec.value), _fmt(rec.grad_norm)]
                + [_fmt(v) for v in p]
                + [_fmt(rec.bvp_residual), _fmt(rec.tracking_error)]
            )
            fh.write(",".join(row) + "\n")

    with open(out_dir / "trajectory.csv", "w") as fh:
        cols = ["t"] + [f"x{i + 1}" for i in range(n)] + ["u", "y", "J"]
        fh.write(",".join(cols) + "\n")
        for i in range(len(log.dense_t)):
            row = (
                [_fmt(log.dense_t[i])]
                + [_fmt(v) for v in log.dense_x[i]]
                + [_fmt(log.dense_u[i]), _fmt(log.dense_y[i]), _fmt(log.dense_value[i])]
            )
            fh.write(",".join(row) + "\n")

    summary = {
        "iterations": log.iteration_count,
        "final_state": [float(v) for v in log.final_state],
        "final_value": log.iterates[-1].value,
        "max_abs_y": float(np.max(np.abs(log.dense_y))) if log.dense_y.size else abs(log.iterates[0].x[0]),
        "max_tracking_error": max(
            (rec.tracking_error for rec in log.iterates[1:]), default=math.nan
        ),
        "termination": log.termination,
        "backend": log.backend,
        "config": log.config,
    }
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def _metrics(log: EscLog) -> dict:
    first5 = [w.max_abs_eta for w in log.windows[:5]]
    return {
        "iterations": log.iteration_count,
        "termination": log.termination,
        "ref_chord_dev": [w.ref_chord_dev for w in log.windows],
        "first_window_chord_dev": log.windows[0].ref_chord_dev if log.windows else None,
        "max_abs_x1": float(np.max(np.abs(log.dense_x[:, 0]))) if log.dense_x.size else None,
        "max_abs_eta_first5": max(first5) if first5 else None,
    }


def _out_dir(cfg: dict, explicit=None) -> Path:
    if explicit is not None:
        return Path(explicit)
    env = os.environ.get("NOESC_OUT")
    return Path(env) if env else Path(cfg["output"]["dir"])


def cmd_run(args) -> int:
    cfg = load_config(args.config, args.preset, args.set or ())
    log = run_experiment(cfg)
    summary = write_artifacts(log, _out_dir(cfg, args.out))
    print(
        f"{summary['termination']}: {summary['iterations']} iterations, "
        f"final state {summary['final_state']}, J={summary['final_value']:.6g}"
    )
    return 0 if log.clean else 2

def cmd_compare(args) -> int:
    cfg_a = load_config(args.a, args.preset_a, args.set_a or ())
    cfg_b = load_config(args.b, args.preset_b, args.set_b or ())
    out = Path(args.out)
    log_a = run_experiment(cfg_a)
    log_b = run_experiment(cfg_b)
    write_artifacts(log_a, out / "a")
    write_artifacts(log_b, out / "b")
    report = {
        "a": _metrics(log_a),
        "b": _metrics(log_b),
        "first_window_chord_dev_diff": (
            None
            if not (log_a.windows and log_b.windows)
            else log_b.windows[0].ref_chord_dev - log_a.windows[0].ref_chord_dev
        ),
    }
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "compare.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"compare report written to {out / 'compare.json'}")
    return 0 if log_a.clean and log_b.clean else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noesc",
        description="Numerical-optimization extremum seeking for output-constrained plants.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment and write CSV/JSON artifacts")
    p_run.add_argument("--config", help="JSON config file")
    p_run.add_argument("--preset", help="named preset, e.g. s4-default")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config field")
    p_run.add_argument("--out", help="output directory (overrides config and NOESC_OUT)")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="run two configs and compare window metrics")
    p_cmp.add_argument("--a", help="JSON config for run A")
    p_cmp.add_argument("--b", help="JSON config for run B")
    p_cmp.add_argument("--preset-a", help="preset for run A")
    p_cmp.add_argument("--preset-b", help="preset for run B")
    p_cmp.add_argument("--set-a", action="append", metavar="KEY=VALUE")
    p_cmp.add_argument("--set-b", action="append", metavar="KEY=VALUE")
    p_cmp.add_argument("--out", required=True, help="report directory")
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
