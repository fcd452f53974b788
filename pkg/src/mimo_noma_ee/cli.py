"""Command-line entry point: ``simulate``, ``sweep`` and ``oracle-check``.

Config files are flat ``key = value`` text with ``#`` comments; keys are the
:class:`SystemConfig` field names. Power-like values accept a unit suffix.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .allocator import solve
from .channel import generate_user_geometry
from .config import FIELD_NAMES, INT_FIELDS, ConfigError, SystemConfig, convert_units, watt_to_dbm
from .experiments import DEFAULT_GRIDS, brute_force_oracle, resolve_axis, run_trials, sweep

COMMANDS = ("simulate", "sweep", "oracle-check")

# accepted unit suffixes per key, mapped to the unit stored in SystemConfig
UNIT_SUFFIXES = {
    "P_T": ({"W", "mW", "dBm"}, "W"),
    "P_c": ({"W", "mW", "dBm"}, "W"),
    "N0": ({"W/Hz", "dBm/Hz"}, "W/Hz"),
    "B": ({"Hz", "kHz"}, "Hz"),
    "D": ({"m"}, "m"),
    "d_min": ({"m"}, "m"),
    "R_T": ({"bit/s/Hz"}, "bit/s/Hz"),
    "sigma2_dB": ({"dB"}, "dB"),
}


@dataclass
class RunSpec:
    command: str
    config_path: str | None = None
    out: str = "-"
    format: str = "csv"
    overrides: list = field(default_factory=list)
    seed: int | None = None
    trials: int | None = None
    axis: str | None = None
    values: tuple | None = None
    resolution: float = 0.005
    spacing: str = "linear"


# ---------------------------------------------------------------------------
# config parsing


def parse_value(key: str, raw: str):
    """Parse one value for ``key``, honouring an optional unit suffix."""
    if key not in FIELD_NAMES:
        raise ConfigError(f"unknown config key {key!r}")
    parts = raw.split()
    if not parts or len(parts) > 2:
        raise ConfigError(f"malformed value {raw!r} for {key}")
    number = parts[0]
    try:
        value = int(number) if key in INT_FIELDS else float(number)
    except ValueError:
        raise ConfigError(f"malformed value {raw!r} for {key}") from None
    if len(parts) == 2:
        unit = parts[1]
        allowed, target = UNIT_SUFFIXES.get(key, (set(), None))
        if unit not in allowed:
            raise ConfigError(f"unit {unit!r} not accepted for {key}")
        value = convert_units(value, unit, target)
    return value


def parse_assignments(lines, where: str = "line", origin: dict | None = None) -> dict:
    """Parse ``key = value`` lines; ``origin`` (if given) records where each key was set."""
    values = {}
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{where} {lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = (s.strip() for s in text.split("=", 1))
        try:
            values[key] = parse_value(key, raw)
        except ConfigError as exc:
            raise ConfigError(f"{where} {lineno}: {exc}") from None
        if origin is not None:
            origin[key] = f"{where} {lineno}"
    return values


def parse_config(text: str, overrides=()) -> SystemConfig:
    """Build a SystemConfig from config text plus ``key=value`` overrides.

    Unset keys keep their defaults; later assignments win.
    """
    origin = {}
    values = parse_assignments(text.splitlines(), origin=origin)
    values.update(parse_assignments(overrides, where="override", origin=origin))
    try:
        return SystemConfig(**values)
    except ConfigError as exc:
        msg = str(exc)
        where = [f"{origin[k]} ({k})" for k in values if msg.startswith(k) or f" {k} " in msg]
        raise ConfigError(f"{', '.join(where)}: {msg}" if where else msg) from None


# ---------------------------------------------------------------------------
# output


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.6g}"


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(row[h]) for h in header])
    return buf.getvalue()


def to_json(config: SystemConfig, command: str, payload: dict) -> str:
    doc = {"command": command, "config": config.to_dict(), **payload}
    return json.dumps(doc, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


# ---------------------------------------------------------------------------
# commands

SIMULATE_COLUMNS = [
    "seed", "alpha", "ee_proposed", "ee_baseline", "ee_equal",
    "power_proposed_w", "power_proposed_dbm", "power_baseline_w",
    "iterations_proposed", "iterations_baseline", "converged_proposed",
    "converged_baseline", "feasible",
]
SWEEP_COLUMNS = [
    "axis_value", "ee_proposed_mean", "ee_proposed_ci95", "ee_baseline_mean",
    "ee_baseline_ci95", "ee_equal_mean", "improvement_mean", "power_consumed_dbm_mean",
    "converged_fraction", "trials",
]
ORACLE_COLUMNS = ["seed", "ee_solver", "ee_oracle", "gap_rel", "converged", "oracle_feasible"]


def simulate_rows(config: SystemConfig, trials: int, scale: float) -> list:
    rows = []
    for t in run_trials(config, trials):
        pr, bl, eq = t["proposed"], t["baseline"], t["equal"]
        rows.append({
            "seed": t.seed, "alpha": t.alpha,
            "ee_proposed": pr.ee * scale, "ee_baseline": bl.ee * scale, "ee_equal": eq.ee * scale,
            "power_proposed_w": pr.power, "power_proposed_dbm": watt_to_dbm(pr.power),
            "power_baseline_w": bl.power,
            "iterations_proposed": pr.iterations, "iterations_baseline": bl.iterations,
            "converged_proposed": pr.converged, "converged_baseline": bl.converged,
            "feasible": pr.feasible,
        })
    return rows


def sweep_rows(config: SystemConfig, axis: str, values, trials: int, scale: float) -> list:
    res = sweep(config, axis, values, trials)
    return [{
        "axis_value": r.axis_value,
        "ee_proposed_mean": r.ee_proposed.mean * scale, "ee_proposed_ci95": r.ee_proposed.ci95 * scale,
        "ee_baseline_mean": r.ee_baseline.mean * scale, "ee_baseline_ci95": r.ee_baseline.ci95 * scale,
        "ee_equal_mean": r.ee_equal.mean * scale, "improvement_mean": r.improvement.mean * scale,
        "power_consumed_dbm_mean": r.power_consumed_dbm_mean,
        "converged_fraction": r.converged_fraction, "trials": r.trials,
    } for r in res.rows]


def oracle_rows(config: SystemConfig, trials: int, resolution: float, spacing: str, scale: float) -> list:
    rows = []
    for i in range(trials):
        seed = config.seed + i
        g = generate_user_geometry(config, np.random.default_rng(seed))
        res = solve(g, config)
        orc = brute_force_oracle(g, config, resolution, spacing=spacing)
        gap = (res.ee - orc.ee) / orc.ee if orc.feasible else float("nan")
        rows.append({
            "seed": seed, "ee_solver": res.ee * scale, "ee_oracle": orc.ee * scale if orc.feasible else float("nan"),
            "gap_rel": gap, "converged": res.converged, "oracle_feasible": orc.feasible,
        })
    return rows


def execute(spec: RunSpec) -> tuple[str, int]:
    """Run one command and return (rendered output, exit status)."""
    text = ""
    if spec.config_path:
        with open(spec.config_path, encoding="utf-8") as fh:
            text = fh.read()
    overrides = list(spec.overrides)
    if spec.seed is not None:
        overrides.append(f"seed = {spec.seed}")
    config = parse_config(text, overrides)

    # Mbit/J in CSV, bit/J in JSON
    scale = 1e-6 if spec.format == "csv" else 1.0
    status = 0
    if spec.command == "simulate":
        rows = simulate_rows(config, spec.trials or 500, scale)
        header = SIMULATE_COLUMNS
        if not any(r["feasible"] for r in rows):
            status = 4
        payload = {"trials": rows}
    elif spec.command == "sweep":
        axis = resolve_axis(spec.axis or "P_c")
        values = spec.values or DEFAULT_GRIDS[axis]
        rows = sweep_rows(config, axis, values, spec.trials or 500, scale)
        header = SWEEP_COLUMNS
        payload = {"axis": axis, "rows": rows}
    elif spec.command == "oracle-check":
        rows = oracle_rows(config, spec.trials or 50, spec.resolution, spec.spacing, scale)
        header = ORACLE_COLUMNS
        if not any(r["oracle_feasible"] for r in rows):
            status = 4
        payload = {"resolution": spec.resolution, "spacing": spec.spacing, "trials": rows}
    else:
        raise ValueError(f"unknown command {spec.command!r}")

    if spec.format == "csv":
        return to_csv(header, rows), status
    return to_json(config, spec.command, payload), status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mimo-noma-ee", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", dest="config_path", metavar="PATH")
        p.add_argument("--out", default="-", metavar="PATH", help="output file, '-' for stdout")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
        if name == "sweep":
            p.add_argument("--axis", choices=("pc", "m", "pt", "rt"), default="pc")
            p.add_argument("--values", type=_csv_floats, metavar="V1,V2,...")
        if name == "oracle-check":
            p.add_argument("--resolution", type=float, default=0.005)
            p.add_argument("--spacing", choices=("linear", "log"), default="linear")
    return ap


def _csv_floats(s: str) -> tuple:
    try:
        return tuple(float(v) for v in s.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value list {s!r}") from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = RunSpec(**{k: v for k, v in vars(args).items() if k in RunSpec.__dataclass_fields__})
    t0 = time.perf_counter()
    try:
        output, status = execute(spec)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        if spec.out == "-":
            sys.stdout.write(output)
        else:
            with open(spec.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(output)
    except OSError as exc:
        print(f"cannot write {spec.out}: {exc}", file=sys.stderr)
        return 3
    if status == 4:
        print("every trial was infeasible for the configured rate floor", file=sys.stderr)
    print(f"{spec.command} finished in {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
