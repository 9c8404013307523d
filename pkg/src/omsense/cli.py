"""Command-line interface: scenario in, deterministic CSV/JSON + manifest out.

Every command reads a scenario file (or a built-in figure preset), computes
its table and writes ``<command>.csv`` (or ``.json``) plus ``manifest.json``
into the output directory.  Outputs are byte-identical across repeated runs
of the same scenario and package version: floats are serialized with
shortest round-trip ``repr`` and the manifest carries no timestamps.

Exit codes: 0 success, 1 oracle-check residual failure, 2 validation error,
3 numerical non-convergence.  Every flag has an ``OMSENSE_*`` environment
override (flag wins over environment).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .constants import TWO_PI
from .errors import ConfigError, ConvergenceError, ScenarioError
from .scenario import (PRESET_NAMES, Scenario, load_scenario, preset_scenario,
                       scenario_from_dict)
from . import scans

ENV_PREFIX = "OMSENSE_"

_COMMANDS = ("noise", "array-scan", "sensitivity", "dm-projection",
             "power-scan", "loss-scan", "oracle-check") + PRESET_NAMES

_PRESET_COMMAND = {"fig2": "array-scan", "fig3": "dm-projection",
                   "fig4": "noise", "fig5": "power-scan", "fig6": "loss-scan"}


def _env(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name, default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omsense",
        description="Quantum noise budgets and dark-matter reach for "
                    "optomechanical sensor arrays")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", default=_env("SCENARIO"),
                       help="scenario JSON path (presets embed their own)")
        p.add_argument("--out", default=_env("OUT", "omsense-out"),
                       help="output directory")
        p.add_argument("--format", choices=("csv", "json"),
                       default=_env("FORMAT"),
                       help="output format (default: scenario output.format)")
        p.add_argument("--tolerance", type=float,
                       default=_float_env("TOLERANCE"),
                       help="override the grid relative tolerance")
        p.add_argument("--strict", dest="strict", action="store_true",
                       default=_bool_env("STRICT", True),
                       help="reject unknown scenario keys (default)")
        p.add_argument("--lenient", dest="strict", action="store_false",
                       help="warn on unknown scenario keys instead of failing")
        p.add_argument("--threads", type=int,
                       default=int(_env("THREADS", "1")),
                       help="worker threads for scan points")
        p.add_argument("--gamma-convention", choices=("half", "full"),
                       default=_env("GAMMA_CONVENTION", "half"),
                       help="map quality factors to gamma = Omega/2Q (half) "
                            "or Omega/Q (full)")
        if name in ("dm-projection", "fig3"):
            p.add_argument("--overlay", action="append", default=[],
                           metavar="LABEL=PATH",
                           help="two-column (frequency_hz, value) CSV merged "
                                "as a pass-through column; repeatable")
        if name == "oracle-check":
            p.add_argument("--configs", type=int, default=200)
            p.add_argument("--freqs", type=int, default=50)
            p.add_argument("--seed", type=int, default=20240817)
            p.add_argument("--residual-tol", type=float, default=1e-9)
    return parser


def _float_env(name):
    raw = _env(name)
    return None if raw is None else float(raw)


def _bool_env(name, default):
    raw = _env(name)
    if raw is None:
        return default
    return raw.strip().lower() not in ("0", "false", "no", "")


def _fmt_cell(value) -> str:
    if isinstance(value, (bool, int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path, columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt_cell(row.get(c, "")) for c in columns))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_json(path, columns, rows):
    payload = {"columns": list(columns),
               "rows": [{c: row.get(c) for c in columns} for row in rows]}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True, default=float)
        fh.write("\n")


def _load_overlays(specs) -> dict[str, np.ndarray]:
    overlays = {}
    for spec in specs or []:
        if "=" not in spec:
            raise ScenarioError(f"--overlay expects LABEL=PATH, got {spec!r}")
        label, path = spec.split("=", 1)
        points = []
        try:
            with open(path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line or line.startswith("#"):
                        continue
                    parts = line.replace(";", ",").split(",")
                    try:
                        freq_hz, val = float(parts[0]), float(parts[1])
                    except (ValueError, IndexError):
                        continue  # header or malformed line
                    points.append((TWO_PI * freq_hz, val))
        except OSError as exc:
            raise ScenarioError(f"cannot read overlay {path}: {exc}") from exc
        if not points:
            raise ScenarioError(f"overlay {path} contains no numeric rows")
        data = np.asarray(sorted(points))
        overlays[label] = data
    return overlays


def _compute(command: str, scn: Scenario, args) -> tuple[list[str], list[dict]]:
    effective = _PRESET_COMMAND.get(command, command)
    if effective == "noise":
        rows = scans.noise_budget_table(scn)
    elif effective == "array-scan":
        rows = scans.array_scan_table(scn, threads=args.threads)
    elif effective == "sensitivity":
        rows = scans.sensitivity_report(scn, tol=args.tolerance)
    elif effective == "dm-projection":
        overlays = _load_overlays(getattr(args, "overlay", []))
        rows = scans.dm_projection_table(scn, overlays=overlays,
                                         threads=args.threads)
    elif effective == "power-scan":
        rows = scans.power_scan_table(scn, threads=args.threads)
    elif effective == "loss-scan":
        rows = scans.loss_scan_table(scn, threads=args.threads)
    else:
        raise ScenarioError(f"unhandled command {command!r}")
    columns = list(scans.COLUMNS[effective])
    if rows:
        extras = [k for k in rows[0] if k not in columns]
        columns += sorted(extras)
    return columns, rows


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    try:
        if command == "oracle-check":
            return _run_oracle_check(args)
        if command in PRESET_NAMES and args.scenario is None:
            scn = scenario_from_dict(preset_scenario(command),
                                     strict=args.strict,
                                     gamma_convention=args.gamma_convention)
        else:
            if args.scenario is None:
                raise ScenarioError(
                    f"command {command!r} requires --scenario (or OMSENSE_SCENARIO)")
            scn = load_scenario(args.scenario, strict=args.strict,
                                gamma_convention=args.gamma_convention)
        if args.tolerance is not None:
            scn.grid_tol = args.tolerance
        columns, rows = _compute(command, scn, args)
        outputs = _emit(args, command, columns, rows, scn)
        for path in outputs:
            print(path)
        return 0
    except (ScenarioError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return 3


def _emit(args, command, columns, rows, scn: Scenario | None,
          extra_manifest: dict | None = None) -> list[str]:
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    fmt = args.format or (scn.output_format if scn is not None else "csv")
    table_path = os.path.join(out_dir, f"{command}.{fmt}")
    if fmt == "csv":
        _write_csv(table_path, columns, rows)
    else:
        _write_json(table_path, columns, rows)
    manifest = {
        "command": command,
        "package": {"name": "omsense", "version": __version__,
                    "numpy": np.__version__},
        "scenario_hash": scn.scenario_hash() if scn is not None else None,
        "gamma_convention": args.gamma_convention,
        "strict": bool(args.strict),
        "tolerance_override": args.tolerance,
        "threads": args.threads,
        "defaults_used": scn.defaults_used if scn is not None else {},
        "warnings": list(scn.warnings) if scn is not None else [],
        "grid": {"span_rad_s": list(scn.grid_span),
                 "tolerance_rel": scn.grid_tol,
                 "points_per_decade": scn.grid_points_per_decade}
                if scn is not None else None,
        "columns": columns,
        "outputs": [os.path.basename(table_path)],
        "n_rows": len(rows),
    }
    if extra_manifest:
        manifest.update(extra_manifest)
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return [table_path, manifest_path]


def _run_oracle_check(args) -> int:
    rows = scans.oracle_check_table(n_configs=args.configs, n_freqs=args.freqs,
                                    seed=args.seed, threads=args.threads)
    columns = list(scans.COLUMNS["oracle-check"])
    worst = max(row["max_rel_residual"] for row in rows)
    outputs = _emit(args, "oracle-check", columns, rows, None,
                    extra_manifest={"oracle": {
                        "configs": args.configs, "freqs": args.freqs,
                        "seed": args.seed, "residual_tol": args.residual_tol,
                        "max_rel_residual": worst,
                        "passed": bool(worst < args.residual_tol)}})
    for path in outputs:
        print(path)
    print(f"max relative residual: {worst:.3e} "
          f"({'PASS' if worst < args.residual_tol else 'FAIL'} "
          f"at {args.residual_tol:g})")
    return 0 if worst < args.residual_tol else 1


if __name__ == "__main__":
    sys.exit(main())
