"""Command-line entry point: ``simulate``, ``run`` and ``sweep``.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 missing inputs.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as config_mod
from .config import ConfigError, ExperimentConfig
from .core import FormatError, MeanVector, group_batches
from .experiment import METHODS, MethodRun, evaluate, run_method, scenario_predictions
from .io import (METRICS_HEADER, RECORD_HEADER, TRAJECTORY_HEADER, ensure_dir, read_reports, read_rows,
                 write_reports, write_rows, TRUTH_HEADER)
from .simulator import GroundTruthSeries, MuProfile, Scenario, simulate

log = logging.getLogger("mcs_truth")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_MISSING = 0, 2, 3, 4

SWEEP_AXES = {
    "sparsity": [1.0, 0.9, 0.8, 0.7, 0.6],
    "clean_fraction": [0.5, 0.6, 0.7, 0.8, 0.9],
    "mu": [0.3, 0.15],
    "bursty": [False, True],
}


class MissingInputs(Exception):
    pass


def _resolve(args) -> ExperimentConfig:
    cfg = config_mod.load(args.config) if args.config else ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, scenario=replace(cfg.scenario, seed=args.seed))
    if getattr(args, "methods", None):
        cfg = config_mod.from_dict({**cfg.to_dict(), "methods": args.methods})
    if getattr(args, "out", None):
        cfg = replace(cfg, output=args.out)
    return cfg


def write_scenario(scen: Scenario, out: Path) -> None:
    write_reports(out / "reports.csv", scen.reports)
    scen.truth.to_csv(out / "truth.csv")
    rows = ((m.slot, n + 1, float(v)) for m in scen.history for n, v in enumerate(m.means) if not np.isnan(v))
    write_rows(out / "history.csv", TRUTH_HEADER, rows)
    write_rows(out / "population.csv", ("mu", "malicious"), ((p.id, p.is_malicious) for p in scen.profiles))


def read_scenario(inputs: Path, cfg: ExperimentConfig) -> Scenario:
    needed = ["reports.csv", "truth.csv", "population.csv"]
    missing = [name for name in needed if not (inputs / name).is_file()]
    if missing:
        raise MissingInputs(f"missing input file(s) in {inputs}: {', '.join(missing)}")
    reports = read_reports(inputs / "reports.csv")
    cells = {(t, n): v for _, (t, n, v) in read_rows(inputs / "truth.csv", TRUTH_HEADER, (int, int, float))}
    if not cells:
        raise FormatError("truth.csv is empty")
    slots = sorted({t for t, _ in cells})
    n_regions = max(n for _, n in cells)
    first = slots[0]
    values = np.full((slots[-1] - first + 1, n_regions), np.nan)
    for (t, n), v in cells.items():
        values[t - first, n - 1] = v
    truth = GroundTruthSeries(values, first)
    labels = {mu: bool(flag) for _, (mu, flag) in read_rows(inputs / "population.csv", ("mu", "malicious"), (int, int))}
    profiles = [MuProfile(mu, labels[mu], ()) for mu in sorted(labels)]
    history: list[MeanVector] = []
    if (inputs / "history.csv").is_file():
        hist: dict[int, np.ndarray] = {}
        for _, (t, n, v) in read_rows(inputs / "history.csv", TRUTH_HEADER, (int, int, float)):
            hist.setdefault(t, np.full(n_regions, np.nan))[n - 1] = v
        history = [MeanVector(t, hist[t]) for t in sorted(hist)]
    T = max((r.slot for r in reports), default=0)
    scenario_cfg = replace(cfg.scenario, n_mus=len(profiles), N=n_regions, T=max(T, 2), k=1)
    return Scenario(scenario_cfg, truth, profiles, group_batches(reports, T), history)


def _write_run(run: MethodRun, out: Path) -> None:
    method = run.method
    rows = []
    for res in run.results:
        for rec in res.records:
            r = rec.report
            row = (res.slot, r.mu, r.region, float(r.value), float(rec.q), rec.kept, res.iterations, res.converged)
            rows.append(row if method == "prbtd" else (method,) + row)
    header = RECORD_HEADER if method == "prbtd" else ("method",) + RECORD_HEADER
    write_rows(out / f"records_{method}.csv", header, rows)
    write_rows(out / f"reputations_{method}.csv", TRAJECTORY_HEADER, run.ledger.trajectory_rows())


def _run_scenario(scen: Scenario, cfg: ExperimentConfig, out: Path) -> list[dict]:
    preds = scenario_predictions(scen, cfg.predictor)
    rows = []
    for method in cfg.methods:
        run = run_method(scen, method, preds, cfg.td, cfg.lam)
        metrics = evaluate(run, scen)
        log.info("%s seed %d: mean run_slot time %.4f s over %d slots; %d non-converged",
                 method, scen.config.seed, run.mean_slot_seconds, len(run.results), len(run.non_converged))
        metrics.pop("mean_slot_seconds")
        _write_run(run, out)
        rows.append({"method": method, "seed": scen.config.seed, **metrics,
                     "non_converged_slots": run.non_converged})
    return rows


def _table(rows: list[dict], methods) -> list[tuple]:
    table = []
    for m in methods:
        mine = [r for r in rows if r["method"] == m]
        table.append((m,) + tuple(float(np.mean([r[k] for r in mine])) for k in METRICS_HEADER[1:]))
    return table


def cmd_simulate(args) -> int:
    cfg = _resolve(args)
    out = ensure_dir(cfg.output)
    scen = simulate(cfg.scenario)
    write_scenario(scen, out)
    (out / "config.json").write_text(cfg.dumps())
    manifest = {"config": cfg.to_dict(), "info": {k: [list(w) for w in v] for k, v in scen.info.items()}}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(scen.reports)} reports to {out}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _resolve(args)
    out = ensure_dir(cfg.output)
    (out / "config.json").write_text(cfg.dumps())
    rows = []
    if args.inputs:
        scen = read_scenario(Path(args.inputs), cfg)
        rows += _run_scenario(scen, cfg, ensure_dir(out / "inputs"))
    else:
        for seed in cfg.seeds:
            scen = simulate(replace(cfg.scenario, seed=seed))
            rows += _run_scenario(scen, cfg, ensure_dir(out / f"rep_{seed}"))
    with open(out / "runs.jsonl", "w") as fh:
        for r in rows:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    table = _table(rows, cfg.methods)
    write_rows(out / "metrics.csv", METRICS_HEADER, table)
    for row in table:
        print("{:6s} f1={:.4f} reputation_distance={:.4f} noise_reduction_ratio={:.4f}".format(*row))
    return EXIT_OK


def _axis_value(text: str, axis: str):
    if axis == "bursty":
        if text.lower() in ("on", "true", "1"):
            return True
        if text.lower() in ("off", "false", "0"):
            return False
        raise ConfigError(f"bursty values must be on/off, got {text!r}")
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{axis} values must be numbers, got {text!r}") from None


def cmd_sweep(args) -> int:
    cfg = _resolve(args)
    axis = args.axis
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown axis {axis!r}; expected one of {sorted(SWEEP_AXES)}")
    values = [_axis_value(v, axis) for v in args.values.split(",")] if args.values else SWEEP_AXES[axis]
    out = ensure_dir(cfg.output)
    (out / "config.json").write_text(cfg.dumps())
    table = []
    for value in values:
        if axis == "mu":
            scen_cfg = replace(cfg.scenario, low_noise_mu=None if value == cfg.scenario.mu else value)
        else:
            scen_cfg = replace(cfg.scenario, **{axis: value})
        rows = []
        for seed in cfg.seeds:
            scen = simulate(replace(scen_cfg, seed=seed))
            rows += _run_scenario(scen, cfg, ensure_dir(out / f"{axis}_{value}" / f"rep_{seed}"))
        for row in _table(rows, cfg.methods):
            table.append((axis, value) + row)
    write_rows(out / "sweep.csv", ("axis", "value") + METRICS_HEADER, table)
    for row in table:
        print("{} {} {:6s} f1={:.4f} rd={:.4f} nrr={:.4f}".format(*row))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mcs-truth", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON experiment config (defaults when omitted)")
        sp.add_argument("--out", help="output directory (overrides config)")
        sp.add_argument("--seed", type=int, help="base seed (overrides config)")

    sp = sub.add_parser("simulate", help="write a simulated scenario to disk")
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("run", help="run methods and write records, reputations and metrics")
    common(sp)
    sp.add_argument("--methods", help=f"comma-separated subset of {','.join(METHODS)}")
    sp.add_argument("--inputs", help="directory written by 'simulate' to use instead of simulating")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="metrics table across one scenario parameter")
    common(sp)
    sp.add_argument("--methods", help=f"comma-separated subset of {','.join(METHODS)}")
    sp.add_argument("--axis", required=True, help=f"one of {', '.join(SWEEP_AXES)}")
    sp.add_argument("--values", help="comma-separated axis values (defaults per axis)")
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MissingInputs, FileNotFoundError) as exc:
        if isinstance(exc, FileNotFoundError) and args.config and Path(args.config) == Path(exc.filename or ""):
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"missing inputs: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except FormatError as exc:
        print(f"input format error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
