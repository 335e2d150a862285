"""Command line interface: bounds, simulate, run, compare."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import RunConfig, config_to_dict, load_config
from .errors import ConfigError, DopSlamError
from .harness import (
    bounds_rows,
    bounds_summary,
    compare_reports,
    run_monte_carlo,
    simulate_rows,
    write_csv,
    write_report,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

DEFAULT_SIGMA_GRID = "0.05,0.1,0.2,0.3,0.4,0.5"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dopslam",
        description="Doppler-aware radio-SLAM bounds and EK-PMB filter experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", type=str, default=None,
                       help="JSON config file (defaults used when omitted)")
        p.add_argument("--seed", type=int, default=None, help="base seed override")
        p.add_argument("--doppler", choices=("on", "off"), default=None,
                       help="enable or disable the Doppler measurement")
        p.add_argument("--sigma-d", type=str, default=None,
                       help="Doppler noise std in m/s (comma list for `bounds`)")
        p.add_argument("--out", type=str, default=None, help="output path")

    p_bounds = sub.add_parser("bounds", help="PCRB sweep over sigma_d to CSV")
    add_common(p_bounds)
    p_bounds.add_argument("--steps", type=int, default=None)
    p_bounds.add_argument("--summary", type=str, default=None,
                          help="optional JSON with final/mean aggregations")

    p_sim = sub.add_parser("simulate", help="emit truth trajectory and scans")
    add_common(p_sim)
    p_sim.add_argument("--scans-out", type=str, default=None,
                       help="scan CSV path (default <out stem>_scans.csv)")

    p_run = sub.add_parser("run", help="Monte-Carlo filter experiment")
    add_common(p_run)
    p_run.add_argument("--runs", type=int, default=None)
    p_run.add_argument("--csv", type=str, default=None,
                       help="per-step metrics CSV path")

    p_cmp = sub.add_parser("compare", help="join two run reports, emit deltas")
    p_cmp.add_argument("report_a", type=str)
    p_cmp.add_argument("report_b", type=str)
    p_cmp.add_argument("--out", type=str, default=None)
    return parser


def _load_run_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg.base_seed = args.seed
    if getattr(args, "doppler", None) is not None:
        cfg.doppler = args.doppler == "on"
    if getattr(args, "runs", None) is not None:
        if args.runs < 1:
            raise ConfigError("--runs must be >= 1")
        cfg.runs = args.runs
    if getattr(args, "steps", None) is not None:
        if args.steps < 1:
            raise ConfigError("--steps must be >= 1")
        cfg.steps = args.steps
    return cfg


def _sigma_list(arg: str) -> list[float]:
    try:
        vals = [float(tok) for tok in arg.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --sigma-d list {arg!r}: {exc}") from exc
    if not vals or min(vals) <= 0.0:
        raise ConfigError("--sigma-d values must be positive")
    return vals


def _cmd_bounds(args) -> int:
    cfg = _load_run_config(args)
    grid = _sigma_list(args.sigma_d or DEFAULT_SIGMA_GRID)
    rows = bounds_rows(cfg, grid)
    out = Path(args.out or "bounds.csv")
    write_csv(out, rows)
    if args.summary:
        summary = {"config": config_to_dict(cfg), "grid": grid,
                   "aggregations": bounds_summary(rows)}
        Path(args.summary).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                                      encoding="utf-8")
    print(f"wrote {len(rows)} bound rows to {out}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = _load_run_config(args)
    if args.sigma_d:
        cfg.sensor = cfg.sensor.__class__(
            range_var=cfg.sensor.range_var, angle_var=cfg.sensor.angle_var,
            sigma_d=_sigma_list(args.sigma_d)[0],
            detection_prob=cfg.sensor.detection_prob,
            clutter_rate=cfg.sensor.clutter_rate,
            clutter_region=cfg.sensor.clutter_region,
            with_doppler=cfg.sensor.with_doppler)
    out = Path(args.out or "truth.csv")
    scans_out = Path(args.scans_out) if args.scans_out else out.with_name(
        out.stem + "_scans.csv")
    truth_rows, scan_rows = simulate_rows(cfg, cfg.base_seed)
    write_csv(out, truth_rows)
    write_csv(scans_out, scan_rows)
    print(f"wrote {len(truth_rows)} truth rows to {out} and "
          f"{len(scan_rows)} measurements to {scans_out}")
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = _load_run_config(args)
    if args.sigma_d:
        vals = _sigma_list(args.sigma_d)
        if len(vals) != 1:
            raise ConfigError("`run` takes a single --sigma-d value")
        cfg.sensor = cfg.sensor.__class__(
            range_var=cfg.sensor.range_var, angle_var=cfg.sensor.angle_var,
            sigma_d=vals[0], detection_prob=cfg.sensor.detection_prob,
            clutter_rate=cfg.sensor.clutter_rate,
            clutter_region=cfg.sensor.clutter_region,
            with_doppler=cfg.sensor.with_doppler)
    report = run_monte_carlo(cfg)
    out = Path(args.out or "report.json")
    write_report(report, out, args.csv)
    print(f"wrote report for {cfg.runs} runs to {out}")
    for key, val in sorted(report.aggregates.items()):
        print(f"  {key}: {val:.6g}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    for path in (args.report_a, args.report_b):
        if not Path(path).is_file():
            raise ConfigError(f"report not found: {path}")
    result = compare_reports(args.report_a, args.report_b)
    text = json.dumps(result, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, matching the config exit code
        return int(exc.code) if exc.code else EXIT_OK
    commands = {
        "bounds": _cmd_bounds,
        "simulate": _cmd_simulate,
        "run": _cmd_run,
        "compare": _cmd_compare,
    }
    try:
        return commands[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DopSlamError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
