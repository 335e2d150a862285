"""Monte-Carlo orchestration, seeding, and result emission."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, config_from_dict, config_to_dict
from .dynamics import simulate_trajectory
from .geometry import LandmarkKind
from .metrics import GospaParams, StateRmse, gospa, rmse
from .pcrb import aggregate_bounds, sweep_sigma_d
from .pmb_filter import (
    FilterConfig,
    da_diagnostics,
    estimate,
    initial_belief,
    predict,
    update,
)
from .sensing import generate_scan


@dataclass
class RunSeries:
    """Per-step metrics of one Monte-Carlo run."""

    run: int
    seed: int
    gospa_va: list
    gospa_sp: list
    correct_da_weight: list
    rmse: StateRmse
    final_map_size: int


@dataclass
class RunReport:
    """Aggregated experiment output plus the exact configuration echo."""

    config: dict
    per_run: list = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)


def run_single(cfg: RunConfig, seed: int, run_idx: int,
               gospa_params: GospaParams = GospaParams()) -> RunSeries:
    """One filter run over a fresh truth trajectory and scan sequence.

    Scans are always synthesized with the Doppler component; a filter
    configured without Doppler simply ignores that coordinate, which keeps
    on/off comparisons paired on identical randomness.
    """
    rng = np.random.default_rng(seed)
    truth = simulate_trajectory(cfg.ue_init, cfg.motion, cfg.steps,
                                noise=cfg.noisy_truth, rng=rng)
    scans = [generate_scan(cfg.scenario, ue, cfg.sensor, cfg.motion.speed, rng)
             for ue in truth]
    init_mean = cfg.ue_init.as_array() + np.linalg.cholesky(
        cfg.ue_init_cov) @ rng.standard_normal(4)

    fcfg = FilterConfig(params=cfg.filter_params, sensor=cfg.sensor,
                        motion=cfg.motion, bs=cfg.scenario.bs,
                        with_doppler=cfg.doppler)
    belief = initial_belief(init_mean, cfg.ue_init_cov, fcfg)

    truth_va = np.array([lm.position for lm in cfg.scenario.landmarks
                         if lm.kind is LandmarkKind.VA])
    truth_sp = np.array([lm.position for lm in cfg.scenario.landmarks
                         if lm.kind is LandmarkKind.SP])

    gospa_va, gospa_sp, da_w, est_states = [], [], [], []
    for ue, scan in zip(truth, scans):
        belief = predict(belief, cfg.motion)
        belief = update(belief, scan, fcfg)
        da_w.append(da_diagnostics(belief, scan)["correct_da_weight"])
        est = estimate(belief, cfg.filter_params.report_r)
        est_states.append(est.ue.as_array())
        est_va = [lm.position for lm in est.landmarks if lm.kind is LandmarkKind.VA]
        est_sp = [lm.position for lm in est.landmarks if lm.kind is LandmarkKind.SP]
        gospa_va.append(gospa(truth_va, est_va, gospa_params).total)
        gospa_sp.append(gospa(truth_sp, est_sp, gospa_params).total)

    series_rmse = rmse(np.array([ue.as_array() for ue in truth]),
                       np.array(est_states))
    return RunSeries(run=run_idx, seed=seed, gospa_va=gospa_va,
                     gospa_sp=gospa_sp, correct_da_weight=da_w,
                     rmse=series_rmse,
                     final_map_size=len(estimate(belief, cfg.filter_params.report_r).landmarks))


def run_monte_carlo(cfg: RunConfig,
                    gospa_params: GospaParams = GospaParams()) -> RunReport:
    """Paired-seed Monte-Carlo experiment; deterministic given base_seed."""
    report = RunReport(config=config_to_dict(cfg))
    report.config["tool_version"] = __version__
    for j in range(cfg.runs):
        report.per_run.append(run_single(cfg, cfg.base_seed + j, j, gospa_params))
    report.aggregates = _aggregate(report.per_run)
    return report


def _aggregate(per_run: list) -> dict:
    final_va = [s.gospa_va[-1] for s in per_run]
    final_sp = [s.gospa_sp[-1] for s in per_run]
    da = [float(np.mean(s.correct_da_weight)) for s in per_run]
    return {
        "runs": len(per_run),
        "gospa_va_final_mean": float(np.mean(final_va)),
        "gospa_sp_final_mean": float(np.mean(final_sp)),
        "gospa_va_mean_over_time": float(np.mean([np.mean(s.gospa_va) for s in per_run])),
        "gospa_sp_mean_over_time": float(np.mean([np.mean(s.gospa_sp) for s in per_run])),
        "rmse_pos_m": float(np.sqrt(np.mean([s.rmse.pos**2 for s in per_run]))),
        "rmse_heading_rad": float(np.sqrt(np.mean([s.rmse.heading**2 for s in per_run]))),
        "rmse_bias_m": float(np.sqrt(np.mean([s.rmse.bias**2 for s in per_run]))),
        "correct_da_weight_mean": float(np.mean(da)),
    }


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".15g")


def write_csv(path: str | Path, rows: list[dict]) -> None:
    """UTF-8 CSV, header row, 15 significant digits, no timestamps."""
    path = Path(path)
    fields = list(rows[0].keys())
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_fmt(row.get(f)) for f in fields])


def report_rows(report: RunReport) -> list[dict]:
    rows = []
    for series in report.per_run:
        for k in range(len(series.gospa_va)):
            rows.append({
                "run": series.run,
                "seed": series.seed,
                "k": k + 1,
                "gospa_va_m": series.gospa_va[k],
                "gospa_sp_m": series.gospa_sp[k],
                "correct_da_weight": series.correct_da_weight[k],
            })
    return rows


def report_to_dict(report: RunReport) -> dict:
    return {
        "config": report.config,
        "aggregates": report.aggregates,
        "per_run": [{
            "run": s.run,
            "seed": s.seed,
            "rmse_pos_m": s.rmse.pos,
            "rmse_heading_rad": s.rmse.heading,
            "rmse_bias_m": s.rmse.bias,
            "gospa_va_final_m": s.gospa_va[-1],
            "gospa_sp_final_m": s.gospa_sp[-1],
            "correct_da_weight_mean": float(np.mean(s.correct_da_weight)),
            "final_map_size": s.final_map_size,
        } for s in report.per_run],
    }


def write_report(report: RunReport, out_json: str | Path,
                 out_csv: str | Path | None = None) -> None:
    Path(out_json).write_text(
        json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    if out_csv is not None:
        write_csv(out_csv, report_rows(report))


def rerun_from_report(path: str | Path) -> RunReport:
    """Re-execute an experiment from the config echoed in its report."""
    data = json.loads(Path(path).read_text())
    cfg = config_from_dict(data["config"])
    return run_monte_carlo(cfg)


def compare_reports(path_a: str | Path, path_b: str | Path) -> dict:
    """Join two run reports and emit aggregate deltas (a minus b)."""
    a = json.loads(Path(path_a).read_text())
    b = json.loads(Path(path_b).read_text())
    keys = sorted(set(a["aggregates"]) & set(b["aggregates"]) - {"runs"})
    deltas = {k: a["aggregates"][k] - b["aggregates"][k] for k in keys}
    return {
        "report_a": str(path_a),
        "report_b": str(path_b),
        "aggregates_a": a["aggregates"],
        "aggregates_b": b["aggregates"],
        "delta_a_minus_b": deltas,
    }


def bounds_rows(cfg: RunConfig, grid) -> list[dict]:
    """PCRB sweep rows over the nominal trajectory of a run configuration."""
    return sweep_sigma_d(cfg.scenario, cfg.motion, cfg.sensor, grid,
                         cfg.ue_init, cfg.ue_init_cov, cfg.lm_prior_var,
                         cfg.steps)


def bounds_summary(rows: list[dict]) -> dict:
    """Both aggregations of a sweep, for the report metadata."""
    return {
        "final": aggregate_bounds(rows, "final"),
        "mean": aggregate_bounds(rows, "mean"),
    }


def simulate_rows(cfg: RunConfig, seed: int) -> tuple[list[dict], list[dict]]:
    """Truth trajectory and scan rows for the `simulate` subcommand."""
    rng = np.random.default_rng(seed)
    truth = simulate_trajectory(cfg.ue_init, cfg.motion, cfg.steps,
                                noise=cfg.noisy_truth, rng=rng)
    truth_rows = [{
        "k": k + 1, "x_m": ue.x, "y_m": ue.y, "heading_rad": ue.heading,
        "clock_bias_m": ue.clock_bias,
    } for k, ue in enumerate(truth)]
    scan_rows = []
    for k, ue in enumerate(truth, start=1):
        scan = generate_scan(cfg.scenario, ue, cfg.sensor, cfg.motion.speed, rng)
        for z, label in zip(scan.zs, scan.truth_assoc):
            row = {"k": k, "range_m": z[0], "aoa_az_rad": z[1],
                   "aoa_el_rad": z[2], "aod_az_rad": z[3], "aod_el_rad": z[4]}
            if z.shape[0] > 5:
                row["doppler_mps"] = z[5]
            row["truth_landmark"] = int(label)
            scan_rows.append(row)
    return truth_rows, scan_rows
