"""Grid expansion, trial runners and batch execution"""
from __future__ import annotations

import itertools
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd

from app.core.config import OUTPUT_DIR
from app.core.exceptions import PragueLabError
from app.engine.graph_core import sample_gnp, write_edge_list
from app.engine.hypergraph_coloring import (
    available_colors,
    available_colors_from_history,
    coloring_parameters,
    fit_decay_exponent,
    greedy_color,
    iter_used_states,
    read_hypergraph,
    sample_sequence_fixed_m,
    sample_subhypergraph_bernoulli,
    trajectory_audit,
    verify_coloring,
)
from app.engine.nibble_partition import (
    run_nibble,
    verify_partition,
    write_partition_jsonl,
    write_schedule_json,
)
from app.engine.prague_assembler import (
    color_nibble_run,
    lower_bounds,
    prague_upper,
    trivial_cover_bounds,
    write_representation_json,
)
from app.engine.pseudo_audit import audit_run
from app.engine.rng import Rng, derive_seed
from app.models.hypergraph import Hypergraph
from app.schemas.coloring import ColoringRunSummary
from app.schemas.experiment import ExperimentConfig, TrialRecord
from app.schemas.nibble import NibbleParams

logger = logging.getLogger(__name__)

Coords = Dict[str, float]
Metrics = Dict[str, Optional[float]]


def expand_grid(config: ExperimentConfig) -> List[Coords]:
    keys = config.grid_keys()
    values = [getattr(config.grid, key) for key in keys]
    return [dict(zip(keys, combo)) for combo in itertools.product(*values)]


def trial_plan(config: ExperimentConfig) -> List[Tuple[int, int, Coords, int]]:
    """(grid index, replicate, coordinates, trial seed) for every trial, in output order"""
    plan = []
    for grid_index, coords in enumerate(expand_grid(config)):
        for replicate, base in enumerate(config.replicate_seeds()):
            plan.append((grid_index, replicate, coords, derive_seed(base, grid_index, replicate)))
    return plan


def _nibble_params(config: ExperimentConfig, coords: Coords) -> NibbleParams:
    return NibbleParams(
        ca=coords["ca"], tau=int(coords["tau"]), beps=coords["beps"],
        max_clique_cap=config.max_clique_cap, max_rounds=config.max_rounds,
        allow_q_clamp=config.allow_q_clamp, trivial_alpha=config.trivial_alpha,
        q_source=config.q_source,
    )


def run_partition_trial(config: ExperimentConfig, coords: Coords, seed: int, artifacts: Optional[Path]) -> Metrics:
    n, p = int(coords["n"]), coords["p"]
    g = sample_gnp(n, p, Rng(seed, "graph"))
    run = run_nibble(g, _nibble_params(config, coords), Rng(seed, "partition"), p=p)
    report = verify_partition(g, run.partition)
    cover = color_nibble_run(run, Rng(seed, "coloring"), delta=config.palette_delta)
    bounds = trivial_cover_bounds(g, run.partition)
    block_colors = {"gamma": 0, "d": 0, "s": 0, "final": 0}
    for block in cover.blocks:
        block_colors[block.name] += block.used
    if artifacts is not None:
        write_edge_list(g, artifacts / "graph.txt")
        write_partition_jsonl(run.partition, artifacts / "partition.jsonl")
        if run.schedule is not None:
            write_schedule_json(run.schedule, artifacts / "schedule.json")
    return {
        "edges": g.edge_count,
        "k": run.schedule.k if run.schedule else None,
        "rounds_executed": len(run.rounds),
        "trivial": float(run.trivial),
        "partition_size": report.clique_count,
        "thickness": report.thickness,
        "max_clique_size": report.max_clique_size,
        "verified": float(report.passed),
        "gamma_total": sum(len(out.gamma) for out in run.rounds),
        "gamma_star_total": sum(len(out.gamma_star) for out in run.rounds),
        "d_edges": sum(len(out.d_edges) for out in run.rounds),
        "s_edges": sum(len(out.s_edges) for out in run.rounds),
        "final_edges": run.final_graph.edge_count,
        "d": cover.d,
        "gamma_block_colors": block_colors["gamma"],
        "d_block_colors": block_colors["d"],
        "s_block_colors": block_colors["s"],
        "final_block_colors": block_colors["final"],
        "palette_retries": sum(block.retries for block in cover.blocks),
        "cover_bounds_ok": float(bounds.thickness_ok and bounds.size_ok),
    }


def _color_instance(config: ExperimentConfig, coords: Coords) -> Hypergraph:
    if config.hypergraph_file:
        return read_hypergraph(config.hypergraph_file)
    return Hypergraph.complete_uniform(int(coords["n"]), int(coords["r"]))


def _availability_consistent(h: Hypergraph, run, rng: Rng, steps: int = 3, edges: int = 10) -> bool:
    if run.colored_steps == 0:
        return True
    chosen = sorted({int(s) for s in rng.integers(0, run.colored_steps + 1, size=steps)})
    for step, used in iter_used_states(h, run, chosen):
        for eid in rng.integers(0, h.edge_count, size=edges):
            edge = h.edges[int(eid)]
            incremental = available_colors(used, edge, run.q)
            mask = sum(1 << c for c in available_colors_from_history(h, run, step, edge))
            if incremental != mask:
                return False
    return True


def run_color_trial(config: ExperimentConfig, coords: Coords, seed: int, artifacts: Optional[Path]) -> Metrics:
    h = _color_instance(config, coords)
    plan = coloring_parameters(
        h.n, h.r, int(coords["m"]), coords["sigma"],
        gamma=coords.get("gamma"), delta=coords.get("delta"), mode=config.coloring_mode,
    )
    q = int(coords["q"]) if "q" in coords else plan.q
    if config.sampling == "bernoulli":
        sub = sample_subhypergraph_bernoulli(h, min(1.0, plan.sequence_length / h.edge_count), Rng(seed, "subgraph"))
        index = {edge: eid for eid, edge in enumerate(h.edges)}
        order = Rng(seed, "order").generator.permutation(sub.edge_count)
        sequence = [index[sub.edges[int(i)]] for i in order]
        colored, horizon = sequence, max(len(sequence), 1)
    else:
        sequence = sample_sequence_fixed_m(h, plan.sequence_length, Rng(seed, "sequence"))
        colored, horizon = sequence[:plan.m0], plan.sequence_length
    run = greedy_color(h, colored, q, Rng(seed, "coloring"))
    checks = verify_coloring(h, run)
    snapshots = trajectory_audit(run, h, config.checkpoints, coords["sigma"], config.sample_spec,
                                 Rng(seed, "trajectory"), horizon=horizon)
    metrics: Metrics = {
        "palette": q,
        "m0": len(colored),
        "sequence_length": plan.sequence_length,
        "colored_steps": run.colored_steps,
        "failure_index": run.failure_index,
        "success": float(run.succeeded),
        "proper": float(checks.passed),
        "availability_consistent": float(_availability_consistent(h, run, Rng(seed, "consistency"))),
        "colors_used": run.colors_used(),
        "trajectory_condition": float(plan.trajectory_condition_holds),
    }
    for snap in snapshots:
        tag = f"{snap.t:g}"
        metrics[f"q_dev_t{tag}"] = snap.q_max_rel_dev
        metrics[f"y_dev_t{tag}"] = snap.y_max_rel_dev
        metrics[f"q_band_violation_t{tag}"] = snap.q_band_violation_fraction
    try:
        metrics["decay_exponent"] = fit_decay_exponent(snapshots)
    except PragueLabError:
        metrics["decay_exponent"] = None
    if artifacts is not None:
        summary = ColoringRunSummary(q=q, m=len(colored), failure_index=run.failure_index,
                                     colors_used=run.colors_used(), snapshots=snapshots)
        (artifacts / "coloring.json").write_text(summary.model_dump_json(indent=2), encoding="utf-8")
    return metrics


def run_audit_trial(config: ExperimentConfig, coords: Coords, seed: int, artifacts: Optional[Path]) -> Metrics:
    g = sample_gnp(int(coords["n"]), coords["p"], Rng(seed, "graph"))
    report = audit_run(g, _nibble_params(config, coords), config.audit, seed)
    metrics: Metrics = {
        "r_max_deviation": report.max_deviation("R"),
        "n_max_deviation": report.max_deviation("N"),
        "passed": float(report.passed),
        "rows": len(report.rows),
        "insufficient_rows": sum(row.insufficient_samples for row in report.rows),
    }
    for row in report.rows:
        key = f"{row.statistic}_i{row.round}_s{row.s_size}" + (f"_j{row.j}" if row.j is not None else "")
        metrics[f"{key}_dev"] = row.max_deviation
        if row.fluctuation_scale is not None:
            metrics[f"{key}_scale"] = row.fluctuation_scale
    if artifacts is not None:
        (artifacts / "audit.json").write_text(report.model_dump_json(indent=2), encoding="utf-8")
    return metrics


def run_prague_trial(config: ExperimentConfig, coords: Coords, seed: int, artifacts: Optional[Path]) -> Metrics:
    n, p = int(coords["n"]), coords["p"]
    g = sample_gnp(n, p, Rng(seed, "graph"))
    outcome = prague_upper(g, _nibble_params(config, coords), Rng(seed, "prague"), delta=config.palette_delta)
    metrics: Metrics = {
        "d": outcome.d,
        "cover_colors": outcome.cover.d,
        "extra_coordinates": outcome.representation.extra_coordinates,
        "partition_size": len(outcome.run.partition),
        "thickness": outcome.run.partition.thickness(n),
        "verified": float(outcome.report.passed),
        "trivial": float(outcome.run.trivial),
    }
    if 0.0 < p < 1.0:
        bounds = lower_bounds(n, 1.0 - p, coords["eps"])
        metrics["complement_cct_lb"] = bounds.cct_lb
        metrics["complement_ccn_lb"] = bounds.ccn_lb
    if artifacts is not None:
        write_edge_list(g, artifacts / "graph.txt")
        write_representation_json(outcome.representation, artifacts / "representation.json")
        (artifacts / "embedding-report.json").write_text(outcome.report.model_dump_json(indent=2), encoding="utf-8")
    return metrics


def run_lowerbound_trial(config: ExperimentConfig, coords: Coords, seed: int, artifacts: Optional[Path]) -> Metrics:
    bounds = lower_bounds(int(coords["n"]), coords["p"], coords["eps"])
    if artifacts is not None:
        (artifacts / "lower-bounds.json").write_text(bounds.model_dump_json(indent=2), encoding="utf-8")
    return {"s": bounds.s, "phi": bounds.phi, "ccn_lb": bounds.ccn_lb, "cct_lb": bounds.cct_lb}


TRIAL_RUNNERS = {
    "partition": run_partition_trial,
    "color": run_color_trial,
    "audit": run_audit_trial,
    "prague": run_prague_trial,
    "lowerbound": run_lowerbound_trial,
}


def _clean(metrics: Metrics) -> Metrics:
    out: Metrics = {}
    for key, value in metrics.items():
        if value is None:
            out[key] = None
        else:
            value = float(value)
            out[key] = value if math.isfinite(value) else None
    return out


def run_trial(config: ExperimentConfig, grid_index: int, replicate: int, coords: Coords, seed: int,
              out_dir: Optional[str] = None) -> TrialRecord:
    """Run one trial; any exception becomes a status=error record"""
    started = time.perf_counter()
    artifacts = None
    if config.save_artifacts and out_dir is not None:
        artifacts = Path(out_dir) / "artifacts" / f"trial-{grid_index:04d}-{replicate:04d}"
        artifacts.mkdir(parents=True, exist_ok=True)
    try:
        metrics = TRIAL_RUNNERS[config.mode](config, coords, seed, artifacts)
        status, error = "ok", None
    except Exception as exc:  # noqa: BLE001
        logger.warning("trial %d/%d (seed %d) failed: %s", grid_index, replicate, seed, exc)
        metrics, status, error = {}, "error", f"{type(exc).__name__}: {exc}"
    return TrialRecord(
        mode=config.mode, grid_index=grid_index, replicate=replicate, coords=coords, seed=seed,
        status=status, error=error, metrics=_clean(metrics),
        wall_time_s=round(time.perf_counter() - started, 6),
    )


def _run_task(task) -> TrialRecord:
    config, grid_index, replicate, coords, seed, out_dir = task
    return run_trial(config, grid_index, replicate, coords, seed, out_dir)


def _write_summary(records: Iterable[TrialRecord], path: Path) -> pd.DataFrame:
    """mean/std/min/max of every metric per grid point over ok trials"""
    ok = [r for r in records if r.status == "ok"]
    if not ok:
        summary = pd.DataFrame(columns=["grid_index"])
        summary.to_csv(path, index=False)
        return summary
    coord_cols = ["grid_index"] + list(ok[0].coords)
    frame = pd.DataFrame([{"grid_index": r.grid_index, **r.coords, **r.metrics} for r in ok])
    metric_cols = [c for c in frame.columns if c not in coord_cols]
    frame[metric_cols] = frame[metric_cols].apply(pd.to_numeric, errors="coerce")
    summary = frame.groupby(coord_cols, sort=True)[metric_cols].agg(["mean", "std", "min", "max"])
    summary.columns = [f"{metric}_{stat}" for metric, stat in summary.columns]
    summary = summary.reset_index()
    summary.to_csv(path, index=False)
    return summary


def run_experiment(config: ExperimentConfig, jobs: int = 1, out_dir: Optional[str] = None) -> List[TrialRecord]:
    """Run every (grid point, seed) trial and write records.jsonl, summary.csv and config-echo.json"""
    out = Path(out_dir or config.out_dir or OUTPUT_DIR)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config-echo.json").write_text(config.model_dump_json(indent=2), encoding="utf-8")
    (out / "trial-record.schema.json").write_text(json.dumps(TrialRecord.model_json_schema(), indent=2),
                                                  encoding="utf-8")
    tasks = [(config, gi, rep, coords, seed, str(out)) for gi, rep, coords, seed in trial_plan(config)]
    logger.info("running %d %s trials with %d job(s) into %s", len(tasks), config.mode, jobs, out)

    records: List[TrialRecord] = []
    with open(out / "records.jsonl", "w", encoding="utf-8") as sink:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = pool.map(_run_task, tasks)
                for record in results:
                    _emit(record, sink, records)
        else:
            for task in tasks:
                _emit(_run_task(task), sink, records)

    _write_summary(records, out / "summary.csv")
    errors = sum(r.status == "error" for r in records)
    logger.info("finished %d trials (%d errors)", len(records), errors)
    return records


def _emit(record: TrialRecord, sink, records: List[TrialRecord]) -> None:
    sink.write(record.model_dump_json() + "\n")
    sink.flush()
    records.append(record)
    logger.info("trial %d/%d seed=%d status=%s (%.2fs)", record.grid_index, record.replicate,
                record.seed, record.status, record.wall_time_s)


def load_records(path) -> List[TrialRecord]:
    with open(path, encoding="utf-8") as fh:
        return [TrialRecord.model_validate_json(line) for line in fh if line.strip()]


def numeric_metric(records: Iterable[TrialRecord], metric: str) -> np.ndarray:
    return np.array([r.metrics[metric] for r in records
                     if r.status == "ok" and r.metrics.get(metric) is not None], dtype=float)
