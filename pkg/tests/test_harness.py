"""Experiment grids, trial isolation and scaling summaries"""
import json
import math
from pathlib import Path

import pandas as pd
import pytest
from pydantic import ValidationError

from app.core import config as settings
from app.engine.nibble_partition import build_schedule
from app.harness import experiment, jobs
from app.harness.experiment import expand_grid, load_records, run_experiment, trial_plan
from app.harness.summary import NORMALIZERS, ratio_growth, summarize_scaling, write_scaling_csv
from app.schemas.experiment import ExperimentConfig, JobStatus, TrialRecord


def lowerbound_config(**overrides) -> ExperimentConfig:
    data = {"mode": "lowerbound", "grid": {"n": [64, 128], "p": [0.5], "eps": [0.1]}, "seeds": [1, 2, 3]}
    data.update(overrides)
    return ExperimentConfig.model_validate(data)


def strip_timing(records):
    return [r.model_dump(exclude={"wall_time_s"}) for r in records]


class TestConfig:
    def test_empty_seeds_rejected(self):
        with pytest.raises(ValidationError):
            lowerbound_config(seeds=[])

    def test_base_seed_replicates(self):
        config = lowerbound_config(seeds=None, base_seed=7, seed_count=4)
        assert config.replicate_seeds() == [7, 7, 7, 7]
        seeds = [seed for _, _, _, seed in trial_plan(config)]
        assert len(set(seeds)) == len(seeds) == 8

    @pytest.mark.parametrize("grid", [
        {"n": [64], "p": [1.0], "eps": [0.1]},
        {"n": [64], "p": [0.5], "eps": [1.5]},
        {"n": [1], "p": [0.5], "eps": [0.1]},
        {"n": [], "p": [0.5], "eps": [0.1]},
    ])
    def test_bad_grids_rejected(self, grid):
        with pytest.raises(ValidationError):
            lowerbound_config(grid=grid)

    def test_color_needs_gamma_or_delta(self):
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate({"mode": "color", "seeds": [0],
                                             "grid": {"n": [12], "r": [3], "m": [100]}})

    def test_grid_expansion(self):
        config = ExperimentConfig.model_validate({
            "mode": "prague", "seeds": [0],
            "grid": {"n": [16, 32], "p": [0.3, 0.5], "ca": [0.5], "eps": [0.1, 0.2]},
        })
        points = expand_grid(config)
        assert len(points) == 8
        assert set(points[0]) == {"n", "p", "ca", "tau", "beps", "eps"}


class TestRunExperiment:
    def test_writes_outputs(self, tmp_path):
        records = run_experiment(lowerbound_config(seeds=[5]), out_dir=str(tmp_path))
        assert len(records) == 2
        for name in ("records.jsonl", "summary.csv", "config-echo.json", "trial-record.schema.json"):
            assert (tmp_path / name).exists()
        assert load_records(tmp_path / "records.jsonl") == records
        summary = pd.read_csv(tmp_path / "summary.csv")
        assert "s_mean" in summary.columns
        echoed = json.loads((tmp_path / "config-echo.json").read_text())
        assert echoed["mode"] == "lowerbound"

    def test_one_record_per_seed(self, tmp_path):
        config = lowerbound_config(grid={"n": [64], "p": [0.5], "eps": [0.1]})
        records = run_experiment(config, out_dir=str(tmp_path))
        assert [r.replicate for r in records] == [0, 1, 2]
        assert all(r.status == "ok" for r in records)

    def test_deterministic(self, tmp_path):
        config = ExperimentConfig.model_validate({
            "mode": "partition", "seeds": [0, 1], "grid": {"n": [40], "p": [0.5], "ca": [0.5]},
        })
        first = run_experiment(config, out_dir=str(tmp_path / "a"))
        second = run_experiment(config, out_dir=str(tmp_path / "b"))
        assert strip_timing(first) == strip_timing(second)
        assert all(r.metrics["verified"] == 1.0 for r in first)

    def test_failing_trial_isolated(self, tmp_path, monkeypatch):
        original = experiment.TRIAL_RUNNERS["lowerbound"]

        def flaky(config, coords, seed, artifacts):
            if seed == trial_plan(config)[1][3]:
                raise RuntimeError("boom")
            return original(config, coords, seed, artifacts)

        monkeypatch.setitem(experiment.TRIAL_RUNNERS, "lowerbound", flaky)
        config = lowerbound_config(grid={"n": [64], "p": [0.5], "eps": [0.1]})
        records = run_experiment(config, out_dir=str(tmp_path))
        assert [r.status for r in records] == ["ok", "error", "ok"]
        assert "boom" in records[1].error
        assert records[1].metrics == {}

    def test_parallel_matches_serial(self, tmp_path):
        config = lowerbound_config()
        serial = run_experiment(config, jobs=1, out_dir=str(tmp_path / "serial"))
        parallel = run_experiment(config, jobs=2, out_dir=str(tmp_path / "parallel"))
        assert strip_timing(serial) == strip_timing(parallel)

    def test_artifacts(self, tmp_path):
        config = ExperimentConfig.model_validate({
            "mode": "prague", "seeds": [0], "save_artifacts": True,
            "grid": {"n": [20], "p": [0.5], "ca": [0.5]},
        })
        record, = run_experiment(config, out_dir=str(tmp_path))
        assert record.status == "ok"
        trial_dir = tmp_path / "artifacts" / "trial-0000-0000"
        assert (trial_dir / "representation.json").exists()
        assert (trial_dir / "embedding-report.json").exists()

    def test_color_mode(self, tmp_path):
        config = ExperimentConfig.model_validate({
            "mode": "color", "seeds": [0, 1], "checkpoints": [0.0, 0.25, 0.5],
            "grid": {"n": [12], "r": [3], "m": [400], "gamma": [0.2]},
        })
        for record in run_experiment(config, out_dir=str(tmp_path)):
            assert record.status == "ok", record.error
            assert record.metrics["proper"] == 1.0
            assert record.metrics["availability_consistent"] == 1.0
            assert record.metrics["palette"] == 100

    def test_bernoulli_color_mode(self, tmp_path):
        config = ExperimentConfig.model_validate({
            "mode": "color", "seeds": [0], "sampling": "bernoulli",
            "grid": {"n": [12], "r": [3], "m": [100], "gamma": [0.2]},
        })
        record, = run_experiment(config, out_dir=str(tmp_path))
        assert record.status == "ok", record.error
        assert record.metrics["proper"] == 1.0

    def test_audit_mode(self, tmp_path):
        config = ExperimentConfig.model_validate({
            "mode": "audit", "seeds": [0], "max_rounds": 1,
            "grid": {"n": [80], "p": [0.5], "ca": [0.5]},
            "audit": {"clique_targets": [{"s_size": 1, "j": 2, "samples": 5}],
                      "neighborhood_targets": [{"s_size": 1, "samples": 5}]},
        })
        record, = run_experiment(config, out_dir=str(tmp_path))
        assert record.status == "ok", record.error
        assert record.metrics["rows"] == 2


def make_record(n, p, value, mode="partition", status="ok"):
    return TrialRecord(mode=mode, grid_index=0, replicate=0, coords={"n": n, "p": p}, seed=0,
                       status=status, metrics={"d": value})


class TestSummary:
    def test_constant_metric(self):
        table = summarize_scaling([make_record(64, 0.5, 10.0) for _ in range(4)], "d")
        row = table.iloc[0]
        assert row["count"] == 4
        assert row["mean_ratio"] == 10.0
        assert row["std_ratio"] == 0.0
        assert row["half_width"] == 0.0

    def test_single_record_has_no_interval(self, tmp_path):
        table = summarize_scaling([make_record(64, 0.5, 10.0)], "d")
        assert math.isnan(table.iloc[0]["half_width"])
        write_scaling_csv(table, tmp_path / "scaling.csv")
        assert "n/a" in (tmp_path / "scaling.csv").read_text()

    def test_errors_skipped(self):
        records = [make_record(64, 0.5, 10.0), make_record(64, 0.5, None, status="error")]
        assert summarize_scaling(records, "d").iloc[0]["count"] == 1

    def test_normalizer(self):
        table = summarize_scaling([make_record(64, 0.5, 64 * 0.5 / 6)], "d", normalizer="thickness")
        assert table.iloc[0]["mean_ratio"] == pytest.approx(1.0)

    def test_rejects_mixed_modes_and_unknown_normalizer(self):
        with pytest.raises(ValueError):
            summarize_scaling([make_record(64, 0.5, 1.0), make_record(64, 0.5, 1.0, mode="prague")], "d")
        with pytest.raises(ValueError):
            summarize_scaling([make_record(64, 0.5, 1.0)], "d", normalizer="cube")

    def test_ratio_growth(self):
        records = [make_record(64, 0.5, 2.0), make_record(128, 0.5, 3.0)]
        growth = ratio_growth(summarize_scaling(records, "d"), 64, 128)
        assert growth == {0.5: pytest.approx(1.5)}


EXPERIMENTS_DIR = Path(__file__).resolve().parent.parent / "experiments"


@pytest.mark.parametrize("path", sorted(p for p in EXPERIMENTS_DIR.glob("*.json") if p.name != "calibration.json"),
                         ids=lambda p: p.stem)
def test_checked_in_configs_validate(path):
    config = ExperimentConfig.model_validate_json(path.read_text())
    assert expand_grid(config)
    assert trial_plan(config)


def test_calibration_ratio_limit_is_readable():
    calibration = json.loads((EXPERIMENTS_DIR / "calibration.json").read_text())
    assert calibration["scaling"]["ratio_limit"] > 1
    for entry in calibration["scaling"]["metrics"]:
        assert entry["normalizer"] in NORMALIZERS


def test_partition_acceptance_clique_sizes():
    config = ExperimentConfig.model_validate_json((EXPERIMENTS_DIR / "partition-acceptance.json").read_text())
    sizes = set()
    for coords in expand_grid(config):
        params = experiment._nibble_params(config, coords)
        sched = build_schedule(int(coords["n"]), coords["p"], params)
        assert 3 <= sched.k <= 5, coords
        sizes.add(sched.k)
    assert sizes == {3, 4}


class TestJobs:
    @pytest.fixture(autouse=True)
    def fresh_registry(self, monkeypatch):
        monkeypatch.setattr(jobs, "_jobs", {})
        monkeypatch.setattr(settings, "MAX_FINISHED_JOBS", 2)

    def test_oldest_finished_jobs_evicted(self):
        for idx, status in enumerate(["done", "failed", "running", "done", "pending", "done"]):
            jobs._jobs[f"job{idx}"] = JobStatus(job_id=f"job{idx}", status=status, out_dir="out")
        jobs._prune()
        assert list(jobs._jobs) == ["job2", "job3", "job4", "job5"]
        assert jobs.get_status("job0") is None

    def test_finishing_a_job_prunes(self, monkeypatch, tmp_path):
        monkeypatch.setattr(jobs, "run_experiment", lambda config, jobs, out_dir: [])
        for idx in range(4):
            jobs._jobs[f"job{idx}"] = JobStatus(job_id=f"job{idx}", status="pending", out_dir=str(tmp_path))
            jobs.run_job(f"job{idx}", lowerbound_config())
        assert list(jobs._jobs) == ["job2", "job3"]
        assert jobs.get_status("job3").status == "done"


@pytest.mark.slow
def test_scaling_ratio_growth_on_partition_runs(tmp_path):
    calibration = json.loads((EXPERIMENTS_DIR / "calibration.json").read_text())
    config = ExperimentConfig.model_validate({
        "mode": "partition",
        "grid": {"n": [100, 400], "p": [0.5], "ca": [0.5], "tau": [2], "beps": [0.1]},
        "max_clique_cap": 4,
        "seeds": [0, 1, 2],
    })
    records = run_experiment(config, out_dir=str(tmp_path))
    assert all(r.status == "ok" for r in records)
    for entry in calibration["scaling"]["metrics"]:
        table = summarize_scaling(records, entry["metric"], entry["normalizer"])
        growth = ratio_growth(table, 100, 400)
        assert set(growth) == {0.5}
        assert growth[0.5] <= entry["ratio_limit"], (entry["metric"], growth)
