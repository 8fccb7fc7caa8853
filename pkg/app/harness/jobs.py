"""Background experiment jobs run by the API scheduler"""
from __future__ import annotations

import logging
import threading
import uuid
from pathlib import Path
from typing import Dict, Optional

from apscheduler.schedulers.background import BackgroundScheduler

from app.core import config as settings
from app.harness.experiment import run_experiment
from app.schemas.experiment import ExperimentConfig, JobStatus

logger = logging.getLogger(__name__)

scheduler = BackgroundScheduler(timezone="UTC")

_jobs: Dict[str, JobStatus] = {}
_lock = threading.Lock()


def _update(job_id: str, **changes) -> None:
    with _lock:
        _jobs[job_id] = _jobs[job_id].model_copy(update=changes)


def _prune() -> None:
    """Drop the oldest finished jobs beyond MAX_FINISHED_JOBS"""
    with _lock:
        finished = [job_id for job_id, job in _jobs.items() if job.status in ("done", "failed")]
        for job_id in finished[:max(len(finished) - settings.MAX_FINISHED_JOBS, 0)]:
            del _jobs[job_id]


def run_job(job_id: str, config: ExperimentConfig) -> None:
    """Execute a submitted batch and record its outcome"""
    _update(job_id, status="running")
    try:
        records = run_experiment(config, jobs=1, out_dir=get_status(job_id).out_dir)
    except Exception as exc:  # noqa: BLE001
        logger.exception("experiment job %s failed", job_id)
        _update(job_id, status="failed", detail=str(exc))
    else:
        errors = sum(r.status == "error" for r in records)
        _update(job_id, status="done", trials=len(records), errors=errors)
    _prune()


def submit(config: ExperimentConfig) -> JobStatus:
    job_id = uuid.uuid4().hex[:12]
    out_dir = str(Path(config.out_dir or settings.OUTPUT_DIR) / f"job-{job_id}")
    with _lock:
        _jobs[job_id] = status = JobStatus(job_id=job_id, status="pending", out_dir=out_dir)
    _prune()
    scheduler.add_job(run_job, "date", args=[job_id, config], id=job_id, max_instances=1)
    logger.info("queued experiment job %s (%s)", job_id, config.mode)
    return status


def get_status(job_id: str) -> Optional[JobStatus]:
    with _lock:
        return _jobs.get(job_id)
