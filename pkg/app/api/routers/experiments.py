"""Experiments router - batch runs executed by the background scheduler"""
from fastapi import APIRouter, HTTPException, status

from app.harness import jobs
from app.schemas.experiment import ExperimentConfig, JobStatus

router = APIRouter(prefix="/experiments", tags=["experiments"])


@router.post("/", response_model=JobStatus, status_code=status.HTTP_202_ACCEPTED)
def submit_experiment(config: ExperimentConfig):
    """Queue an experiment batch"""
    return jobs.submit(config)


@router.get("/{job_id}", response_model=JobStatus)
def read_experiment(job_id: str):
    """Status of a queued or finished batch"""
    job = jobs.get_status(job_id)
    if job is None:
        raise HTTPException(status_code=404, detail="Experiment job not found")
    return job
