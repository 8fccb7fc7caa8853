"""Pydantic schemas for configs, reports and request/response validation"""
from app.schemas.nibble import NibbleParams, PartitionVerification, Schedule
from app.schemas.audit import AuditReport, AuditRow, AuditSpec
from app.schemas.coloring import ColoringPlan, RegularityReport, SampleSpec, TrajectorySnapshot
from app.schemas.prague import EmbeddingReport, LowerBounds
from app.schemas.experiment import ExperimentConfig, TrialRecord

__all__ = [
    "NibbleParams", "PartitionVerification", "Schedule",
    "AuditReport", "AuditRow", "AuditSpec",
    "ColoringPlan", "RegularityReport", "SampleSpec", "TrajectorySnapshot",
    "EmbeddingReport", "LowerBounds",
    "ExperimentConfig", "TrialRecord",
]
