"""Hypergraph coloring schemas"""
from typing import List, Optional

from pydantic import BaseModel, Field


class RegularityReport(BaseModel):
    n: int
    r: int
    edge_count: int
    D_estimate: float
    max_degree_deviation: float
    max_codegree: int
    sigma_implied: float


class SampleSpec(BaseModel):
    max_edges: int = Field(50_000, gt=0, description="evaluate every edge up to this many, sample above")
    edge_samples: int = Field(5_000, gt=0)
    pair_samples: int = Field(200, gt=0, description="(v, c) pairs for |Y_vc|")


class TrajectorySnapshot(BaseModel):
    step: int
    t: float
    q_min: float
    q_mean: float
    q_max: float
    y_min: float
    y_mean: float
    y_max: float
    q_hat: float
    y_hat: float
    e_hat: float
    q_max_rel_dev: float
    y_max_rel_dev: float
    q_plus_max: float
    q_minus_max: float
    y_plus_max: float
    y_minus_max: float
    q_band_violation_fraction: float
    y_band_violation_fraction: float
    edges_evaluated: int
    pairs_evaluated: int


class ColoringPlan(BaseModel):
    mode: str
    n: int
    r: int
    m: int
    sequence_length: int
    q: int
    m0: int
    gamma: float
    delta: Optional[float] = None
    sigma: float
    b: float
    trajectory_condition_holds: bool
    random_subgraph_condition_holds: Optional[bool] = None


class ColoringVerification(BaseModel):
    passed: bool
    steps_checked: int
    conflicts: int = 0
    out_of_palette: int = 0
    violations: List[str] = []


class ColoringRunSummary(BaseModel):
    q: int
    m: int
    failure_index: Optional[int] = None
    colors_used: int
    snapshots: List[TrajectorySnapshot] = []


class ColoringRequest(BaseModel):
    n: int = Field(..., ge=2, le=500)
    r: int = Field(..., ge=2, le=8)
    m: int = Field(..., ge=1, le=200_000)
    edges: Optional[List[List[int]]] = Field(None, description="explicit r-uniform edges; complete if omitted")
    q: Optional[int] = Field(None, ge=1)
    mode: str = "literal"
    gamma: Optional[float] = Field(0.2, gt=0, lt=1)
    delta: Optional[float] = Field(None, gt=0)
    sigma: float = Field(0.5, gt=0)
    checkpoints: List[float] = [0.0, 0.25, 0.5]
    seed: int = Field(0, ge=0)


class ColoringResponse(BaseModel):
    plan: ColoringPlan
    regularity: RegularityReport
    verification: ColoringVerification
    run: ColoringRunSummary
