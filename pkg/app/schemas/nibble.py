"""Nibble partition schemas"""
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field


class QSource(str, Enum):
    PREDICTED = "predicted"
    OBSERVED = "observed"


class NibbleParams(BaseModel):
    ca: float = Field(1 / 3, gt=0, description="multiplier of log_{1/p} n in the clique size k")
    tau: int = Field(2, ge=2, description="exponent in the round rate k^tau")
    beps: float = Field(0.1, gt=0, lt=1, description="eps = n^-beps")
    max_clique_cap: Optional[int] = Field(None, ge=2)
    max_rounds: Optional[int] = Field(None, ge=0)
    allow_q_clamp: bool = True
    trivial_alpha: Optional[float] = Field(None, gt=0)
    trivial_fallback: bool = True
    q_source: QSource = Field(QSource.PREDICTED, description="mu_2 from the G(n, p_i) formula or measured on the round graph")


class RoundParams(BaseModel):
    i: int
    p_i: float
    k_i: int
    q_i: float
    q_raw: float
    q_clamped: bool = False


class Schedule(BaseModel):
    n: int
    p: float
    params: NibbleParams
    k: int
    k_capped: bool = False
    num_rounds: int
    rounds_capped: bool = False
    eps: float
    rounds: List[RoundParams]

    def p_at(self, i: int) -> float:
        return self.rounds[i].p_i

    def k_at(self, i: int) -> int:
        return self.rounds[i].k_i


class PartitionVerification(BaseModel):
    passed: bool
    clique_count: int
    max_clique_size: int
    thickness: int
    non_cliques: int = 0
    uncovered_edges: int = 0
    multiply_covered_edges: int = 0
    tag_counts: Dict[str, int] = {}
    violations: List[str] = []


class PartitionRecord(BaseModel):
    vertices: List[int]
    tag: str
    round: int


class RoundSummary(BaseModel):
    i: int
    k_i: int
    q_i: float
    q_clamped: bool
    skipped: bool
    clique_count: int
    gamma: int
    gamma_star: int
    d_edges: int
    s_edges: int
    edges_before: int
    edges_after: int
    observed_mu2: float = 0.0

    model_config = ConfigDict(from_attributes=True)


class PartitionRequest(BaseModel):
    n: int = Field(..., ge=2, le=2000)
    p: float = Field(..., gt=0, lt=1)
    seed: int = Field(0, ge=0)
    params: NibbleParams = NibbleParams()
    include_cliques: bool = False


class PartitionResponse(BaseModel):
    schedule: Optional[Schedule] = None
    trivial: bool
    rounds: List[RoundSummary]
    verification: PartitionVerification
    cliques: Optional[List[PartitionRecord]] = None
