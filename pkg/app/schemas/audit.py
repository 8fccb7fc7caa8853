"""Pseudo-randomness audit schemas"""
from typing import List, Optional

from pydantic import BaseModel, Field

from app.core.config import AUDIT_TOLERANCE_MULTIPLIER, CLIQUE_SAMPLE_RETRY_CAP
from app.schemas.nibble import NibbleParams


class CliqueCountTarget(BaseModel):
    s_size: int = Field(..., ge=0)
    j: int = Field(..., ge=1)
    samples: int = Field(..., gt=0)


class NeighborhoodTarget(BaseModel):
    s_size: int = Field(..., ge=0)
    samples: int = Field(..., gt=0)


class AuditSpec(BaseModel):
    clique_targets: List[CliqueCountTarget] = []
    neighborhood_targets: List[NeighborhoodTarget] = []
    rounds: List[int] = [0]
    tolerance_multiplier: float = Field(AUDIT_TOLERANCE_MULTIPLIER, gt=0)
    retry_cap: int = Field(CLIQUE_SAMPLE_RETRY_CAP, gt=0)


class AuditRow(BaseModel):
    round: int
    statistic: str
    s_size: int
    j: Optional[int] = None
    expected: float
    samples: int
    max_deviation: float
    mean_deviation: float
    band: float
    fluctuation_scale: Optional[float] = None
    passed: bool
    insufficient_samples: bool = False
    worst_set: List[int] = []


class AuditReport(BaseModel):
    eps: float
    tolerance_multiplier: float
    rows: List[AuditRow] = []

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows if row.samples > 0)

    def max_deviation(self, statistic: Optional[str] = None) -> float:
        values = [row.max_deviation for row in self.rows
                  if row.samples > 0 and (statistic is None or row.statistic == statistic)]
        return max(values, default=0.0)


class AuditRequest(BaseModel):
    n: int = Field(..., ge=2, le=2000)
    p: float = Field(..., gt=0, lt=1)
    seed: int = Field(0, ge=0)
    params: NibbleParams = NibbleParams()
    spec: AuditSpec
