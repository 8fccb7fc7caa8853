"""Prague representation and lower-bound schemas"""
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.nibble import NibbleParams


class LowerBounds(BaseModel):
    n: int
    p: float
    eps: float
    s: int
    phi: float
    ccn_lb: float
    cct_lb: float
    phi_anchors: Dict[str, float]
    phi_monotone_at_anchors: bool


class EmbeddingReport(BaseModel):
    passed: bool
    n: int
    d: int
    identical_pairs: int = 0
    adjacency_mismatches: int = 0
    violations: List[str] = []


class CoverBoundsReport(BaseModel):
    max_clique_size: int
    max_degree: int
    edge_count: int
    thickness: int
    clique_count: int
    thickness_lower: float
    size_lower: float
    thickness_ok: bool
    size_ok: bool


class BlockSummary(BaseModel):
    name: str
    round: int
    palette: int
    used: int
    retries: int

    model_config = ConfigDict(from_attributes=True)


class RepresentationRecord(BaseModel):
    d: int
    labels: List[List[int]]
    extra_coordinate: Optional[str] = None
    extra_coordinates: int = 0


class PragueRequest(BaseModel):
    n: int = Field(..., ge=1, le=512)
    p: float = Field(..., ge=0, le=1)
    seed: int = Field(0, ge=0)
    params: NibbleParams = NibbleParams()
    include_labels: bool = False


class PragueResponse(BaseModel):
    d: int
    cover_colors: int
    extra_coordinate: Optional[str] = None
    extra_coordinates: int = 0
    partition_size: int
    blocks: List[BlockSummary]
    report: EmbeddingReport
    labels: Optional[List[List[int]]] = None
