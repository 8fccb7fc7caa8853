"""Experiment configuration and trial record schemas"""
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator

from app.core.config import DEFAULT_PALETTE_DELTA
from app.schemas.audit import AuditSpec
from app.schemas.coloring import SampleSpec
from app.schemas.nibble import QSource

Mode = Literal["partition", "color", "audit", "prague", "lowerbound"]
Number = Union[int, float]

REQUIRED_KEYS: Dict[str, List[str]] = {
    "partition": ["n", "p", "ca", "tau", "beps"],
    "audit": ["n", "p", "ca", "tau", "beps"],
    "prague": ["n", "p", "ca", "tau", "beps"],
    "color": ["n", "r", "m", "sigma"],
    "lowerbound": ["n", "p", "eps"],
}


class GridSpec(BaseModel):
    n: List[int] = []
    p: List[float] = []
    ca: List[float] = [1 / 3]
    tau: List[int] = [2]
    beps: List[float] = [0.1]
    eps: List[float] = [0.1]
    r: List[int] = []
    m: List[int] = []
    q: List[int] = []
    gamma: List[float] = []
    delta: List[float] = []
    sigma: List[float] = [0.5]


class ExperimentConfig(BaseModel):
    mode: Mode
    grid: GridSpec
    seeds: Optional[List[int]] = None
    base_seed: Optional[int] = Field(None, ge=0)
    seed_count: Optional[int] = Field(None, gt=0)
    out_dir: Optional[str] = None
    checkpoints: List[float] = []

    # nibble options
    max_clique_cap: Optional[int] = Field(None, ge=2)
    max_rounds: Optional[int] = Field(None, ge=0)
    trivial_alpha: Optional[float] = Field(None, gt=0)
    allow_q_clamp: bool = True
    q_source: QSource = QSource.PREDICTED
    palette_delta: float = Field(DEFAULT_PALETTE_DELTA, gt=0)

    # coloring options
    coloring_mode: Literal["literal", "inflated"] = "literal"
    sampling: Literal["fixed", "bernoulli"] = "fixed"
    hypergraph_file: Optional[str] = None
    sample_spec: SampleSpec = SampleSpec()

    audit: AuditSpec = AuditSpec()
    save_artifacts: bool = False

    @model_validator(mode="after")
    def check_config(self):
        grid = self.grid
        for key in REQUIRED_KEYS[self.mode]:
            if self.mode == "color" and key in ("n", "r") and self.hypergraph_file:
                continue
            if not getattr(grid, key):
                raise ValueError(f"mode {self.mode!r} needs a non-empty grid.{key}")
        if self.mode == "color":
            needed = "gamma" if self.coloring_mode == "literal" else "delta"
            if not getattr(grid, needed):
                raise ValueError(f"coloring mode {self.coloring_mode!r} needs a non-empty grid.{needed}")
        if not self.replicate_seeds():
            raise ValueError("no seeds: give a non-empty seeds list or base_seed with seed_count")
        if any(s < 0 or s >= 2 ** 64 for s in self.seeds or []):
            raise ValueError("seeds must be 64-bit unsigned integers")

        strict_p = self.mode in ("lowerbound", "audit", "partition")
        for p in grid.p:
            if not (0.0 < p < 1.0 if strict_p else 0.0 <= p <= 1.0):
                raise ValueError(f"p={p} outside the allowed range for mode {self.mode!r}")
        if any(n < 2 for n in grid.n):
            raise ValueError("every n must be at least 2")
        if any(ca <= 0 for ca in grid.ca):
            raise ValueError("ca must be positive")
        if any(tau < 2 for tau in grid.tau):
            raise ValueError("tau must be at least 2")
        if any(not 0.0 < b < 1.0 for b in grid.beps):
            raise ValueError("beps must lie in (0, 1)")
        if any(not 0.0 < e < 1.0 for e in grid.eps):
            raise ValueError("eps must lie in (0, 1)")
        if any(r < 2 for r in grid.r) or any(m < 1 for m in grid.m) or any(q < 1 for q in grid.q):
            raise ValueError("need r >= 2, m >= 1 and q >= 1")
        if any(not 0.0 < g < 1.0 for g in grid.gamma):
            raise ValueError("gamma must lie in (0, 1)")
        if any(d <= 0 for d in grid.delta) or any(s <= 0 for s in grid.sigma):
            raise ValueError("delta and sigma must be positive")
        if any(not 0.0 <= t < 1.0 for t in self.checkpoints):
            raise ValueError("checkpoints must lie in [0, 1)")
        return self

    def replicate_seeds(self) -> List[int]:
        if self.seeds:
            return list(self.seeds)
        if self.base_seed is not None and self.seed_count:
            return [self.base_seed] * self.seed_count
        return []

    def grid_keys(self) -> List[str]:
        keys = list(REQUIRED_KEYS[self.mode])
        if self.mode == "color":
            if self.hypergraph_file:
                keys = [k for k in keys if k not in ("n", "r")]
            keys.append("gamma" if self.coloring_mode == "literal" else "delta")
            if self.grid.q:
                keys.append("q")
        if self.mode == "prague":
            keys.append("eps")
        return keys


class TrialRecord(BaseModel):
    mode: Mode
    grid_index: int
    replicate: int
    coords: Dict[str, Number]
    seed: int
    status: Literal["ok", "error"]
    error: Optional[str] = None
    metrics: Dict[str, Optional[float]] = {}
    wall_time_s: float = 0.0


class JobStatus(BaseModel):
    job_id: str
    status: Literal["pending", "running", "done", "failed"]
    out_dir: str
    trials: int = 0
    errors: int = 0
    detail: Optional[str] = None
