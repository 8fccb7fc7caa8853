"""Clique partition and nibble round records"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import TYPE_CHECKING, Dict, Iterator, List, Optional, Tuple

from app.models.graph import Edge, Graph

if TYPE_CHECKING:
    from app.schemas.nibble import Schedule


class Provenance(str, Enum):
    GAMMA_STAR = "gamma_star"
    D = "d"
    S = "s"
    FINAL = "final"


@dataclass(frozen=True)
class PartitionEntry:
    vertices: Tuple[int, ...]
    tag: Provenance
    round: int

    def pairs(self) -> Iterator[Edge]:
        return combinations(self.vertices, 2)


@dataclass
class CliquePartition:
    entries: List[PartitionEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def cliques(self) -> List[Tuple[int, ...]]:
        return [entry.vertices for entry in self.entries]

    def max_clique_size(self) -> int:
        return max((len(entry.vertices) for entry in self.entries), default=0)

    def thickness(self, n: int) -> int:
        per_vertex = [0] * n
        for entry in self.entries:
            for v in entry.vertices:
                per_vertex[v] += 1
        return max(per_vertex, default=0)

    def tag_counts(self) -> Dict[str, int]:
        counts = Counter(entry.tag.value for entry in self.entries)
        return {tag.value: counts.get(tag.value, 0) for tag in Provenance}


@dataclass
class RoundOutput:
    """Result of one nibble round; edge lists hold (u, v) with u < v"""

    round_index: int
    k: int
    q: float
    q_clamped: bool = False
    skipped: bool = False
    gamma: List[Tuple[int, ...]] = field(default_factory=list)
    gamma_star: List[Tuple[int, ...]] = field(default_factory=list)
    d_edges: List[Edge] = field(default_factory=list)
    s_edges: List[Edge] = field(default_factory=list)
    removed_edge_count: int = 0
    clique_count: int = 0
    observed_mu2: float = 0.0
    edges_before: int = 0
    edges_after: int = 0

    @property
    def stabilized_count(self) -> int:
        return len(self.s_edges)


@dataclass
class NibbleRun:
    """Everything a partition run produced, kept for assembly and audits"""

    n: int
    p: float
    schedule: Optional["Schedule"]
    rounds: List[RoundOutput]
    final_graph: Graph
    partition: CliquePartition
    trivial: bool = False

    @property
    def final_edges(self) -> List[Edge]:
        return self.final_graph.edges()
