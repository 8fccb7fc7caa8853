"""Uniform hypergraph model with per-vertex incidence lists"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, List, Sequence, Tuple

from app.core.exceptions import InvalidParameterError


@dataclass(frozen=True)
class Hypergraph:
    n: int
    r: int
    edges: Tuple[Tuple[int, ...], ...]
    incidence: Tuple[Tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError(f"hypergraph needs at least one vertex, got n={self.n}")
        if self.r < 1:
            raise InvalidParameterError(f"uniformity must be positive, got r={self.r}")
        seen = set()
        incidence: List[List[int]] = [[] for _ in range(self.n)]
        for eid, edge in enumerate(self.edges):
            if len(edge) != self.r:
                raise InvalidParameterError(f"edge {eid} has size {len(edge)}, expected {self.r}")
            if list(edge) != sorted(set(edge)):
                raise InvalidParameterError(f"edge {eid} is not a sorted duplicate-free vertex set")
            if edge[0] < 0 or edge[-1] >= self.n:
                raise InvalidParameterError(f"edge {eid} has a vertex outside 0..{self.n - 1}")
            if edge in seen:
                raise InvalidParameterError(f"edge {edge} repeated in the ground set")
            seen.add(edge)
            for v in edge:
                incidence[v].append(eid)
        object.__setattr__(self, "incidence", tuple(tuple(ids) for ids in incidence))

    @classmethod
    def from_edges(cls, n: int, r: int, edges: Iterable[Sequence[int]]) -> "Hypergraph":
        return cls(n, r, tuple(tuple(sorted(e)) for e in edges))

    @classmethod
    def complete_uniform(cls, n: int, r: int) -> "Hypergraph":
        if r > n:
            raise InvalidParameterError(f"r={r} exceeds n={n}")
        return cls(n, r, tuple(combinations(range(n), r)))

    @classmethod
    def from_cliques(cls, n: int, cliques: Sequence[Sequence[int]]) -> "Hypergraph":
        """Clique hypergraph: one edge per clique, all cliques of one size"""
        sizes = {len(c) for c in cliques}
        if len(sizes) > 1:
            raise InvalidParameterError(f"cliques of mixed sizes {sorted(sizes)}")
        r = sizes.pop() if sizes else 1
        return cls.from_edges(n, r, cliques)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.incidence[v])

    def degrees(self) -> List[int]:
        return [len(ids) for ids in self.incidence]

    def max_degree(self) -> int:
        return max(self.degrees(), default=0)

    def codegrees(self) -> Counter:
        """Counter over vertex pairs (u < v) of the number of edges containing both"""
        counts: Counter = Counter()
        for edge in self.edges:
            counts.update(combinations(edge, 2))
        return counts

    def codegree(self, u: int, v: int) -> int:
        return len(set(self.incidence[u]) & set(self.incidence[v]))
