"""Graph model: adjacency rows as Python int bitsets"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, List, Sequence, Tuple

import numpy as np

from app.core.exceptions import InvalidParameterError

Edge = Tuple[int, int]


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the positions of set bits in increasing order"""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def vertex_mask(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on 0..n-1; rows[v] has bit w set iff {v,w} is an edge.

    Instances are immutable. Edge deletion goes through copy-and-modify helpers.
    """

    n: int
    rows: Tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError(f"graph needs at least one vertex, got n={self.n}")
        if len(self.rows) != self.n:
            raise InvalidParameterError(f"expected {self.n} adjacency rows, got {len(self.rows)}")

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n, tuple([0] * n))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        full = (1 << n) - 1
        return cls(n, tuple(full & ~(1 << v) for v in range(n)))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        rows = [0] * n
        for u, v in edges:
            if u == v:
                raise InvalidParameterError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidParameterError(f"edge ({u},{v}) out of bounds for n={n}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(n, tuple(rows))

    @classmethod
    def from_adjacency(cls, adjacency: np.ndarray) -> "Graph":
        """Build from a symmetric boolean matrix with an all-false diagonal"""
        adjacency = np.asarray(adjacency, dtype=bool)
        n = adjacency.shape[0]
        packed = np.packbits(adjacency, axis=1, bitorder="little")
        return cls(n, tuple(int.from_bytes(row.tobytes(), "little") for row in packed))

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.rows[u] >> v) & 1)

    def neighbors(self, v: int) -> List[int]:
        return list(iter_bits(self.rows[v]))

    def degree(self, v: int) -> int:
        return self.rows[v].bit_count()

    def max_degree(self) -> int:
        return max((row.bit_count() for row in self.rows), default=0)

    @property
    def edge_count(self) -> int:
        return sum(row.bit_count() for row in self.rows) // 2

    def density(self) -> float:
        if self.n < 2:
            return 0.0
        return self.edge_count / (self.n * (self.n - 1) / 2)

    def edges(self) -> List[Edge]:
        """All edges (u, v) with u < v in lexicographic order"""
        out: List[Edge] = []
        for u, row in enumerate(self.rows):
            for v in iter_bits(row >> (u + 1)):
                out.append((u, u + 1 + v))
        return out

    def is_clique(self, vertices: Sequence[int]) -> bool:
        mask = vertex_mask(vertices)
        return all((self.rows[v] | (1 << v)) & mask == mask for v in vertices)

    def to_numpy(self) -> np.ndarray:
        """Dense boolean adjacency matrix"""
        width = (self.n + 7) // 8
        buf = b"".join(row.to_bytes(width, "little") for row in self.rows)
        packed = np.frombuffer(buf, dtype=np.uint8).reshape(self.n, width)
        return np.unpackbits(packed, axis=1, count=self.n, bitorder="little").astype(bool)
