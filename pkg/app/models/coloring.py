"""Coloring runs, colored covers and product representations"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from app.models.graph import Edge
from app.models.partition import PartitionEntry


@dataclass
class ColoringRun:
    """One greedy coloring of an edge sequence.

    colors[t] is the 0-based color of step t+1; it is shorter than the sequence
    when the run stopped at failure_index (1-based step with no color left).
    used holds the final per-vertex used-color bitmasks.
    """

    q: int
    edge_sequence: List[int]
    colors: List[int]
    failure_index: Optional[int]
    used: List[int]

    @property
    def m(self) -> int:
        return len(self.edge_sequence)

    @property
    def colored_steps(self) -> int:
        return len(self.colors)

    @property
    def succeeded(self) -> bool:
        return self.failure_index is None

    def colors_used(self) -> int:
        return len(set(self.colors))


@dataclass
class EdgeColoring:
    edges: List[Edge]
    colors: List[int]
    num_colors: int
    max_degree: int


@dataclass
class ColorBlock:
    """One palette-disjoint block of the assembled coloring"""

    name: str
    round: int
    palette: int
    used: int = 0
    retries: int = 0


@dataclass
class ColoredCover:
    entries: List[PartitionEntry]
    colors: List[int]
    d: int
    blocks: List[ColorBlock] = field(default_factory=list)

    def color_classes(self) -> List[List[int]]:
        classes: List[List[int]] = [[] for _ in range(self.d)]
        for idx, color in enumerate(self.colors):
            classes[color].append(idx)
        return classes


@dataclass
class ProductRepresentation:
    d: int
    labels: List[Tuple[int, ...]]
    extra_coordinate: Optional[str] = None
    extra_coordinates: int = 0
