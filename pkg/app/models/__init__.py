"""In-memory domain models"""
from app.models.graph import Graph, iter_bits
from app.models.hypergraph import Hypergraph
from app.models.partition import CliquePartition, NibbleRun, PartitionEntry, Provenance, RoundOutput
from app.models.coloring import ColorBlock, ColoredCover, ColoringRun, EdgeColoring, ProductRepresentation

__all__ = [
    "Graph", "iter_bits",
    "Hypergraph",
    "CliquePartition", "NibbleRun", "PartitionEntry", "Provenance", "RoundOutput",
    "ColorBlock", "ColoredCover", "ColoringRun", "EdgeColoring", "ProductRepresentation",
]
