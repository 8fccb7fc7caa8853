"""Shared fixtures"""
import pytest

from app.engine.graph_core import sample_gnp
from app.engine.rng import Rng
from app.models.graph import Graph


@pytest.fixture
def triangle() -> Graph:
    return Graph.complete(3)


@pytest.fixture
def path3() -> Graph:
    return Graph.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def gnp_small() -> Graph:
    return sample_gnp(40, 0.5, Rng(7, "fixture"))


@pytest.fixture
def make_rng():
    def factory(seed: int = 0, label: str = "test") -> Rng:
        return Rng(seed, label)
    return factory
