"""Random graph sampling and clique kernels over bitset adjacency rows"""
from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from app.core.config import FLOAT_CEIL_TOLERANCE
from app.core.exceptions import EdgeListFormatError, InvalidParameterError
from app.engine.rng import Rng
from app.models.graph import Edge, Graph, iter_bits, vertex_mask

logger = logging.getLogger(__name__)


def safe_ceil(x: float) -> int:
    """Ceiling that ignores float noise just above an integer"""
    nearest = round(x)
    if abs(x - nearest) <= FLOAT_CEIL_TOLERANCE * max(1.0, abs(x)):
        return int(nearest)
    return math.ceil(x)


def sample_gnp(n: int, p: float, rng: Rng) -> Graph:
    if n < 1:
        raise InvalidParameterError(f"n must be positive, got {n}")
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError(f"p must lie in [0, 1], got {p}")
    upper = np.triu_indices(n, k=1)
    present = rng.random(len(upper[0])) < p
    adjacency = np.zeros((n, n), dtype=bool)
    adjacency[upper[0][present], upper[1][present]] = True
    adjacency |= adjacency.T
    return Graph.from_adjacency(adjacency)


def complement(g: Graph) -> Graph:
    full = (1 << g.n) - 1
    return Graph(g.n, tuple(full & ~row & ~(1 << v) for v, row in enumerate(g.rows)))


def remove_edges(g: Graph, edges: Iterable[Edge]) -> Graph:
    rows = list(g.rows)
    for u, v in edges:
        rows[u] &= ~(1 << v)
        rows[v] &= ~(1 << u)
    return Graph(g.n, tuple(rows))


def _check_vertex_set(g: Graph, s: Sequence[int]) -> Tuple[int, ...]:
    members = tuple(s)
    if list(members) != sorted(set(members)):
        raise InvalidParameterError(f"vertex set {members} is not sorted and duplicate-free")
    if members and (members[0] < 0 or members[-1] >= g.n):
        raise InvalidParameterError(f"vertex set {members} has ids outside 0..{g.n - 1}")
    return members


def extension_candidates(g: Graph, s: Sequence[int]) -> int:
    """Vertices outside s adjacent to every member of s (all vertices when s is empty)"""
    mask = (1 << g.n) - 1
    for v in s:
        mask &= g.rows[v]
    return mask & ~vertex_mask(s)


def _extend(rows: Tuple[int, ...], cand: int, need: int, prefix: Tuple[int, ...], out: List[Tuple[int, ...]]):
    while cand:
        low = cand & -cand
        v = low.bit_length() - 1
        cand ^= low
        if need == 1:
            out.append(prefix + (v,))
            continue
        nxt = cand & rows[v]
        if nxt.bit_count() >= need - 1:
            _extend(rows, nxt, need - 1, prefix + (v,), out)


def _count(rows: Tuple[int, ...], cand: int, need: int) -> int:
    if need == 0:
        return 1
    if need == 1:
        return cand.bit_count()
    total = 0
    while cand:
        low = cand & -cand
        v = low.bit_length() - 1
        cand ^= low
        nxt = cand & rows[v]
        if nxt.bit_count() >= need - 1:
            total += _count(rows, nxt, need - 1)
    return total


def _validate_clique_query(g: Graph, s: Sequence[int], j: int) -> Tuple[int, ...]:
    members = _check_vertex_set(g, s)
    if j > g.n:
        raise InvalidParameterError(f"j={j} exceeds n={g.n}")
    if len(members) > j:
        raise InvalidParameterError(f"|s|={len(members)} exceeds j={j}")
    return members


def enumerate_cliques(g: Graph, s: Sequence[int], j: int) -> List[Tuple[int, ...]]:
    """All j-sets J containing s whose pairs outside s are edges, sorted lexicographically.

    Pairs inside s are exempt from the edge requirement.
    """
    members = _validate_clique_query(g, s, j)
    need = j - len(members)
    if need == 0:
        return [members]
    extensions: List[Tuple[int, ...]] = []
    _extend(g.rows, extension_candidates(g, members), need, (), extensions)
    return sorted(tuple(sorted(members + ext)) for ext in extensions)


def count_cliques(g: Graph, s: Sequence[int], j: int) -> int:
    """len(enumerate_cliques(g, s, j)) without listing"""
    members = _validate_clique_query(g, s, j)
    return _count(g.rows, extension_candidates(g, members), j - len(members))


def count_common_neighbors(g: Graph, s: Sequence[int]) -> int:
    members = _check_vertex_set(g, s)
    if not members:
        return g.n
    return extension_candidates(g, members).bit_count()


def _dense_edge_counts(g: Graph, edges: Sequence[Edge], k: int) -> np.ndarray:
    """Per-edge triangle (k=3) or 4-clique (k=4) counts from adjacency products"""
    adjacency = g.to_numpy().astype(np.float64)
    us = np.fromiter((u for u, _ in edges), dtype=np.int64, count=len(edges))
    vs = np.fromiter((v for _, v in edges), dtype=np.int64, count=len(edges))
    if k == 3:
        return np.rint((adjacency @ adjacency)[us, vs]).astype(np.int64)
    if not adjacency[us, vs].all():
        raise InvalidParameterError("4-clique counts need every listed pair to be an edge")
    counts = np.zeros(len(edges), dtype=np.int64)
    for u in np.unique(us):
        nbrs = np.flatnonzero(adjacency[u])
        local = adjacency[np.ix_(nbrs, nbrs)]
        # edges inside N(u) ∩ N(v), for every neighbour v of u
        inside = 0.5 * ((local @ local) * local).sum(axis=1)
        selected = np.flatnonzero(us == u)
        counts[selected] = np.rint(inside[np.searchsorted(nbrs, vs[selected])]).astype(np.int64)
    return counts


def per_edge_clique_counts(g: Graph, edges: Sequence[Edge], k: int) -> np.ndarray:
    """|C_{e,k}| for each listed edge, counted in the common neighbourhood of e"""
    if k in (3, 4) and edges:
        return _dense_edge_counts(g, edges, k)
    rows = g.rows
    counts = np.zeros(len(edges), dtype=np.int64)
    for idx, (u, v) in enumerate(edges):
        counts[idx] = _count(rows, rows[u] & rows[v], k - 2)
    return counts


def _pair_prefixes(g: Graph, k: int) -> Tuple[List[Tuple[int, ...]], np.ndarray]:
    """(k-2)-clique prefixes with the number of edges among their common neighbours above the prefix"""
    adjacency = g.to_numpy().astype(np.float64)
    upper = np.triu(adjacency, 1)
    if k == 3:
        counts = 0.5 * ((upper @ adjacency) * upper).sum(axis=1)
        return [(u,) for u in range(g.n)], np.rint(counts).astype(np.int64)
    prefixes: List[Tuple[int, ...]] = []
    parts = []
    for u in range(g.n):
        up = np.flatnonzero(upper[u])
        if len(up) == 0:
            continue
        local = adjacency[np.ix_(up, up)]
        above = np.triu(local, 1)
        parts.append(0.5 * ((above @ local) * above).sum(axis=1))
        prefixes.extend((u, int(v)) for v in up)
    counts = np.concatenate(parts) if parts else np.zeros(0)
    return prefixes, np.rint(counts).astype(np.int64)


def _edges_within(g: Graph, mask: int) -> List[Edge]:
    out: List[Edge] = []
    for w in iter_bits(mask):
        for x in iter_bits(mask & g.rows[w] & ~((1 << (w + 1)) - 1)):
            out.append((w, x))
    return out


def sample_cliques(g: Graph, k: int, q: float, rng: Rng) -> List[Tuple[int, ...]]:
    """Keep each k-clique of g independently with probability q.

    Walks clique prefixes in increasing order; a prefix with c possible
    completions keeps Binomial(c, q) of them, chosen uniformly without
    replacement. For k = 3, 4 the prefixes have k-2 vertices and completions
    are edges among their common neighbours, counted with adjacency products;
    otherwise prefixes have k-1 vertices.
    """
    if k < 2:
        raise InvalidParameterError(f"clique size must be at least 2, got {k}")
    if q <= 0.0:
        return []
    if k in (3, 4):
        prefixes, sizes = _pair_prefixes(g, k)
        kept = rng.binomial(sizes, min(q, 1.0)) if len(prefixes) else np.zeros(0, dtype=np.int64)
        picker = rng.spawn("completions")
        out: List[Tuple[int, ...]] = []
        for idx in np.flatnonzero(kept):
            candidates = _edges_within(g, _completion_mask(g, prefixes[idx]))
            chosen = picker.choice(len(candidates), size=int(kept[idx]), replace=False)
            for c in sorted(int(x) for x in chosen):
                out.append(prefixes[idx] + candidates[c])
        return out

    prefixes = []
    if k == 2:
        prefixes = [(u,) for u in range(g.n)]
    else:
        _extend(g.rows, (1 << g.n) - 1, k - 1, (), prefixes)
    completions = [_completion_mask(g, prefix) for prefix in prefixes]
    sizes = np.fromiter((mask.bit_count() for mask in completions), dtype=np.int64, count=len(prefixes))
    kept = rng.binomial(sizes, min(q, 1.0)) if len(prefixes) else np.zeros(0, dtype=np.int64)
    picker = rng.spawn("completions")
    out = []
    for idx in np.flatnonzero(kept):
        candidates = list(iter_bits(completions[idx]))
        chosen = picker.choice(len(candidates), size=int(kept[idx]), replace=False)
        for c in sorted(int(x) for x in chosen):
            out.append(prefixes[idx] + (candidates[c],))
    return out


def _completion_mask(g: Graph, prefix: Tuple[int, ...]) -> int:
    mask = extension_candidates(g, prefix)
    return mask >> (prefix[-1] + 1) << (prefix[-1] + 1)


def parse_edge_list(text: str) -> Graph:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise EdgeListFormatError("empty edge list")
    try:
        n, m = (int(x) for x in lines[0].split())
    except ValueError as exc:
        raise EdgeListFormatError(f"bad header line {lines[0]!r}: expected 'n m'") from exc
    if n < 1 or m < 0:
        raise EdgeListFormatError(f"bad header values n={n} m={m}")
    if len(lines) - 1 != m:
        raise EdgeListFormatError(f"header announces {m} edges, found {len(lines) - 1}")
    seen = set()
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            u, v = (int(x) for x in line.split())
        except ValueError as exc:
            raise EdgeListFormatError(f"line {lineno}: expected 'u v', got {line!r}") from exc
        if u == v:
            raise EdgeListFormatError(f"line {lineno}: self-loop at {u}")
        if not u < v:
            raise EdgeListFormatError(f"line {lineno}: expected u < v, got {u} {v}")
        if v >= n or u < 0:
            raise EdgeListFormatError(f"line {lineno}: vertex out of range for n={n}")
        if (u, v) in seen:
            raise EdgeListFormatError(f"line {lineno}: duplicate edge {u} {v}")
        seen.add((u, v))
    return Graph.from_edges(n, seen)


def format_edge_list(g: Graph) -> str:
    edges = g.edges()
    lines = [f"{g.n} {len(edges)}"] + [f"{u} {v}" for u, v in edges]
    return "\n".join(lines) + "\n"


def read_edge_list(path: Union[str, Path]) -> Graph:
    return parse_edge_list(Path(path).read_text(encoding="ascii"))


def write_edge_list(g: Graph, path: Union[str, Path]) -> None:
    Path(path).write_text(format_edge_list(g), encoding="ascii")
