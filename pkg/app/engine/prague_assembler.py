"""Colored clique partitions of the complement and certified product representations"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.config import DEFAULT_PALETTE_DELTA, PALETTE_MAX_RETRIES, PHI_ANCHORS
from app.core.exceptions import ColoringFailedError, InvalidParameterError, InvariantViolationError, VerificationError
from app.engine.graph_core import complement, safe_ceil
from app.engine.hypergraph_coloring import graph_edge_color_greedy, greedy_color, sample_edge_order
from app.engine.nibble_partition import run_nibble
from app.engine.rng import Rng
from app.models.coloring import ColorBlock, ColoredCover, ProductRepresentation
from app.models.graph import Edge, Graph
from app.models.hypergraph import Hypergraph
from app.models.partition import CliquePartition, NibbleRun, PartitionEntry, Provenance, RoundOutput
from app.schemas.nibble import NibbleParams
from app.schemas.prague import CoverBoundsReport, EmbeddingReport, LowerBounds, RepresentationRecord

logger = logging.getLogger(__name__)


@dataclass
class PragueOutcome:
    d: int
    representation: ProductRepresentation
    cover: ColoredCover
    run: NibbleRun
    report: EmbeddingReport


def _gamma_palette(n: int, k: int, cliques: Sequence[Tuple[int, ...]], delta: float) -> int:
    degree = [0] * n
    for clique in cliques:
        for v in clique:
            degree[v] += 1
    return max(max(degree), math.ceil((1.0 + 2.0 * delta) * k * len(cliques) / n), 1)


def _color_gamma(n: int, out: RoundOutput, palette: int, rng: Rng) -> Tuple[Dict[Tuple[int, ...], int], ColorBlock]:
    hypergraph = Hypergraph.from_cliques(n, out.gamma)
    block = ColorBlock(name="gamma", round=out.round_index, palette=palette)
    for attempt in range(PALETTE_MAX_RETRIES + 1):
        attempt_rng = rng.spawn(f"try-{attempt}")
        order = sample_edge_order(hypergraph, attempt_rng.spawn("order"))
        run = greedy_color(hypergraph, order, block.palette, attempt_rng.spawn("colors"))
        if run.succeeded:
            return {hypergraph.edges[eid]: color for eid, color in zip(run.edge_sequence, run.colors)}, block
        logger.warning("round %d: greedy coloring failed at step %d with %d colors, doubling palette",
                       out.round_index, run.failure_index, block.palette)
        block.palette *= 2
        block.retries += 1
    raise ColoringFailedError(f"round {out.round_index}: no proper coloring after {PALETTE_MAX_RETRIES} retries")


def color_partition_assembled(
    n: int,
    round_outputs: Sequence[RoundOutput],
    final_edges: Sequence[Edge],
    rng: Rng,
    q_per_gamma: Optional[Sequence[int]] = None,
    delta: float = DEFAULT_PALETTE_DELTA,
) -> ColoredCover:
    """Color Gamma_i, D_i, S_i and the final edges from disjoint palette blocks.

    Each Gamma_i is colored as a clique hypergraph by the greedy random process;
    the edge blocks use first-fit graph edge coloring. Unused colors are then
    compacted away so d = 1 + max color.
    """
    entries: List[PartitionEntry] = []
    raw_colors: List[int] = []
    blocks: List[ColorBlock] = []
    offset = 0

    def add_edge_block(name: str, round_index: int, tag: Provenance, edges: Sequence[Edge]) -> None:
        nonlocal offset
        if not edges:
            return
        coloring = graph_edge_color_greedy(edges)
        for edge, color in zip(coloring.edges, coloring.colors):
            entries.append(PartitionEntry(edge, tag, round_index))
            raw_colors.append(offset + color)
        blocks.append(ColorBlock(name=name, round=round_index, palette=coloring.num_colors))
        offset += coloring.num_colors

    for idx, out in enumerate(round_outputs):
        if out.gamma_star:
            palette = q_per_gamma[idx] if q_per_gamma is not None else _gamma_palette(n, out.k, out.gamma, delta)
            color_of, block = _color_gamma(n, out, palette, rng.spawn(f"gamma-{out.round_index}"))
            for clique in out.gamma_star:
                entries.append(PartitionEntry(clique, Provenance.GAMMA_STAR, out.round_index))
                raw_colors.append(offset + color_of[clique])
            blocks.append(block)
            offset += block.palette
        add_edge_block("d", out.round_index, Provenance.D, out.d_edges)
        add_edge_block("s", out.round_index, Provenance.S, out.s_edges)
    add_edge_block("final", len(round_outputs), Provenance.FINAL, final_edges)

    remap = {color: new for new, color in enumerate(sorted(set(raw_colors)))}
    colors = [remap[c] for c in raw_colors]
    start = 0
    for block in blocks:
        block.used = sum(1 for c in remap if start <= c < start + block.palette)
        start += block.palette
    cover = ColoredCover(entries=entries, colors=colors, d=len(remap), blocks=blocks)
    problems = verify_colored_cover(cover)
    if problems:
        raise InvariantViolationError("assembled coloring is not proper: " + "; ".join(problems[:10]))
    return cover


def color_nibble_run(run: NibbleRun, rng: Rng, delta: float = DEFAULT_PALETTE_DELTA) -> ColoredCover:
    return color_partition_assembled(run.n, run.rounds, run.final_edges, rng, delta=delta)


def verify_colored_cover(cover: ColoredCover) -> List[str]:
    """Violations of 'each color class is a vertex-disjoint union of cliques'"""
    owner: Dict[Tuple[int, int], int] = {}
    problems: List[str] = []
    for idx, (entry, color) in enumerate(zip(cover.entries, cover.colors)):
        if not 0 <= color < cover.d:
            problems.append(f"clique {list(entry.vertices)} has color {color} outside [0, {cover.d})")
        for v in entry.vertices:
            other = owner.get((color, v))
            if other is not None:
                problems.append(f"cliques {list(cover.entries[other].vertices)} and {list(entry.vertices)} "
                                f"share vertex {v} and color {color}")
            else:
                owner[(color, v)] = idx
    return problems


def _coordinates(n: int, cover: ColoredCover) -> List[List[int]]:
    member: List[Dict[int, int]] = [dict() for _ in range(cover.d)]
    for idx, (entry, color) in enumerate(zip(cover.entries, cover.colors)):
        for v in entry.vertices:
            member[color][v] = idx
    coordinates = []
    for c in range(cover.d):
        labels, local, fresh = [], {}, 0
        for v in range(n):
            clique = member[c].get(v)
            if clique is None:
                labels.append(None)
            else:
                if clique not in local:
                    local[clique] = len(local)
                labels.append(local[clique])
        fresh = len(local)
        for v in range(n):
            if labels[v] is None:
                labels[v] = fresh
                fresh += 1
        coordinates.append(labels)
    return coordinates


def _pair_status(g: Graph, labels: np.ndarray) -> Tuple[List[Edge], List[Edge]]:
    """(non-adjacent pairs equal in no coordinate, pairs equal in every coordinate)"""
    adjacency = g.to_numpy()
    unwitnessed, identical = [], []
    d = labels.shape[1]
    for u in range(g.n - 1):
        rest = labels[u + 1:]
        equal = rest == labels[u]
        somewhere = equal.any(axis=1) if d else np.zeros(len(rest), dtype=bool)
        everywhere = equal.all(axis=1) if d else np.ones(len(rest), dtype=bool)
        for offset in np.flatnonzero(~somewhere & ~adjacency[u, u + 1:]):
            unwitnessed.append((u, u + 1 + int(offset)))
        for offset in np.flatnonzero(everywhere):
            identical.append((u, u + 1 + int(offset)))
    return unwitnessed, identical


def _shared_label_layer(g: Graph, pairs: Sequence[Edge]) -> Tuple[List[int], List[Edge]]:
    """One coordinate grouping endpoints of pairs into vertex-disjoint cliques of the complement.

    Returns the labels and the pairs this coordinate could not place in a common group.
    """
    group_of: Dict[int, int] = {}
    groups: List[List[int]] = []
    leftover: List[Edge] = []
    for u, v in pairs:
        gu, gv = group_of.get(u), group_of.get(v)
        if gu is not None and gu == gv:
            continue
        if gu is None and gv is None:
            group_of[u] = group_of[v] = len(groups)
            groups.append([u, v])
            continue
        if gu is None or gv is None:
            joined, newcomer = (gv, u) if gu is None else (gu, v)
            if all(not g.has_edge(newcomer, w) for w in groups[joined]):
                group_of[newcomer] = joined
                groups[joined].append(newcomer)
                continue
        leftover.append((u, v))
    labels, fresh = [], len(groups)
    for v in range(g.n):
        if v in group_of:
            labels.append(group_of[v])
        else:
            labels.append(fresh)
            fresh += 1
    return labels, leftover


def _shared_label_columns(g: Graph, pairs: Sequence[Edge]) -> List[List[int]]:
    columns = []
    remaining = list(pairs)
    while remaining:
        column, remaining = _shared_label_layer(g, remaining)
        columns.append(column)
    return columns


def build_product_representation(g: Graph, cover: ColoredCover) -> ProductRepresentation:
    """One coordinate per color class, plus extra coordinates for the boundary cases.

    Non-adjacent pairs that share no label get "shared" coordinates; vertices whose
    vectors still coincide get one "distinct" coordinate.
    """
    coordinates = _coordinates(g.n, cover)
    labels = np.array(coordinates, dtype=np.int64).T.reshape(g.n, len(coordinates))
    unwitnessed, identical = _pair_status(g, labels)
    extra = None
    columns: List[List[int]] = []
    if unwitnessed:
        extra = "shared"
        columns = _shared_label_columns(g, unwitnessed)
        labels = np.column_stack([labels] + [np.asarray(c, dtype=np.int64) for c in columns])
        _, identical = _pair_status(g, labels)
    if identical and g.n >= 2:
        extra = extra or "distinct"
        columns.append(list(range(g.n)))
        labels = np.column_stack([labels, np.arange(g.n, dtype=np.int64)])
    if columns:
        logger.info("adding %d %s coordinate(s) (%d unwitnessed, %d identical pairs)",
                    len(columns), extra, len(unwitnessed), len(identical))
    rep = ProductRepresentation(d=labels.shape[1], labels=[tuple(int(x) for x in row) for row in labels],
                                extra_coordinate=extra, extra_coordinates=len(columns))
    report = verify_embedding(g, rep)
    if not report.passed:
        raise VerificationError("product representation failed verification", report.violations)
    return rep


def verify_embedding(g: Graph, rep: ProductRepresentation, max_violations: int = 10) -> EmbeddingReport:
    if len(rep.labels) != g.n:
        raise InvalidParameterError(f"representation has {len(rep.labels)} vectors for {g.n} vertices")
    if any(len(vec) != rep.d for vec in rep.labels):
        raise InvalidParameterError(f"every label vector must have length d={rep.d}")
    labels = np.asarray(rep.labels, dtype=np.int64).reshape(g.n, rep.d)
    adjacency = g.to_numpy()
    identical = mismatches = 0
    violations: List[str] = []
    for u in range(g.n - 1):
        rest = labels[u + 1:]
        equal = rest == labels[u]
        somewhere = equal.any(axis=1) if rep.d else np.zeros(len(rest), dtype=bool)
        everywhere = equal.all(axis=1) if rep.d else np.ones(len(rest), dtype=bool)
        wrong = somewhere == adjacency[u, u + 1:]
        for offset in np.flatnonzero(everywhere):
            identical += 1
            if len(violations) < max_violations:
                violations.append(f"vertices {u} and {u + 1 + int(offset)} have identical vectors")
        for offset in np.flatnonzero(wrong):
            mismatches += 1
            v = u + 1 + int(offset)
            if len(violations) < max_violations:
                kind = "adjacent but equal in a coordinate" if adjacency[u, v] else "non-adjacent but differ everywhere"
                violations.append(f"vertices {u} and {v} are {kind}")
    return EmbeddingReport(passed=identical == 0 and mismatches == 0, n=g.n, d=rep.d,
                           identical_pairs=identical, adjacency_mismatches=mismatches, violations=violations)


def phi(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise InvalidParameterError(f"phi needs 0 < p < 1, got {p}")
    return (1.0 - p) * math.log1p(-p) / (p * math.log(p))


def lower_bounds(n: int, p: float, eps: float) -> LowerBounds:
    if not 0.0 < p < 1.0:
        raise InvalidParameterError(f"lower bounds need 0 < p < 1, got {p}")
    if not 0.0 < eps < 1.0:
        raise InvalidParameterError(f"lower bounds need 0 < eps < 1, got {eps}")
    if n < 2:
        raise InvalidParameterError(f"lower bounds need n >= 2, got {n}")
    s = max(safe_ceil(2.0 * math.log(n) / math.log(1.0 / p)), 2)
    value = phi(p)
    factor = (1.0 - eps) * (1.0 + value)
    anchors = {f"{a:g}": phi(a) for a in PHI_ANCHORS}
    anchor_values = list(anchors.values())
    return LowerBounds(
        n=n, p=p, eps=eps, s=s, phi=value,
        ccn_lb=factor * math.comb(n, 2) * p / math.comb(s, 2),
        cct_lb=factor * n * p / (s - 1),
        phi_anchors=anchors,
        phi_monotone_at_anchors=all(a < b for a, b in zip(anchor_values, anchor_values[1:])),
    )


def trivial_cover_bounds(g: Graph, part: CliquePartition) -> CoverBoundsReport:
    """Degree and size lower bounds any partition with these clique sizes must meet"""
    omega = part.max_clique_size()
    thickness = part.thickness(g.n)
    max_degree = g.max_degree()
    edge_count = g.edge_count
    thickness_lower = max_degree / (omega - 1) if omega >= 2 else 0.0
    size_lower = edge_count / math.comb(omega, 2) if omega >= 2 else 0.0
    return CoverBoundsReport(
        max_clique_size=omega, max_degree=max_degree, edge_count=edge_count,
        thickness=thickness, clique_count=len(part),
        thickness_lower=thickness_lower, size_lower=size_lower,
        thickness_ok=thickness_lower <= thickness, size_ok=size_lower <= len(part),
    )


def prague_upper(g: Graph, params: NibbleParams, rng: Rng, delta: float = DEFAULT_PALETTE_DELTA) -> PragueOutcome:
    """Partition the complement, color it, and return a verified representation of g"""
    co = complement(g)
    run = run_nibble(co, params, rng.spawn("partition"))
    cover = color_nibble_run(run, rng.spawn("coloring"), delta=delta)
    rep = build_product_representation(g, cover)
    report = verify_embedding(g, rep)
    if not report.passed:
        raise VerificationError("prague_upper produced an unverified representation", report.violations)
    logger.info("prague: n=%d d=%d (cover colors %d, extra=%s)", g.n, rep.d, cover.d, rep.extra_coordinate)
    return PragueOutcome(d=rep.d, representation=rep, cover=cover, run=run, report=report)


def write_representation_json(rep: ProductRepresentation, path: Union[str, Path]) -> None:
    record = RepresentationRecord(d=rep.d, labels=[list(v) for v in rep.labels], extra_coordinate=rep.extra_coordinate,
                                  extra_coordinates=rep.extra_coordinates)
    Path(path).write_text(record.model_dump_json(), encoding="utf-8")
