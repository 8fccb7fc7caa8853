"""Random greedy edge coloring of random hypergraph edge sequences, with trajectory audits"""
from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp

from app.core.exceptions import HypergraphFormatError, InvalidParameterError, InvariantViolationError
from app.engine.rng import Rng
from app.models.coloring import ColoringRun, EdgeColoring
from app.models.graph import Edge
from app.models.hypergraph import Hypergraph
from app.schemas.coloring import (
    ColoringPlan,
    ColoringVerification,
    RegularityReport,
    SampleSpec,
    TrajectorySnapshot,
)

logger = logging.getLogger(__name__)


def check_regularity(h: Hypergraph) -> RegularityReport:
    if h.edge_count == 0:
        raise InvalidParameterError("regularity needs a non-empty hypergraph")
    degrees = np.asarray(h.degrees(), dtype=float)
    D = h.r * h.edge_count / h.n
    max_dev = float(np.max(np.abs(degrees - D)) / D)
    codegrees = h.codegrees()
    max_codeg = max(codegrees.values(), default=0)

    log_n = math.log(h.n) if h.n > 1 else 0.0
    if log_n == 0.0:
        sigma = math.inf if max_dev == 0.0 and max_codeg == 0 else -math.inf
    else:
        degree_limit = math.inf if max_dev == 0.0 else -math.log(max_dev) / log_n
        codegree_limit = math.inf if max_codeg == 0 else math.log(D / max_codeg) / log_n
        sigma = min(degree_limit, codegree_limit)
        if sigma <= 0.0:
            sigma = -math.inf
    return RegularityReport(n=h.n, r=h.r, edge_count=h.edge_count, D_estimate=D,
                            max_degree_deviation=max_dev, max_codegree=max_codeg, sigma_implied=sigma)


def sample_sequence_fixed_m(h: Hypergraph, m: int, rng: Rng) -> List[int]:
    """m edge ids drawn uniformly with replacement"""
    if m < 1:
        raise InvalidParameterError(f"sequence length must be positive, got {m}")
    if h.edge_count == 0:
        raise InvalidParameterError("cannot sample edges of an empty hypergraph")
    return [int(x) for x in rng.integers(0, h.edge_count, size=m)]


def sample_edge_order(h: Hypergraph, rng: Rng) -> List[int]:
    """Every edge id exactly once, in uniformly random order"""
    return [int(x) for x in rng.permutation(h.edge_count)]


def sample_subhypergraph_bernoulli(h: Hypergraph, q_incl: float, rng: Rng) -> Hypergraph:
    if not 0.0 <= q_incl <= 1.0:
        raise InvalidParameterError(f"inclusion probability must lie in [0, 1], got {q_incl}")
    keep = rng.random(h.edge_count) < q_incl
    return Hypergraph(h.n, h.r, tuple(e for e, kept in zip(h.edges, keep) if kept))


def _nth_set_bit(mask: int, j: int) -> int:
    """Position of the j-th (0-based) set bit of mask"""
    lo, hi = 0, mask.bit_length() - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if (mask & ((2 << mid) - 1)).bit_count() > j:
            hi = mid
        else:
            lo = mid + 1
    return lo


def greedy_color(h: Hypergraph, sequence: Sequence[int], q: int, rng: Rng) -> ColoringRun:
    """Color the sequence in order, each step uniformly among colors unused at its vertices.

    Colors are 0..q-1. The run stops at the first step with no available color.
    """
    if q < 1:
        raise InvalidParameterError(f"palette size must be positive, got {q}")
    used = [0] * h.n
    full = (1 << q) - 1
    draws = rng.random(len(sequence))
    colors: List[int] = []
    failure_index = None
    for step, eid in enumerate(sequence):
        edge = h.edges[eid]
        busy = 0
        for v in edge:
            busy |= used[v]
        available = full & ~busy
        size = available.bit_count()
        if size == 0:
            failure_index = step + 1
            break
        color = _nth_set_bit(available, min(int(draws[step] * size), size - 1))
        bit = 1 << color
        for v in edge:
            used[v] |= bit
        colors.append(color)
    if failure_index is not None:
        logger.debug("greedy coloring with q=%d failed at step %d of %d", q, failure_index, len(sequence))
    return ColoringRun(q=q, edge_sequence=list(sequence), colors=colors,
                       failure_index=failure_index, used=used)


def iter_used_states(h: Hypergraph, run: ColoringRun, steps: Sequence[int]) -> Iterator[Tuple[int, List[int]]]:
    """Replay the run, yielding (step, per-vertex used masks after that many colored steps)"""
    used = [0] * h.n
    done = 0
    for step in sorted(steps):
        if step > run.colored_steps:
            raise InvalidParameterError(f"step {step} beyond the {run.colored_steps} colored steps")
        while done < step:
            bit = 1 << run.colors[done]
            for v in h.edges[run.edge_sequence[done]]:
                used[v] |= bit
            done += 1
        yield step, list(used)


def available_colors(used: Sequence[int], vertices: Sequence[int], q: int) -> int:
    """Bitmask of colors in [q] unused at every vertex of the set"""
    busy = 0
    for v in vertices:
        busy |= used[v]
    return ((1 << q) - 1) & ~busy


def available_colors_from_history(h: Hypergraph, run: ColoringRun, step: int, vertices: Sequence[int]) -> List[int]:
    """Colors not carried by any of the first `step` sequence edges meeting the vertex set"""
    members = set(vertices)
    taken = set()
    for t in range(min(step, run.colored_steps)):
        if members.intersection(h.edges[run.edge_sequence[t]]):
            taken.add(run.colors[t])
    return [c for c in range(run.q) if c not in taken]


def verify_coloring(h: Hypergraph, run: ColoringRun, max_violations: int = 10) -> ColoringVerification:
    """Exhaustive properness: at each vertex the colors of incident steps are distinct"""
    seen: List[Dict[int, int]] = [dict() for _ in range(h.n)]
    conflicts = 0
    out_of_palette = 0
    violations: List[str] = []
    for t, color in enumerate(run.colors):
        if not 0 <= color < run.q:
            out_of_palette += 1
            if len(violations) < max_violations:
                violations.append(f"step {t + 1} color {color} outside palette {run.q}")
        for v in h.edges[run.edge_sequence[t]]:
            earlier = seen[v].get(color)
            if earlier is not None:
                conflicts += 1
                if len(violations) < max_violations:
                    violations.append(f"steps {earlier + 1} and {t + 1} share vertex {v} and color {color}")
            else:
                seen[v][color] = t
    return ColoringVerification(passed=conflicts == 0 and out_of_palette == 0, steps_checked=run.colored_steps,
                                conflicts=conflicts, out_of_palette=out_of_palette, violations=violations)


def _check_t(t: float) -> None:
    if not 0.0 <= t < 1.0:
        raise InvalidParameterError(f"time must lie in [0, 1), got {t}")


def q_hat(t: float, r: int, q: float) -> float:
    _check_t(t)
    return (1.0 - t) ** r * q


def y_hat(t: float, r: int, D: float) -> float:
    _check_t(t)
    return (1.0 - t) ** (r - 1) * D


def e_hat(t: float, r: int, n: int, sigma: float) -> float:
    _check_t(t)
    return (1.0 - t) ** (-9 * r) * n ** (-sigma / 3.0)


def trajectory_audit(
    run: ColoringRun,
    h: Hypergraph,
    checkpoints: Sequence[float],
    sigma: float,
    sample_spec: Optional[SampleSpec] = None,
    rng: Optional[Rng] = None,
    gamma: Optional[float] = None,
    horizon: Optional[int] = None,
) -> List[TrajectorySnapshot]:
    """Measure |Q_e| and |Y_vc| at checkpoint times against their predicted trajectories.

    Time is t = step / horizon, horizon defaulting to the sequence length.
    Checkpoints past a failure or past the colored prefix are skipped.
    """
    sample_spec = sample_spec or SampleSpec()
    rng = rng or Rng(0, "trajectory")
    m = horizon or run.m
    if gamma is not None:
        limit = math.floor((1.0 - gamma) * m) / m
        bad = [t for t in checkpoints if not 0.0 <= t <= limit]
        if bad:
            raise InvalidParameterError(f"checkpoints {bad} outside [0, {limit:.4f}]")
    steps = {}
    for t in checkpoints:
        _check_t(t)
        step = math.floor(t * m)
        if step <= run.colored_steps:
            steps[step] = t
        else:
            logger.info("checkpoint t=%.3f (step %d) lies after failure at step %s", t, step, run.failure_index)
    if not steps:
        return []

    if h.edge_count <= sample_spec.max_edges:
        edge_ids = np.arange(h.edge_count)
    else:
        edge_ids = rng.spawn("edges").choice(h.edge_count, size=sample_spec.edge_samples, replace=False)
    pair_rng = rng.spawn("pairs")
    pair_vertices = pair_rng.integers(0, h.n, size=sample_spec.pair_samples)
    pair_colors = pair_rng.integers(0, run.q, size=sample_spec.pair_samples)
    D = h.r * h.edge_count / h.n

    snapshots = []
    for step, used in iter_used_states(h, run, list(steps)):
        t = steps[step]
        q_sizes = np.array([available_colors(used, h.edges[eid], run.q).bit_count() for eid in edge_ids], dtype=float)
        y_sizes = np.array([count_colorable_edges(h, used, int(v), int(c)) for v, c in zip(pair_vertices, pair_colors)], dtype=float)
        qh, yh, eh = q_hat(t, h.r, run.q), y_hat(t, h.r, D), e_hat(t, h.r, h.n, sigma)
        q_plus, q_minus = q_sizes - qh - eh * qh, qh - q_sizes - eh * qh
        y_plus, y_minus = y_sizes - yh - eh * yh, yh - y_sizes - eh * yh
        snapshots.append(TrajectorySnapshot(
            step=step, t=t,
            q_min=float(q_sizes.min()), q_mean=float(q_sizes.mean()), q_max=float(q_sizes.max()),
            y_min=float(y_sizes.min()), y_mean=float(y_sizes.mean()), y_max=float(y_sizes.max()),
            q_hat=qh, y_hat=yh, e_hat=eh,
            q_max_rel_dev=float(np.max(np.abs(q_sizes / qh - 1.0))),
            y_max_rel_dev=float(np.max(np.abs(y_sizes / yh - 1.0))) if yh > 0 else math.inf,
            q_plus_max=float(q_plus.max()), q_minus_max=float(q_minus.max()),
            y_plus_max=float(y_plus.max()), y_minus_max=float(y_minus.max()),
            q_band_violation_fraction=float(np.mean((q_plus > 0) | (q_minus > 0))),
            y_band_violation_fraction=float(np.mean((y_plus > 0) | (y_minus > 0))),
            edges_evaluated=len(edge_ids), pairs_evaluated=len(pair_vertices),
        ))
    return snapshots


def count_colorable_edges(h: Hypergraph, used: Sequence[int], v: int, c: int) -> int:
    """|Y_vc|: edges at v whose other vertices have not used color c"""
    bit = 1 << c
    count = 0
    for eid in h.incidence[v]:
        busy = 0
        for w in h.edges[eid]:
            if w != v:
                busy |= used[w]
        if not busy & bit:
            count += 1
    return count


def predict_trajectory(r: int, t_grid: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """Integrate f' = -r g, g' = -(r-1) g^2 / f from f(0) = g(0) = 1.

    f and g are the expected fractions |Q_e| / q and |Y_vc| / D.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0 or t_grid.min() < 0.0 or t_grid.max() >= 1.0:
        raise InvalidParameterError("trajectory grid must be non-empty and lie in [0, 1)")
    if t_grid.max() == 0.0:
        return np.ones_like(t_grid), np.ones_like(t_grid)

    def rhs(_t, y):
        f, g = y
        return [-r * g, -(r - 1) * g * g / f]

    solution = solve_ivp(rhs, (0.0, float(t_grid.max())), [1.0, 1.0], t_eval=np.sort(t_grid),
                         rtol=1e-10, atol=1e-12)
    order = np.argsort(np.argsort(t_grid))
    return solution.y[0][order], solution.y[1][order]


def fit_decay_exponent(snapshots: Sequence[TrajectorySnapshot], t_min: float = 0.1, t_max: float = 0.7) -> float:
    """Slope of log mean|Q_e| against log(1 - t) over the window"""
    points = [(s.t, s.q_mean) for s in snapshots if t_min <= s.t <= t_max and s.q_mean > 0]
    if len(points) < 2:
        raise InvalidParameterError(f"need at least two snapshots in [{t_min}, {t_max}] to fit an exponent")
    ts, qs = np.array(points).T
    slope, _ = np.polyfit(np.log1p(-ts), np.log(qs), 1)
    return float(slope)


def graph_edge_color_greedy(edges: Sequence[Edge]) -> EdgeColoring:
    """First-fit proper edge coloring over the edges in sorted order"""
    ordered = sorted(tuple(sorted(e)) for e in edges)
    if len(set(ordered)) != len(ordered):
        raise InvalidParameterError("edge list has duplicates")
    if any(u == v for u, v in ordered):
        raise InvalidParameterError("edge list has a self-loop")
    used: Dict[int, int] = {}
    degree: Dict[int, int] = {}
    colors = []
    for u, v in ordered:
        busy = used.get(u, 0) | used.get(v, 0)
        color = (~busy & (busy + 1)).bit_length() - 1
        used[u] = used.get(u, 0) | (1 << color)
        used[v] = used.get(v, 0) | (1 << color)
        degree[u] = degree.get(u, 0) + 1
        degree[v] = degree.get(v, 0) + 1
        colors.append(color)
    max_degree = max(degree.values(), default=0)
    num_colors = max(colors, default=-1) + 1
    if num_colors > max(2 * max_degree - 1, 0):
        raise InvariantViolationError(f"first-fit used {num_colors} colors with max degree {max_degree}")
    for vertex, mask in used.items():
        if mask.bit_count() != degree[vertex]:
            raise InvariantViolationError(f"two edges at vertex {vertex} share a color")
    return EdgeColoring(edges=list(ordered), colors=colors, num_colors=num_colors, max_degree=max_degree)


def coloring_parameters(
    n: int,
    r: int,
    m: int,
    sigma: float,
    gamma: Optional[float] = None,
    delta: Optional[float] = None,
    b: Optional[float] = None,
    mode: str = "literal",
) -> ColoringPlan:
    """Palette size and colored prefix for a run of m edges.

    literal: q = floor(r m / n), m0 = floor((1 - gamma) m).
    inflated: run m' = (1 + delta) m edges with gamma = 1 - 1/(1 + delta),
    so the first ~m edges are the colored prefix.
    """
    if n < 2 or r < 2 or m < 1:
        raise InvalidParameterError(f"need n >= 2, r >= 2, m >= 1, got n={n}, r={r}, m={m}")
    if sigma <= 0:
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    b = r / math.log(n) if b is None else b
    if mode == "literal":
        if gamma is None or not 0.0 < gamma < 1.0:
            raise InvalidParameterError(f"literal mode needs 0 < gamma < 1, got {gamma}")
        length = m
    elif mode == "inflated":
        if delta is None or delta <= 0:
            raise InvalidParameterError(f"inflated mode needs delta > 0, got {delta}")
        gamma = 1.0 - 1.0 / (1.0 + delta)
        length = math.floor((1.0 + delta) * m)
    else:
        raise InvalidParameterError(f"unknown coloring mode {mode!r}")
    q = math.floor(r * length / n)
    if q < 1:
        raise InvalidParameterError(f"palette floor(r m / n) = {q} is empty; increase m")
    return ColoringPlan(
        mode=mode, n=n, r=r, m=m, sequence_length=length, q=q,
        m0=math.floor((1.0 - gamma) * length), gamma=gamma, delta=delta, sigma=sigma, b=b,
        trajectory_condition_holds=b * math.log(1.0 / gamma) <= sigma / 30.0,
        random_subgraph_condition_holds=None if delta is None else b <= delta * sigma / 30.0,
    )


def parse_hypergraph(text: str) -> Hypergraph:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise HypergraphFormatError("empty hypergraph file")
    try:
        n, r, m = (int(x) for x in lines[0].split())
    except ValueError as exc:
        raise HypergraphFormatError(f"bad header {lines[0]!r}: expected 'n r m'") from exc
    if len(lines) - 1 != m:
        raise HypergraphFormatError(f"header announces {m} edges, found {len(lines) - 1}")
    edges = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            edge = tuple(sorted(int(x) for x in line.split()))
        except ValueError as exc:
            raise HypergraphFormatError(f"line {lineno}: non-integer vertex in {line!r}") from exc
        edges.append(edge)
    try:
        return Hypergraph(n, r, tuple(edges))
    except InvalidParameterError as exc:
        raise HypergraphFormatError(str(exc)) from exc


def format_hypergraph(h: Hypergraph) -> str:
    lines = [f"{h.n} {h.r} {h.edge_count}"] + [" ".join(map(str, e)) for e in h.edges]
    return "\n".join(lines) + "\n"


def read_hypergraph(path: Union[str, Path]) -> Hypergraph:
    return parse_hypergraph(Path(path).read_text(encoding="ascii"))


def write_hypergraph(h: Hypergraph, path: Union[str, Path]) -> None:
    Path(path).write_text(format_hypergraph(h), encoding="ascii")
