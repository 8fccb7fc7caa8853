"""Semi-random greedy clique partition (the nibble) and its parameter schedule"""
from __future__ import annotations

import logging
import math
from collections import Counter
from itertools import combinations
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from app.core.config import MAX_SCHEDULE_ROUNDS
from app.core.exceptions import (
    DegenerateScheduleError,
    InvalidParameterError,
    InvariantViolationError,
    ScheduleInfeasibleError,
)
from app.engine.graph_core import per_edge_clique_counts, remove_edges, safe_ceil, sample_cliques
from app.engine.rng import Rng
from app.models.graph import Edge, Graph
from app.models.partition import CliquePartition, NibbleRun, PartitionEntry, Provenance, RoundOutput
from app.schemas.nibble import (
    NibbleParams,
    PartitionRecord,
    PartitionVerification,
    QSource,
    RoundParams,
    RoundSummary,
    Schedule,
)

logger = logging.getLogger(__name__)

RoundObserver = Callable[[int, Graph, Schedule], None]


def _clique_size(ca: float, n: int, p: float) -> int:
    return safe_ceil(ca * math.log(n) / math.log(1.0 / p))


def _log_mu(n: int, p_i: float, s_size: int, j: int) -> float:
    exponent = math.comb(j, 2) - math.comb(s_size, 2)
    return math.log(math.comb(n - s_size, j - s_size)) + exponent * math.log(p_i)


def _raw_q(n: int, p_i: float, k_i: int, k: int, tau: int, eps: float) -> float:
    if k_i < 2:
        return 0.0
    return math.exp(-(math.log1p(eps) + tau * math.log(k) + _log_mu(n, p_i, 2, k_i)))


def build_schedule(n: int, p: float, params: NibbleParams) -> Schedule:
    if n < 2:
        raise InvalidParameterError(f"schedule needs n >= 2, got {n}")
    if not 0.0 < p < 1.0:
        raise InvalidParameterError(f"schedule needs 0 < p < 1, got {p}")
    k = _clique_size(params.ca, n, p)
    k_capped = params.max_clique_cap is not None and k > params.max_clique_cap
    if k_capped:
        k = params.max_clique_cap
    if k < 2:
        raise DegenerateScheduleError(f"k={k} < 2 for n={n}, p={p}, ca={params.ca}")

    num_rounds = safe_ceil(params.tau * k ** params.tau * math.log(k))
    limit = MAX_SCHEDULE_ROUNDS if params.max_rounds is None else min(params.max_rounds, MAX_SCHEDULE_ROUNDS)
    rounds_capped = num_rounds > limit
    num_rounds = min(num_rounds, limit)
    eps = n ** (-params.beps)
    rate = k ** params.tau

    rounds = []
    for i in range(num_rounds + 1):
        p_i = p * math.exp(-i / rate)
        k_i = min(_clique_size(params.ca, n, p_i), k)
        raw = _raw_q(n, p_i, k_i, k, params.tau, eps)
        rounds.append(RoundParams(i=i, p_i=p_i, k_i=k_i, q_i=min(raw, 1.0), q_raw=raw, q_clamped=raw > 1.0))
    return Schedule(n=n, p=p, params=params, k=k, k_capped=k_capped, num_rounds=num_rounds,
                    rounds_capped=rounds_capped, eps=eps, rounds=rounds)


def mu(s_size: int, j: int, i: int, sched: Schedule) -> float:
    """Expected number of j-cliques through an s-set in G(n, p_i)"""
    if not 0 <= s_size <= j <= sched.n:
        raise InvalidParameterError(f"mu needs 0 <= s <= j <= n, got s={s_size}, j={j}, n={sched.n}")
    p_i = sched.p_at(i)
    if p_i == 1.0 or math.comb(j, 2) == math.comb(s_size, 2):
        return float(math.comb(sched.n - s_size, j - s_size))
    return math.exp(_log_mu(sched.n, p_i, s_size, j))


def round_q(
    i: int,
    sched: Schedule,
    source: QSource = QSource.PREDICTED,
    observed_mu2: Optional[float] = None,
    allow_clamp: Optional[bool] = None,
) -> float:
    """Inclusion probability q_i = 1 / ((1 + eps) k^tau mu_2).

    mu_2 is mu(2, k_i, i) or, with source=OBSERVED, the measured mean number
    of k_i-cliques per edge.
    """
    k_i = sched.k_at(i)
    if source == QSource.OBSERVED:
        if observed_mu2 is None or observed_mu2 <= 0:
            raise InvalidParameterError("observed q needs a positive observed_mu2")
        raw = 1.0 / ((1.0 + sched.eps) * sched.k ** sched.params.tau * observed_mu2)
    else:
        raw = _raw_q(sched.n, sched.p_at(i), k_i, sched.k, sched.params.tau, sched.eps)
    if raw > 1.0:
        clamp = sched.params.allow_q_clamp if allow_clamp is None else allow_clamp
        if not clamp:
            raise ScheduleInfeasibleError(i, raw)
        logger.warning("round %d: q clamped from %.4g to 1", i, raw)
        return 1.0
    return raw


def zeta_from_exponent(q: float, exponent: float) -> float:
    """1 - (1 - q)^exponent with exponent clipped at zero"""
    exponent = max(exponent, 0.0)
    if q <= 0.0 or exponent == 0.0:
        return 0.0
    if q >= 1.0:
        return 1.0
    return -math.expm1(exponent * math.log1p(-q))


def zeta(clique_count_at_e: int, i: int, sched: Schedule, q: Optional[float] = None) -> float:
    if clique_count_at_e < 0:
        raise InvalidParameterError(f"clique count must be non-negative, got {clique_count_at_e}")
    q_i = round_q(i, sched, allow_clamp=True) if q is None else q
    exponent = (1.0 + sched.eps) * mu(2, sched.k_at(i), i, sched) - clique_count_at_e
    return zeta_from_exponent(q_i, exponent)


def _zeta_array(counts: np.ndarray, q: float, target: float) -> np.ndarray:
    exponent = np.maximum(target - counts, 0.0)
    if q <= 0.0:
        return np.zeros(len(counts))
    if q >= 1.0:
        return (exponent > 0).astype(float)
    return -np.expm1(exponent * math.log1p(-q))


def _greedy_edge_disjoint(cliques: Sequence[Tuple[int, ...]]) -> Tuple[List[Tuple[int, ...]], Set[Edge]]:
    """Accept cliques in order unless they share an edge with an accepted one"""
    accepted: List[Tuple[int, ...]] = []
    covered: Set[Edge] = set()
    for clique in cliques:
        pairs = list(combinations(clique, 2))
        if covered.isdisjoint(pairs):
            accepted.append(clique)
            covered.update(pairs)
    return accepted, covered


def run_round(g_i: Graph, i: int, sched: Schedule, rng: Rng) -> Tuple[RoundOutput, Graph]:
    if g_i.n != sched.n:
        raise InvalidParameterError(f"graph has {g_i.n} vertices, schedule expects {sched.n}")
    if not 0 <= i < sched.num_rounds:
        raise InvalidParameterError(f"round {i} outside 0..{sched.num_rounds - 1}")
    k_i = sched.k_at(i)
    edges_before = g_i.edge_count
    if k_i <= 2:
        out = RoundOutput(round_index=i, k=k_i, q=0.0, skipped=True,
                          edges_before=edges_before, edges_after=edges_before)
        return out, g_i

    edges = g_i.edges()
    counts = per_edge_clique_counts(g_i, edges, k_i)
    clique_count = int(counts.sum()) // math.comb(k_i, 2)
    observed_mu2 = float(counts.mean()) if len(edges) else 0.0

    if sched.params.q_source == QSource.OBSERVED and observed_mu2 > 0:
        q = round_q(i, sched, QSource.OBSERVED, observed_mu2=observed_mu2)
        clamped = 1.0 / ((1.0 + sched.eps) * sched.k ** sched.params.tau * observed_mu2) > 1.0
        target = (1.0 + sched.eps) * observed_mu2
    else:
        q = round_q(i, sched)
        clamped = sched.rounds[i].q_raw > 1.0
        target = (1.0 + sched.eps) * mu(2, k_i, i, sched)

    gamma = sample_cliques(g_i, k_i, q, rng.spawn("gamma"))
    zetas = _zeta_array(counts.astype(float), q, target)
    stabilized = rng.spawn("stabilize").random(len(edges)) < zetas
    s_all = {edges[idx] for idx in np.flatnonzero(stabilized)}

    gamma_star, star_edges = _greedy_edge_disjoint(gamma)
    gamma_edges: Set[Edge] = set(star_edges)
    for clique in gamma:
        gamma_edges.update(combinations(clique, 2))
    d_edges = sorted(gamma_edges - star_edges)
    s_edges = sorted(s_all - gamma_edges)
    removed = gamma_edges | s_all
    g_next = remove_edges(g_i, removed)

    out = RoundOutput(
        round_index=i, k=k_i, q=q, q_clamped=clamped,
        gamma=gamma, gamma_star=gamma_star, d_edges=d_edges, s_edges=s_edges,
        removed_edge_count=len(removed), clique_count=clique_count, observed_mu2=observed_mu2,
        edges_before=edges_before, edges_after=g_next.edge_count,
    )
    _check_round(out, star_edges, g_i, g_next)
    logger.info(
        "round %d: k=%d q=%.3g |C|=%d |Gamma|=%d |Gamma*|=%d |D|=%d |S|=%d edges %d->%d",
        i, k_i, q, clique_count, len(gamma), len(gamma_star), len(d_edges), len(s_edges),
        edges_before, out.edges_after,
    )
    return out, g_next


def _check_round(out: RoundOutput, star_edges: Set[Edge], g_i: Graph, g_next: Graph) -> None:
    pairs_per_clique = math.comb(out.k, 2)
    if len(star_edges) != pairs_per_clique * len(out.gamma_star):
        raise InvariantViolationError(f"round {out.round_index}: Gamma* cliques share an edge")
    d_set, s_set = set(out.d_edges), set(out.s_edges)
    if star_edges & d_set or star_edges & s_set or d_set & s_set:
        raise InvariantViolationError(f"round {out.round_index}: removed edge classes overlap")
    if len(star_edges) + len(d_set) + len(s_set) != out.removed_edge_count:
        raise InvariantViolationError(f"round {out.round_index}: removed edges not accounted for")
    if g_i.edge_count != g_next.edge_count + out.removed_edge_count:
        raise InvariantViolationError(f"round {out.round_index}: edge conservation failed")
    if any(g_next.rows[v] & ~g_i.rows[v] for v in range(g_i.n)):
        raise InvariantViolationError(f"round {out.round_index}: edge set grew")


def _use_trivial(g: Graph, p: float, params: NibbleParams) -> bool:
    if g.n < 2 or p <= 0.0 or p >= 1.0:
        return True
    return params.trivial_alpha is not None and p <= g.n ** (-params.trivial_alpha)


def _trivial_run(g: Graph, p: float, schedule: Optional[Schedule] = None) -> NibbleRun:
    entries = [PartitionEntry(edge, Provenance.FINAL, 0) for edge in g.edges()]
    return NibbleRun(n=g.n, p=p, schedule=schedule, rounds=[], final_graph=g,
                     partition=CliquePartition(entries), trivial=True)


def run_nibble(
    g: Graph,
    params: NibbleParams,
    rng: Rng,
    p: Optional[float] = None,
    observer: Optional[RoundObserver] = None,
) -> NibbleRun:
    """Run the full nibble on g; p defaults to the edge density of g.

    observer, if given, sees (i, g_i, schedule) before each executed round.
    """
    p = g.density() if p is None else p
    if _use_trivial(g, p, params):
        if not params.trivial_fallback:
            raise InvalidParameterError(f"p={p} needs the trivial partition, which is disabled")
        logger.info("trivial partition for n=%d p=%.4g", g.n, p)
        return _trivial_run(g, p)
    try:
        sched = build_schedule(g.n, p, params)
    except DegenerateScheduleError:
        if not params.trivial_fallback:
            raise
        logger.info("degenerate schedule for n=%d p=%.4g, using trivial partition", g.n, p)
        return _trivial_run(g, p)

    rounds: List[RoundOutput] = []
    current = g
    for i in range(sched.num_rounds):
        if current.edge_count == 0 or sched.k_at(i) <= 2:
            break
        if observer is not None:
            observer(i, current, sched)
        out, current = run_round(current, i, sched, rng.spawn(f"round-{i}"))
        rounds.append(out)
        if out.q_clamped and out.clique_count == 0:
            break

    entries: List[PartitionEntry] = []
    for out in rounds:
        entries.extend(PartitionEntry(c, Provenance.GAMMA_STAR, out.round_index) for c in out.gamma_star)
        entries.extend(PartitionEntry(e, Provenance.D, out.round_index) for e in out.d_edges)
        entries.extend(PartitionEntry(e, Provenance.S, out.round_index) for e in out.s_edges)
    entries.extend(PartitionEntry(e, Provenance.FINAL, len(rounds)) for e in current.edges())
    return NibbleRun(n=g.n, p=p, schedule=sched, rounds=rounds, final_graph=current,
                     partition=CliquePartition(entries))


def run_partition(g: Graph, params: NibbleParams, rng: Rng, p: Optional[float] = None) -> CliquePartition:
    return run_nibble(g, params, rng, p=p).partition


def predicted_round_sizes(sched: Schedule) -> List[float]:
    """Expected |Gamma_i| = mu(0, k_i, i) * q_i for each round"""
    sizes = []
    for i in range(sched.num_rounds):
        k_i = sched.k_at(i)
        sizes.append(0.0 if k_i <= 2 else mu(0, k_i, i, sched) * sched.rounds[i].q_i)
    return sizes


def verify_partition(g: Graph, part: CliquePartition, max_violations: int = 10) -> PartitionVerification:
    violations: List[str] = []
    non_cliques = 0
    cover: Counter = Counter()
    for entry in part:
        vertices = entry.vertices
        valid = (len(vertices) >= 2 and list(vertices) == sorted(set(vertices))
                 and vertices[0] >= 0 and vertices[-1] < g.n)
        if not valid or not g.is_clique(vertices):
            non_cliques += 1
            if len(violations) < max_violations:
                violations.append(f"{list(vertices)} ({entry.tag.value}, round {entry.round}) is not a clique")
            if not valid:
                continue
        cover.update(entry.pairs())

    uncovered = 0
    for edge in g.edges():
        if cover.get(edge, 0) == 0:
            uncovered += 1
            if len(violations) < max_violations:
                violations.append(f"edge {edge} uncovered")
    multiply = 0
    for edge, times in sorted(cover.items()):
        if times > 1 and g.has_edge(*edge):
            multiply += 1
            if len(violations) < max_violations:
                violations.append(f"edge {edge} covered {times} times")

    passed = non_cliques == 0 and uncovered == 0 and multiply == 0
    if not passed:
        logger.warning("partition verification failed: %s", "; ".join(violations))
    return PartitionVerification(
        passed=passed,
        clique_count=len(part),
        max_clique_size=part.max_clique_size(),
        thickness=part.thickness(g.n),
        non_cliques=non_cliques,
        uncovered_edges=uncovered,
        multiply_covered_edges=multiply,
        tag_counts=part.tag_counts(),
        violations=violations,
    )


def partition_records(part: CliquePartition) -> List[PartitionRecord]:
    return [PartitionRecord(vertices=list(e.vertices), tag=e.tag.value, round=e.round) for e in part]


def write_partition_jsonl(part: CliquePartition, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in partition_records(part):
            fh.write(record.model_dump_json() + "\n")


def read_partition_jsonl(path: Union[str, Path]) -> CliquePartition:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                record = PartitionRecord.model_validate_json(line)
                entries.append(PartitionEntry(tuple(record.vertices), Provenance(record.tag), record.round))
    return CliquePartition(entries)


def write_schedule_json(sched: Schedule, path: Union[str, Path]) -> None:
    Path(path).write_text(sched.model_dump_json(indent=2), encoding="utf-8")


def round_summaries(run: NibbleRun) -> List[RoundSummary]:
    return [
        RoundSummary(
            i=out.round_index, k_i=out.k, q_i=out.q, q_clamped=out.q_clamped, skipped=out.skipped,
            clique_count=out.clique_count, observed_mu2=out.observed_mu2, gamma=len(out.gamma), gamma_star=len(out.gamma_star),
            d_edges=len(out.d_edges), s_edges=len(out.s_edges),
            edges_before=out.edges_before, edges_after=out.edges_after,
        )
        for out in run.rounds
    ]
