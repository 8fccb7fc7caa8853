"""Empirical audits of clique counts and common-neighbourhood counts on nibble graphs"""
from __future__ import annotations

import logging
import math
from typing import Dict, List, Optional, Tuple

from app.core.exceptions import InvalidParameterError
from app.engine.graph_core import count_cliques, count_common_neighbors
from app.engine.nibble_partition import mu, run_nibble
from app.engine.rng import Rng
from app.models.graph import Graph
from app.schemas.audit import AuditReport, AuditRow, AuditSpec
from app.schemas.nibble import NibbleParams, Schedule

logger = logging.getLogger(__name__)


def lambda_si(s_size: int, i: int, sched: Schedule) -> float:
    """Expected number of common neighbours of an s-set in G(n, p_i)"""
    if not 0 <= s_size < sched.n:
        raise InvalidParameterError(f"lambda needs 0 <= s < n, got s={s_size}, n={sched.n}")
    p_i = sched.p_at(i)
    if s_size == 0 or p_i == 1.0:
        return float(sched.n - s_size)
    return math.exp(math.log(sched.n - s_size) + s_size * math.log(p_i))


def _binomial_relative_sd(trials: int, prob: float) -> Optional[float]:
    if trials <= 0 or prob <= 0.0:
        return None
    return math.sqrt((1.0 - prob) / (trials * prob))


def sample_clique_sets(g: Graph, s_size: int, count: int, rng: Rng, retry_cap: int) -> Tuple[List[Tuple[int, ...]], bool]:
    """Uniform s-cliques by rejection.

    Each of the count draws gets its own retry_cap attempts; a draw that runs out
    is skipped. The second value is True when any draw was skipped.
    """
    if s_size == 0:
        return [()], False
    if s_size > g.n:
        return [], True
    found: List[Tuple[int, ...]] = []
    short = False
    for _ in range(count):
        for _attempt in range(retry_cap):
            candidate = tuple(sorted(int(v) for v in rng.choice(g.n, size=s_size, replace=False)))
            if g.is_clique(candidate):
                found.append(candidate)
                break
        else:
            short = True
    return found, short


def _row(statistic: str, i: int, s_size: int, j: Optional[int], expected: float,
         values: List[Tuple[Tuple[int, ...], int]], band: float, scale: Optional[float],
         insufficient: bool) -> AuditRow:
    deviations = [(abs(x / expected - 1.0), s) for s, x in values]
    worst = max(deviations, default=(0.0, ()))
    max_dev = worst[0]
    mean_dev = sum(d for d, _ in deviations) / len(deviations) if deviations else 0.0
    if insufficient:
        logger.warning("%s audit round %d |S|=%d: only %d samples before the retry cap",
                       statistic, i, s_size, len(values))
    return AuditRow(
        round=i, statistic=statistic, s_size=s_size, j=j, expected=expected, samples=len(values),
        max_deviation=max_dev, mean_deviation=mean_dev, band=band, fluctuation_scale=scale,
        passed=max_dev <= band, insufficient_samples=insufficient, worst_set=list(worst[1]),
    )


def audit_R(g_i: Graph, i: int, sched: Schedule, spec: AuditSpec, rng: Rng) -> AuditReport:
    """Compare |C_{S,j}| with mu(|S|, j, i) for sampled cliques S"""
    k_i = sched.k_at(i)
    band = spec.tolerance_multiplier * sched.eps
    rows = []
    for target in spec.clique_targets:
        if not 0 <= target.s_size <= target.j <= k_i:
            raise InvalidParameterError(f"audit needs 0 <= |S| <= j <= k_i={k_i}, got ({target.s_size}, {target.j})")
        stream = rng.spawn(f"R-{i}-{target.s_size}-{target.j}")
        sets, insufficient = sample_clique_sets(g_i, target.s_size, target.samples, stream, spec.retry_cap)
        values = [(s, count_cliques(g_i, s, target.j)) for s in sets]
        expected = mu(target.s_size, target.j, i, sched)
        scale = None
        if target.j == target.s_size + 1:
            scale = _binomial_relative_sd(sched.n - target.s_size, sched.p_at(i) ** target.s_size)
        elif target.s_size == 0 and target.j == 2:
            scale = _binomial_relative_sd(math.comb(sched.n, 2), sched.p_at(i))
        rows.append(_row("R", i, target.s_size, target.j, expected, values, band, scale, insufficient))
    return AuditReport(eps=sched.eps, tolerance_multiplier=spec.tolerance_multiplier, rows=rows)


def audit_N(g_i: Graph, i: int, sched: Schedule, spec: AuditSpec, rng: Rng) -> AuditReport:
    """Compare common-neighbour counts N_S with lambda(|S|, i) for sampled cliques S"""
    k_i = sched.k_at(i)
    band = spec.tolerance_multiplier * (i + 1) * sched.eps ** 2
    rows = []
    for target in spec.neighborhood_targets:
        if not 0 <= target.s_size <= k_i - 1:
            raise InvalidParameterError(f"audit needs |S| <= k_i - 1 = {k_i - 1}, got {target.s_size}")
        stream = rng.spawn(f"N-{i}-{target.s_size}")
        sets, insufficient = sample_clique_sets(g_i, target.s_size, target.samples, stream, spec.retry_cap)
        values = [(s, count_common_neighbors(g_i, s)) for s in sets]
        expected = lambda_si(target.s_size, i, sched)
        scale = None
        if target.s_size > 0:
            scale = _binomial_relative_sd(sched.n - target.s_size, sched.p_at(i) ** target.s_size)
        rows.append(_row("N", i, target.s_size, None, expected, values, band, scale, insufficient))
    return AuditReport(eps=sched.eps, tolerance_multiplier=spec.tolerance_multiplier, rows=rows)


def audit_run(g0: Graph, params: NibbleParams, spec: AuditSpec, seed: int) -> AuditReport:
    """Replay a nibble run from seed and audit the graphs at the requested rounds"""
    wanted = set(spec.rounds)
    snapshots: Dict[int, Tuple[Graph, Schedule]] = {}

    def keep(i: int, g_i: Graph, sched: Schedule) -> None:
        if i in wanted:
            snapshots[i] = (g_i, sched)

    run = run_nibble(g0, params, Rng(seed, "partition"), observer=keep)
    if run.schedule is None:
        raise InvalidParameterError("audits need a nibble schedule; the run used the trivial partition")
    audit_rng = Rng(seed, "audit")
    rows: List[AuditRow] = []
    for i in sorted(wanted):
        if i not in snapshots:
            logger.warning("round %d was not reached; nothing to audit", i)
            continue
        g_i, sched = snapshots[i]
        k_i = sched.k_at(i)
        round_spec = spec.model_copy(update={
            "clique_targets": [t for t in spec.clique_targets if t.j <= k_i],
            "neighborhood_targets": [t for t in spec.neighborhood_targets if t.s_size <= k_i - 1],
        })
        rows.extend(audit_R(g_i, i, sched, round_spec, audit_rng).rows)
        rows.extend(audit_N(g_i, i, sched, round_spec, audit_rng).rows)
    return AuditReport(eps=run.schedule.eps, tolerance_multiplier=spec.tolerance_multiplier, rows=rows)
