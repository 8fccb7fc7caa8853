"""Nibble schedule, rounds and partition verification"""
import math

import numpy as np
import pytest

from app.core.exceptions import DegenerateScheduleError, InvalidParameterError, ScheduleInfeasibleError
from app.engine import nibble_partition
from app.engine.graph_core import count_cliques, sample_gnp
from app.engine.nibble_partition import (
    QSource,
    _greedy_edge_disjoint,
    build_schedule,
    mu,
    predicted_round_sizes,
    read_partition_jsonl,
    round_q,
    round_summaries,
    run_nibble,
    run_partition,
    run_round,
    verify_partition,
    write_partition_jsonl,
    zeta,
    zeta_from_exponent,
)
from app.engine.rng import Rng
from app.models.graph import Graph
from app.models.partition import CliquePartition, PartitionEntry, Provenance
from app.schemas.nibble import NibbleParams


class TestSchedule:
    def test_reference_values(self):
        sched = build_schedule(4096, 0.5, NibbleParams())
        assert sched.k == 4
        assert sched.num_rounds == 45
        assert len(sched.rounds) == 46
        assert sched.p_at(16) == pytest.approx(0.5 / math.e, rel=1e-12)

    def test_probabilities_decrease(self):
        sched = build_schedule(4096, 0.5, NibbleParams())
        ps = [r.p_i for r in sched.rounds]
        assert all(a > b for a, b in zip(ps, ps[1:]))
        assert all(r.k_i <= sched.k for r in sched.rounds)

    def test_degenerate(self):
        with pytest.raises(DegenerateScheduleError):
            build_schedule(4, 0.5, NibbleParams(ca=0.1))

    def test_degenerate_is_a_parameter_error(self):
        with pytest.raises(InvalidParameterError):
            build_schedule(4, 0.5, NibbleParams(ca=0.1))

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1])
    def test_rejects_p(self, p):
        with pytest.raises(InvalidParameterError):
            build_schedule(100, p, NibbleParams())

    def test_clique_cap(self):
        sched = build_schedule(4096, 0.5, NibbleParams(ca=1.0, max_clique_cap=4))
        assert sched.k == 4
        assert sched.k_capped

    def test_round_cap(self):
        sched = build_schedule(4096, 0.5, NibbleParams(max_rounds=3))
        assert sched.num_rounds == 3
        assert sched.rounds_capped

    def test_predicted_sizes(self):
        sched = build_schedule(500, 0.5, NibbleParams(ca=0.5))
        sizes = predicted_round_sizes(sched)
        assert len(sizes) == sched.num_rounds
        assert all(s >= 0 for s in sizes)


class TestExpectations:
    def test_mu_values(self):
        sched = build_schedule(100, 0.5, NibbleParams(ca=0.5))
        assert mu(2, 4, 0, sched) == pytest.approx(148.53125, rel=1e-12)
        assert mu(3, 3, 0, sched) == 1.0
        assert mu(0, 2, 0, sched) == pytest.approx(4950 * 0.5, rel=1e-12)

    def test_mu_rejects_bad_sizes(self):
        sched = build_schedule(100, 0.5, NibbleParams(ca=0.5))
        with pytest.raises(InvalidParameterError):
            mu(3, 2, 0, sched)

    def test_q_identity(self):
        sched = build_schedule(500, 0.5, NibbleParams())
        q = round_q(0, sched)
        expected = 1.0 / ((1.0 + sched.eps) * sched.k ** 2 * mu(2, sched.k_at(0), 0, sched))
        assert q == pytest.approx(expected, rel=1e-10)
        assert q == pytest.approx(1.0 / ((1 + 500 ** -0.1) * 9 * 498 * 0.25), rel=1e-10)

    def test_observed_q(self):
        sched = build_schedule(500, 0.5, NibbleParams())
        q = round_q(0, sched, source=QSource.OBSERVED, observed_mu2=100.0)
        assert q == pytest.approx(1.0 / ((1.0 + sched.eps) * 9 * 100.0))
        with pytest.raises(InvalidParameterError):
            round_q(0, sched, source=QSource.OBSERVED)

    def test_infeasible_q(self):
        sched = build_schedule(200, 0.01, NibbleParams(ca=2.0, allow_q_clamp=False))
        assert sched.k_at(0) == 3
        assert sched.rounds[0].q_clamped
        with pytest.raises(ScheduleInfeasibleError) as info:
            round_q(0, sched)
        assert info.value.round_index == 0
        assert round_q(0, sched, allow_clamp=True) == 1.0

    def test_zeta(self):
        assert zeta_from_exponent(0.1, 2) == pytest.approx(0.19)
        assert zeta_from_exponent(0.0, 5) == 0.0
        assert zeta_from_exponent(0.3, -1) == 0.0
        sched = build_schedule(500, 0.5, NibbleParams())
        assert zeta(10 ** 6, 0, sched) == 0.0
        assert zeta(0, 0, sched, q=0.0) == 0.0
        assert 0.0 < zeta(0, 0, sched) < 1.0
        with pytest.raises(InvalidParameterError):
            zeta(-1, 0, sched)


class TestRound:
    def test_greedy_edge_disjoint(self):
        accepted, covered = _greedy_edge_disjoint([(0, 1, 2), (3, 4, 5), (0, 1, 3)])
        assert accepted == [(0, 1, 2), (3, 4, 5)]
        assert len(covered) == 6
        disjoint = [(0, 1, 2), (2, 3, 4)]
        assert _greedy_edge_disjoint(disjoint)[0] == disjoint

    def test_zero_q_removes_nothing(self, monkeypatch):
        g = sample_gnp(60, 0.5, Rng(1, "graph"))
        sched = build_schedule(60, 0.5, NibbleParams(ca=0.5))
        monkeypatch.setattr(nibble_partition, "round_q", lambda *args, **kwargs: 0.0)
        out, g_next = run_round(g, 0, sched, Rng(1, "round"))
        assert out.gamma == [] and out.s_edges == [] and out.d_edges == []
        assert g_next == g

    def test_edgeless_round(self):
        sched = build_schedule(60, 0.5, NibbleParams(ca=0.5))
        out, g_next = run_round(Graph.empty(60), 0, sched, Rng(1))
        assert out.removed_edge_count == 0
        assert g_next.edge_count == 0

    def test_round_bookkeeping(self):
        g = sample_gnp(80, 0.5, Rng(3, "graph"))
        sched = build_schedule(80, 0.5, NibbleParams(ca=0.5))
        out, g_next = run_round(g, 0, sched, Rng(3, "round"))
        assert out.edges_before - out.removed_edge_count == out.edges_after == g_next.edge_count
        if len(out.gamma_star) == len(out.gamma):
            assert out.d_edges == []
        for clique in out.gamma_star:
            assert g.is_clique(clique)
            assert all(not g_next.has_edge(u, v) for u, v in zip(clique, clique[1:]))

    def test_gamma_size_matches_expectation(self):
        g = sample_gnp(60, 0.5, Rng(0, "graph"))
        sched = build_schedule(60, 0.5, NibbleParams(ca=0.5))
        assert sched.k_at(0) == 3
        q = round_q(0, sched)
        triangles = count_cliques(g, (), 3)
        sizes = np.array([len(run_round(g, 0, sched, Rng(seed, "round"))[0].gamma) for seed in range(200)])
        se = math.sqrt(triangles * q * (1 - q) / len(sizes))
        assert abs(sizes.mean() - triangles * q) < 4 * se

    def test_observed_mean_is_recorded(self):
        g = sample_gnp(60, 0.5, Rng(0, "graph"))
        sched = build_schedule(60, 0.5, NibbleParams(ca=0.5))
        out, _ = run_round(g, 0, sched, Rng(0, "round"))
        triangles = count_cliques(g, (), 3)
        assert out.observed_mu2 == pytest.approx(3 * triangles / g.edge_count)

    def test_observed_source_drives_q(self):
        g = sample_gnp(60, 0.5, Rng(0, "graph"))
        predicted = build_schedule(60, 0.5, NibbleParams(ca=0.5))
        observed = build_schedule(60, 0.5, NibbleParams(ca=0.5, q_source=QSource.OBSERVED))
        out_p, _ = run_round(g, 0, predicted, Rng(0, "round"))
        out_o, _ = run_round(g, 0, observed, Rng(0, "round"))
        assert out_p.q == pytest.approx(round_q(0, predicted))
        assert out_o.q == pytest.approx(
            round_q(0, observed, source=QSource.OBSERVED, observed_mu2=out_o.observed_mu2)
        )
        assert out_o.q != pytest.approx(out_p.q)

    def test_round_out_of_range(self, gnp_small):
        sched = build_schedule(40, 0.5, NibbleParams(ca=0.5))
        with pytest.raises(InvalidParameterError):
            run_round(gnp_small, sched.num_rounds, sched, Rng(0))


class TestPartition:
    params = NibbleParams(ca=0.5)

    def test_edgeless(self):
        assert len(run_partition(Graph.empty(30), self.params, Rng(0))) == 0

    def test_zero_rounds_gives_edges(self, gnp_small):
        part = run_partition(gnp_small, NibbleParams(ca=0.5, max_rounds=0), Rng(0))
        assert len(part) == gnp_small.edge_count
        assert all(e.tag == Provenance.FINAL and len(e.vertices) == 2 for e in part)
        assert verify_partition(gnp_small, part).passed

    @pytest.mark.parametrize("seed", range(3))
    def test_verified(self, seed):
        g = sample_gnp(120, 0.5, Rng(seed, "graph"))
        run = run_nibble(g, NibbleParams(), Rng(seed, "partition"))
        report = verify_partition(g, run.partition)
        assert report.passed, report.violations
        assert run.partition.max_clique_size() <= run.schedule.k
        assert sum(report.tag_counts.values()) == len(run.partition)

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(20))
    def test_verified_many_seeds(self, seed):
        g = sample_gnp(200, 0.5, Rng(seed, "graph"))
        part = run_partition(g, NibbleParams(), Rng(seed, "partition"))
        assert verify_partition(g, part).passed

    @pytest.mark.slow
    @pytest.mark.parametrize("n,p,seeds", [
        (200, 0.3, 3), (800, 0.3, 2), (200, 0.7, 3), (400, 0.7, 2), (800, 0.7, 1),
    ])
    def test_acceptance_grid_cells(self, n, p, seeds):
        params = NibbleParams(ca=0.5, tau=2, beps=0.1, max_clique_cap=4)
        for seed in range(seeds):
            g = sample_gnp(n, p, Rng(seed, "graph"))
            run = run_nibble(g, params, Rng(seed, "partition"), p=p)
            assert 3 <= run.schedule.k <= 5
            report = verify_partition(g, run.partition)
            assert report.passed, report.violations
            assert report.max_clique_size <= run.schedule.k

    def test_provenance_counts(self):
        g = sample_gnp(100, 0.5, Rng(4, "graph"))
        run = run_nibble(g, self.params, Rng(4, "partition"))
        counts = run.partition.tag_counts()
        assert counts["gamma_star"] == sum(len(out.gamma_star) for out in run.rounds)
        assert counts["d"] == sum(len(out.d_edges) for out in run.rounds)
        assert counts["s"] == sum(len(out.s_edges) for out in run.rounds)
        assert counts["final"] == run.final_graph.edge_count
        for before, after in zip(run.rounds, run.rounds[1:]):
            assert after.edges_before == before.edges_after
        assert len(round_summaries(run)) == len(run.rounds)

    def test_deterministic(self):
        g = sample_gnp(100, 0.5, Rng(8, "graph"))
        assert (run_partition(g, self.params, Rng(8, "partition")).entries
                == run_partition(g, self.params, Rng(8, "partition")).entries)

    def test_observer_sees_rounds(self):
        g = sample_gnp(80, 0.5, Rng(2, "graph"))
        seen = []
        run = run_nibble(g, self.params, Rng(2), observer=lambda i, g_i, sched: seen.append((i, g_i.edge_count)))
        assert [i for i, _ in seen] == [out.round_index for out in run.rounds]
        assert seen[0][1] == g.edge_count

    def test_degenerate_falls_back_to_edges(self):
        g = Graph.from_edges(3, [(0, 1), (1, 2)])
        run = run_nibble(g, NibbleParams(), Rng(0))
        assert run.trivial
        assert verify_partition(g, run.partition).passed

    def test_fallback_can_be_disabled(self):
        g = Graph.from_edges(3, [(0, 1), (1, 2)])
        with pytest.raises(DegenerateScheduleError):
            run_nibble(g, NibbleParams(trivial_fallback=False), Rng(0))

    def test_trivial_alpha(self, gnp_small):
        run = run_nibble(gnp_small, NibbleParams(trivial_alpha=0.1), Rng(0))
        assert run.trivial
        assert len(run.partition) == gnp_small.edge_count

    def test_observed_source_verifies(self):
        g = sample_gnp(120, 0.5, Rng(4, "graph"))
        run = run_nibble(g, NibbleParams(ca=0.5, q_source=QSource.OBSERVED), Rng(4))
        assert verify_partition(g, run.partition).passed
        first = round_summaries(run)[0]
        assert not first.skipped and first.observed_mu2 > 0

    def test_infeasible_schedule_propagates(self):
        g = sample_gnp(200, 0.01, Rng(0, "graph"))
        with pytest.raises(ScheduleInfeasibleError):
            run_nibble(g, NibbleParams(ca=2.0, allow_q_clamp=False), Rng(0), p=0.01)

    def test_jsonl(self, tmp_path, gnp_small):
        part = run_partition(gnp_small, self.params, Rng(1))
        write_partition_jsonl(part, tmp_path / "partition.jsonl")
        assert read_partition_jsonl(tmp_path / "partition.jsonl").entries == part.entries


class TestVerifyPartition:
    def test_triangle(self, triangle):
        good = CliquePartition([PartitionEntry((0, 1, 2), Provenance.FINAL, 0)])
        assert verify_partition(triangle, good).passed

    def test_double_cover(self, triangle):
        part = CliquePartition([
            PartitionEntry((0, 1, 2), Provenance.GAMMA_STAR, 0),
            PartitionEntry((0, 1), Provenance.FINAL, 1),
        ])
        report = verify_partition(triangle, part)
        assert not report.passed
        assert report.multiply_covered_edges == 1

    def test_missing_edge(self, triangle):
        part = CliquePartition([PartitionEntry((0, 1), Provenance.FINAL, 0)])
        report = verify_partition(triangle, part)
        assert report.uncovered_edges == 2

    def test_non_clique(self, path3):
        part = CliquePartition([PartitionEntry((0, 1, 2), Provenance.FINAL, 0)])
        report = verify_partition(path3, part)
        assert report.non_cliques == 1
        assert not report.passed
