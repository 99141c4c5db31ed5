"""Budgeted skip-set search: caching, the climb, and the pareto filter.

The exhaustive 4x4 sweep (16 configurations) doubles as the oracle for
both the climb's optimum and the dominance filter.
"""

import csv
import io
import itertools

import pytest

from nocforge.errors import ValidationError
from nocforge.explore import (
    Candidate, ExploreConfig, evaluate, hill_climb, neighbor_specs,
    pareto_front, trace_csv,
)
from nocforge.topology import GridDims, TopologySpec

from conftest import make_arch

MESH_SPEC = TopologySpec("sparse_hamming", frozenset(), frozenset())
FULL_4X4 = TopologySpec("sparse_hamming", frozenset({2, 3}), frozenset({2, 3}))


def all_4x4_specs():
    subsets = list(itertools.chain.from_iterable(
        itertools.combinations((2, 3), k) for k in range(3)))
    return [TopologySpec("sparse_hamming", frozenset(sr), frozenset(sc))
            for sr in subsets for sc in subsets]


@pytest.fixture()
def cfg(example_arch):
    return ExploreConfig(dims=GridDims(4, 4), arch=example_arch)


class TestConfig:
    def test_defaults(self, cfg):
        assert cfg.budget == 0.40
        assert cfg.evaluator == "analytic"

    def test_round_trip(self, cfg):
        assert ExploreConfig.from_dict(cfg.to_dict()) == cfg
        assert ExploreConfig.from_dict(cfg.to_dict()).digest == cfg.digest

    def test_validation(self, example_arch):
        dims = GridDims(4, 4)
        with pytest.raises(ValidationError, match="budget"):
            ExploreConfig(dims=dims, arch=example_arch, budget=1.0)
        with pytest.raises(ValidationError, match="budget"):
            ExploreConfig(dims=dims, arch=example_arch, budget=0.0)
        with pytest.raises(ValidationError, match="objective"):
            ExploreConfig(dims=dims, arch=example_arch,
                          objective=("min zero_load_latency",
                                     "max saturation_throughput"))
        with pytest.raises(ValidationError, match="evaluator"):
            ExploreConfig(dims=dims, arch=example_arch, evaluator="guess")


class TestEvaluate:
    def test_mesh_base_case(self, cfg):
        cand = evaluate(MESH_SPEC, cfg)
        assert cand.feasible
        assert cand.error is None
        assert 0 < cand.cost.area_overhead <= cfg.budget
        assert cand.perf.saturation_throughput == cand.perf.analytic_bound
        assert cand.pipeline_digest == cfg.digest

    def test_second_call_returns_the_cached_object(self, cfg):
        assert evaluate(MESH_SPEC, cfg) is evaluate(MESH_SPEC, cfg)

    def test_distinct_configs_do_not_share_entries(self, cfg, example_arch):
        other = ExploreConfig(dims=GridDims(4, 4), arch=example_arch,
                              budget=0.2)
        a = evaluate(MESH_SPEC, cfg)
        b = evaluate(MESH_SPEC, other)
        assert a is not b and a.pipeline_digest != b.pipeline_digest

    def test_full_set_equals_butterfly(self, cfg):
        shg = evaluate(FULL_4X4, cfg)
        fb = evaluate(TopologySpec("flattened_butterfly"), cfg)
        assert shg.cost.to_dict() == fb.cost.to_dict()
        assert shg.perf.to_dict() == fb.perf.to_dict()

    def test_pipeline_failure_is_carried_not_raised(self):
        # Tiles two cells wide cannot seat seven row ports per face.
        cramped = ExploreConfig(dims=GridDims(8, 8),
                                arch=make_arch(ge_area_coeff=6.4e-7))
        full = TopologySpec("sparse_hamming",
                            frozenset(range(2, 8)), frozenset(range(2, 8)))
        cand = evaluate(full, cramped)
        assert not cand.feasible
        assert cand.cost is None and cand.perf is None
        assert "face" in cand.error

    def test_candidate_round_trip(self, cfg):
        cand = evaluate(MESH_SPEC, cfg)
        assert Candidate.from_dict(cand.to_dict()) == cand


class TestHillClimb:
    def test_neighbors_add_one_offset_rows_first(self):
        specs = neighbor_specs(
            TopologySpec("sparse_hamming", frozenset({2}), frozenset()),
            GridDims(4, 5))
        assert [(sorted(s.s_r), sorted(s.s_c)) for s in specs] == [
            ([2, 3], []), ([2, 4], []), ([2], [2]), ([2], [3])]

    def test_matches_exhaustive_on_default_budget(self, cfg):
        best, trace = hill_climb(cfg)
        ranked = [evaluate(s, cfg) for s in all_4x4_specs()]
        oracle = min((c for c in ranked if c.feasible),
                     key=Candidate.objective_key)
        assert best.objective_key() == oracle.objective_key()
        assert best.spec == FULL_4X4
        assert all(c.pipeline_digest == cfg.digest for c in trace)

    def test_wide_budget_reaches_the_full_set(self, example_arch):
        cfg = ExploreConfig(dims=GridDims(4, 4), arch=example_arch,
                            budget=0.99)
        best, _ = hill_climb(cfg)
        assert best.spec == FULL_4X4

    def test_unaffordable_mesh_ends_the_search(self, example_arch):
        cfg = ExploreConfig(dims=GridDims(4, 4), arch=example_arch,
                            budget=0.05)
        best, trace = hill_climb(cfg)
        assert len(trace) == 1
        assert not best.feasible
        assert best.spec == MESH_SPEC

    @pytest.mark.parametrize("budget", [0.22, 0.25, 0.30, 0.40])
    def test_winner_is_locally_optimal(self, example_arch, budget):
        cfg = ExploreConfig(dims=GridDims(4, 4), arch=example_arch,
                            budget=budget)
        best, _ = hill_climb(cfg)
        assert best.feasible and best.cost.area_overhead <= budget
        flips = neighbor_specs(best.spec, cfg.dims)
        for x in best.spec.s_r:
            flips.append(TopologySpec("sparse_hamming",
                                      frozenset(best.spec.s_r - {x}),
                                      best.spec.s_c))
        for x in best.spec.s_c:
            flips.append(TopologySpec("sparse_hamming", best.spec.s_r,
                                      frozenset(best.spec.s_c - {x})))
        for spec in flips:
            cand = evaluate(spec, cfg)
            assert not (cand.feasible and
                        cand.objective_key() < best.objective_key())


class TestParetoFront:
    def test_single_candidate_is_its_own_front(self, cfg):
        cand = evaluate(MESH_SPEC, cfg)
        assert pareto_front([cand]) == [cand]

    def test_empty_input_is_rejected(self):
        with pytest.raises(ValidationError, match="at least one"):
            pareto_front([])

    def test_matches_brute_force_dominance(self, cfg):
        ranked = [evaluate(s, cfg) for s in all_4x4_specs()]
        front = pareto_front(ranked)

        def metrics(c):
            return (c.cost.area_overhead, c.cost.p_noc_w,
                    -c.perf.saturation_throughput,
                    c.perf.zero_load_latency_cycles)

        kept = {c.spec for c in front}
        for c in ranked:
            dominators = [d for d in ranked if d.spec != c.spec
                          and all(x <= y for x, y in
                                  zip(metrics(d), metrics(c)))
                          and metrics(d) != metrics(c)]
            if c.spec in kept:
                assert not dominators
            else:
                assert dominators

    def test_duplicates_and_failures_never_appear(self, cfg):
        cand = evaluate(MESH_SPEC, cfg)
        broken = Candidate(spec=FULL_4X4, cost=None, perf=None,
                           feasible=False, pipeline_digest=cfg.digest,
                           error="boom")
        front = pareto_front([cand, cand, broken])
        assert front == [cand]

    def test_mesh_and_butterfly_trade_off(self, cfg):
        mesh = evaluate(MESH_SPEC, cfg)
        fb = evaluate(FULL_4X4, cfg)
        front = pareto_front([mesh, fb])
        assert set(c.spec for c in front) == {MESH_SPEC, FULL_4X4}
        assert mesh.cost.area_overhead < fb.cost.area_overhead
        assert fb.perf.saturation_throughput > mesh.perf.saturation_throughput


class TestTraceCsv:
    def test_shape_and_values(self, cfg):
        best, trace = hill_climb(cfg)
        text = trace_csv(trace)
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0][:3] == ["s_r", "s_c", "feasible"]
        assert len(rows) == len(trace) + 1
        assert rows[1][2] == "1"

    def test_failed_candidate_row_keeps_the_reason(self, cfg):
        broken = Candidate(spec=FULL_4X4, cost=None, perf=None,
                           feasible=False, pipeline_digest=cfg.digest,
                           error="no route, sorry")
        rows = list(csv.reader(io.StringIO(trace_csv([broken]))))
        assert rows[1][3] == "" and rows[1][7] == "no route, sorry"
