import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parpart.evalkit import (RunRecord, brute_force_optimal, gen_er, gen_grid,
                             gen_rgg, performance_profile, read_run_records,
                             virtual_instances, write_run_records)
from parpart.graph import build_graph
from parpart.initpart import initial_partition
from parpart.partition import cut_size, max_feasible_block_weight

from conftest import random_graph


def rec(alg, inst, rep, cut, time, imbalanced=False):
    return RunRecord(alg, inst, rep, cut, time, imbalanced)


class TestRunRecords:
    def test_validation(self):
        with pytest.raises(ValueError):
            rec("A", "i", 0, 5, 0.0)
        with pytest.raises(ValueError):
            rec("A", "i", 0, -1, 1.0)

    def test_csv_round_trip(self, tmp_path):
        records = [
            rec("A", "grid", 0, 17, 0.123456789012345),
            rec("B", "grid", 1, 20, 2.5, imbalanced=True),
        ]
        path = str(tmp_path / "runs.csv")
        write_run_records(path, records)
        text = open(path).read()
        assert text.splitlines()[0] == "algorithm,instance,rep,cut,time,imbalanced"
        back = read_run_records(path)
        assert back == records

    def test_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("alg,inst,rep,cut,time,imbalanced\n")
        with pytest.raises(ValueError, match="header"):
            read_run_records(str(path))


class TestVirtualInstances:
    def test_equal_first_samples_accept_exactly(self):
        runs_a = [rec("A", "i", 0, 5, 10.0)]
        runs_b = [rec("B", "i", 0, 7, 10.0)]
        out = virtual_instances(runs_a, runs_b, count=50, seed=1)
        assert all(v.accepted_time_B == 10.0 for v in out)
        assert all(v.quality_A == 5 and v.quality_B == 7 for v in out)
        assert all(not v.with_replacement for v in out)

    def test_overshoot_accepted_with_stated_probability(self):
        # budget 10 against three 4-second samples: the third crosses the
        # budget and is kept with probability (10 - 8) / 4, so the accepted
        # time is 12 or 8 and averages to the budget
        runs_a = [rec("A", "i", 0, 5, 10.0)]
        runs_b = [rec("B", "i", r, 9, 4.0) for r in range(3)]
        out = virtual_instances(runs_a, runs_b, count=4000, seed=2)
        times = {v.accepted_time_B for v in out}
        assert times == {8.0, 12.0}
        mean = sum(v.accepted_time_B for v in out) / len(out)
        assert mean == pytest.approx(10.0, rel=0.02)

    def test_slower_first_sample_becomes_a(self):
        runs_a = [rec("fast", "i", 0, 1, 2.0)]
        runs_b = [rec("slow", "i", 0, 9, 10.0)]
        out = virtual_instances(runs_a, runs_b, count=20, seed=3)
        for v in out:
            assert v.quality_A == 9  # the slow algorithm plays the A role
            assert v.quality_B == 1
            assert v.accepted_time_B == 10.0
            assert v.with_replacement  # the two-second pool was refilled

    def test_quality_b_is_best_accepted_cut(self):
        runs_a = [rec("A", "i", 0, 50, 9.0)]
        runs_b = [rec("B", "i", 0, 30, 3.0), rec("B", "i", 1, 20, 3.0),
                  rec("B", "i", 2, 40, 3.0)]
        out = virtual_instances(runs_a, runs_b, count=100, seed=4)
        # all three samples are always drawn (3+3 < 9 <= 3+3+3)
        assert all(v.quality_B == 20 for v in out)

    def test_deterministic_per_seed(self):
        runs_a = [rec("A", "i", r, 10 + r, 5.0 + r) for r in range(4)]
        runs_b = [rec("B", "i", r, 8 + r, 2.0 + r) for r in range(6)]
        one = virtual_instances(runs_a, runs_b, count=64, seed=9)
        two = virtual_instances(runs_a, runs_b, count=64, seed=9)
        assert one == two

    def test_input_validation(self):
        good = [rec("A", "i", 0, 1, 1.0)]
        with pytest.raises(ValueError):
            virtual_instances([], good, 1)
        with pytest.raises(ValueError):
            virtual_instances(good, [], 1)
        with pytest.raises(ValueError):
            virtual_instances(good, good, 0)

    def test_expected_accepted_time_matches_budget(self):
        # Monte Carlo over B times bounded below the budget (so the
        # slower-first-sample swap never fires); the acceptance rule makes
        # every instance's expected accepted time equal the 10s budget
        rng = np.random.default_rng(5)
        runs_a = [rec("A", "i", 0, 100, 10.0)]
        runs_b = [rec("B", "i", r, int(c), float(t))
                  for r, (c, t) in enumerate(
                      zip(rng.integers(50, 150, 200),
                          rng.uniform(0.2, 6.0, 200)))]
        out = virtual_instances(runs_a, runs_b, count=20000, seed=6)
        mean = sum(v.accepted_time_B for v in out) / len(out)
        assert mean == pytest.approx(10.0, rel=0.01)


class TestPerformanceProfile:
    def test_formula_and_sentinel(self):
        records = [
            rec("A", "i1", 0, 100, 1.0), rec("B", "i1", 0, 120, 1.0),
            rec("A", "i2", 0, 50, 1.0), rec("B", "i2", 0, 10, 1.0, imbalanced=True),
        ]
        prof = performance_profile(records)
        assert prof["A"] == [0.0, 0.0]
        assert prof["B"][0] == pytest.approx(1 - 100 / 120)
        assert prof["B"][1] == 1.1

    def test_all_equal_cuts_are_zero(self):
        records = [rec("A", "i", 0, 42, 1.0), rec("B", "i", 0, 42, 1.0)]
        prof = performance_profile(records)
        assert prof == {"A": [0.0], "B": [0.0]}

    def test_zero_cut_instance(self):
        records = [rec("A", "i", 0, 0, 1.0), rec("B", "i", 0, 0, 1.0)]
        prof = performance_profile(records)
        assert prof == {"A": [0.0], "B": [0.0]}

    def test_repetitions_collapse_to_best_balanced(self):
        records = [
            rec("A", "i", 0, 100, 1.0),
            rec("A", "i", 1, 90, 1.0),
            rec("A", "i", 2, 5, 1.0, imbalanced=True),  # ignored: imbalanced
            rec("B", "i", 0, 90, 1.0),
        ]
        prof = performance_profile(records)
        assert prof == {"A": [0.0], "B": [0.0]}

    def test_values_sorted_ascending(self):
        records = [
            rec("A", "i1", 0, 10, 1.0), rec("B", "i1", 0, 40, 1.0),
            rec("A", "i2", 0, 30, 1.0), rec("B", "i2", 0, 30, 1.0),
        ]
        prof = performance_profile(records)
        assert prof["B"] == sorted(prof["B"])
        assert prof["B"] == [0.0, 0.75]

    def test_missing_record_rejected(self):
        records = [rec("A", "i1", 0, 10, 1.0), rec("B", "i2", 0, 10, 1.0)]
        with pytest.raises(ValueError, match="no record"):
            performance_profile(records)

    def test_everyone_imbalanced(self):
        records = [rec("A", "i", 0, 10, 1.0, imbalanced=True),
                   rec("B", "i", 0, 20, 1.0, imbalanced=True)]
        prof = performance_profile(records)
        assert prof == {"A": [1.1], "B": [1.1]}


class TestBruteForce:
    def test_path4(self, path4):
        cut, assign = brute_force_optimal(path4, 2, 0.0)
        assert cut == 1
        assert assign.tolist() in ([0, 0, 1, 1], [1, 1, 0, 0])

    def test_triangle_any_split_cuts_two(self):
        k3 = build_graph([(0, 1), (1, 2), (2, 0)])
        cut, _ = brute_force_optimal(k3, 2, 0.5)
        assert cut == 2

    def test_k4_every_split_cuts_four(self):
        k4 = gen_er(4, 1.0)
        cut, _ = brute_force_optimal(k4, 2, 0.0)
        assert cut == 4

    def test_witness_is_valid(self):
        g = random_graph(9, 16, seed=3, weighted=True)
        cut, assign = brute_force_optimal(g, 3, 0.5)
        assert cut_size(g, assign) == cut
        weights = np.zeros(3, dtype=np.int64)
        np.add.at(weights, assign, g.vwgt)
        limit = max_feasible_block_weight(g.total_vertex_weight, 3, 0.5)
        assert int(weights.max()) <= limit
        assert int(weights.min()) > 0

    def test_size_guard(self):
        g = random_graph(30, 60, seed=0)
        with pytest.raises(ValueError, match="guard"):
            brute_force_optimal(g, 2, 0.03)

    def test_no_feasible_assignment(self):
        g = build_graph([(0, 1)], vertex_weights=[3, 1])
        with pytest.raises(ValueError, match="no balanced"):
            brute_force_optimal(g, 2, 0.0)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10**6))
    def test_lower_bounds_the_pipeline(self, seed):
        g = random_graph(8, 14, seed=seed % 6)
        opt, _ = brute_force_optimal(g, 2, 0.3)
        part = initial_partition(g, 2, 0.3, seed=seed)
        if part.is_balanced():
            assert part.cut >= opt


class TestGenerators:
    def test_er_complete(self):
        g = gen_er(4, 1.0)
        assert g.n == 4 and g.m == 6

    def test_er_empty(self):
        g = gen_er(10, 0.0)
        assert g.n == 10 and g.m == 0

    def test_er_deterministic(self):
        a = gen_er(200, 0.05, seed=3)
        b = gen_er(200, 0.05, seed=3)
        c = gen_er(200, 0.05, seed=4)
        assert a == b
        assert a != c

    def test_er_edge_count_near_expectation(self):
        n, p = 500, 0.05
        g = gen_er(n, p, seed=1)
        expect = p * n * (n - 1) / 2
        std = math.sqrt(expect * (1 - p))
        assert abs(g.m - expect) < 5 * std

    def test_er_simple_graph(self):
        g = gen_er(100, 0.2, seed=2)
        for v in range(g.n):
            ids, _ = g.neighbors(v)
            assert v not in ids
            assert len(set(ids.tolist())) == len(ids)

    def test_rgg_complete_at_huge_radius(self):
        g = gen_rgg(20, radius=1.5, seed=0)
        assert g.m == 20 * 19 // 2

    def test_rgg_default_radius_connectivity_scale(self):
        g = gen_rgg(400, seed=5)
        # threshold radius keeps average degree near n pi r^2
        r = 0.55 * math.sqrt(math.log(400) / 400)
        expect = 400 * math.pi * r * r
        avg_deg = 2 * g.m / 400
        assert 0.4 * expect < avg_deg < 2.0 * expect

    def test_rgg_deterministic(self):
        assert gen_rgg(150, seed=7) == gen_rgg(150, seed=7)
        assert gen_rgg(150, seed=7) != gen_rgg(150, seed=8)

    def test_grid_2x2_is_cycle(self):
        g = gen_grid(2, 2)
        assert g.n == 4 and g.m == 4
        assert g.degrees().tolist() == [2, 2, 2, 2]

    def test_grid_counts(self):
        g = gen_grid(3, 4)
        assert g.n == 12
        assert g.m == 3 * 3 + 2 * 4  # horizontal + vertical runs

    def test_torus_counts(self):
        g = gen_grid(3, 4, wrap=True)
        assert g.m == 2 * 12
        assert g.degrees().tolist() == [4] * 12

    def test_torus_wrap_duplicates_removed(self):
        g = gen_grid(2, 3, wrap=True)
        # wrap edges on the 2-row axis coincide with the inner edges
        assert g.m == 9
        g = gen_grid(2, 2, wrap=True)
        assert g.m == 4

    def test_unit_weights(self):
        for g in (gen_er(30, 0.2, seed=1), gen_rgg(30, seed=1), gen_grid(5, 6)):
            assert g.vwgt.tolist() == [1] * g.n
            assert all(w == 1 for w in g.adjwgt.tolist())
