import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parpart.initpart import (bisect, epsilon_per_level, initial_partition,
                              recursive_bisection)
from parpart.partition import cut_size, validate_partition

from conftest import grid_graph, random_graph


class TestEpsilonPerLevel:
    def test_k2_passes_through(self):
        assert epsilon_per_level(0.03, 2) == 0.03

    def test_compounding_stays_within_global(self):
        for k in (3, 4, 8, 16, 33):
            eps = epsilon_per_level(0.03, k)
            depth = math.ceil(math.log2(k))
            assert (1 + eps) ** depth == pytest.approx(1.03)
            assert 0 < eps < 0.03

    def test_k4_value(self):
        assert epsilon_per_level(0.03, 4) == pytest.approx(math.sqrt(1.03) - 1)


class TestBisect:
    def test_path_splits_at_middle(self, path4):
        part = bisect(path4, 0.03, seed=0)
        assert part.cut == 1
        assert part.block_weight.tolist() == [2, 2]
        assert part.is_balanced()

    def test_cycle_costs_two(self, cycle4):
        part = bisect(cycle4, 0.03, seed=0)
        assert part.cut == 2
        assert part.is_balanced()

    def test_two_triangles_cut_bridge(self, two_triangles):
        part = bisect(two_triangles, 0.03, seed=0)
        assert part.cut == 1
        assert part.block_weight.tolist() == [3, 3]

    def test_needs_two_vertices(self):
        from parpart.graph import build_graph
        with pytest.raises(ValueError):
            bisect(build_graph([], n=1), 0.03)

    def test_bookkeeping_consistent(self):
        g = random_graph(60, 200, seed=1, weighted=True)
        part = bisect(g, 0.1, seed=2)
        audit = validate_partition(g, part)
        assert audit.stored_consistent

    @pytest.mark.parametrize("seed", range(5))
    def test_balanced_on_grids(self, seed):
        g = grid_graph(12, 12)
        part = bisect(g, 0.03, seed=seed)
        assert part.is_balanced()
        assert part.cut <= 2 * 12  # never worse than two straight cuts

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6))
    def test_balanced_on_random_connected(self, seed):
        g = random_graph(40, 140, seed=seed % 20)
        part = bisect(g, 0.03, seed=seed)
        assert part.k == 2
        assert part.is_balanced()
        assert part.cut == cut_size(g, part.assignment)


class TestRecursiveBisection:
    def test_k1_everything_in_block_zero(self, path4):
        part = recursive_bisection(path4, 1, 0.03)
        assert part.assignment.tolist() == [0, 0, 0, 0]
        assert part.cut == 0

    def test_k4_on_path8(self):
        from parpart.graph import build_graph
        g = build_graph([(i, i + 1) for i in range(7)])
        part = recursive_bisection(g, 4, 0.03, seed=0)
        assert part.is_balanced()
        assert part.cut == 3
        assert len(np.unique(part.assignment)) == 4

    def test_all_blocks_used_on_grid(self):
        g = grid_graph(10, 10)
        for k in (3, 5, 8):
            part = recursive_bisection(g, k, 0.03, seed=1)
            assert len(np.unique(part.assignment)) == k
            assert part.is_balanced()

    def test_proportional_targets_for_odd_k(self):
        g = grid_graph(9, 9)  # 81 vertices over k=3
        part = recursive_bisection(g, 3, 0.03, seed=0)
        assert part.is_balanced()
        assert int(part.block_weight.max()) <= 28  # ceil(81/3)=27, 1.03*27 floors to 27; left split allows 28

    def test_invalid_k(self, path4):
        with pytest.raises(ValueError):
            recursive_bisection(path4, 0, 0.03)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10**6), st.integers(2, 8))
    def test_balance_property(self, seed, k):
        g = random_graph(64, 180, seed=seed % 15)
        part = recursive_bisection(g, k, 0.3, seed=seed)
        assert part.is_balanced()
        audit = validate_partition(g, part)
        assert audit.stored_consistent


class TestInitialPartition:
    def test_returns_best_attempt(self):
        g = grid_graph(8, 8)
        best, attempts = initial_partition(g, 4, 0.03, attempts=6, seed=3,
                                           return_attempts=True)
        assert len(attempts) == 6
        balanced = [p for p in attempts if p.is_balanced()]
        assert balanced
        assert best.cut == min(p.cut for p in balanced)

    def test_attempt_count_is_max_of_workers_and_attempts(self):
        g = grid_graph(6, 6)
        _, attempts = initial_partition(g, 2, 0.03, attempts=2, workers=5,
                                        return_attempts=True)
        assert len(attempts) == 5

    def test_deterministic_across_worker_counts(self):
        g = grid_graph(10, 10)
        a = initial_partition(g, 4, 0.03, attempts=4, workers=1, seed=9)
        with ThreadPoolExecutor(max_workers=3) as pool:
            b = initial_partition(g, 4, 0.03, attempts=4, workers=3, seed=9,
                                  executor=pool)
        assert np.array_equal(a.assignment, b.assignment)
        assert a.cut == b.cut

    def test_k_exceeding_n_rejected(self, path4):
        with pytest.raises(ValueError, match="exceeds"):
            initial_partition(path4, 5, 0.03)

    def test_k_equals_n(self, path4):
        part = initial_partition(path4, 4, 0.03, seed=0)
        assert sorted(part.assignment.tolist()) == [0, 1, 2, 3]
        assert part.cut == 3

    def test_two_triangles_finds_bridge(self, two_triangles):
        part = initial_partition(two_triangles, 2, 0.03, attempts=4, seed=0)
        assert part.cut == 1
        assert part.is_balanced()
