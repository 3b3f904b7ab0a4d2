import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parpart.graph import build_graph
from parpart.initpart import initial_partition
from parpart.partition import Partition, validate_partition
from parpart.refine import (Move, MoveSequence, StoppingStats, apply_moves,
                            lp_refine, multi_try_local_search, perform_moves,
                            should_stop)

from conftest import grid_graph, random_graph


def cycle8():
    return build_graph([(i, (i + 1) % 8) for i in range(8)])


def paired_cycle_part(g, epsilon=0.5):
    """C8 split into four 2-vertex arcs; every vertex move has gain <= 0."""
    return Partition.from_assignment(g, [0, 0, 1, 1, 0, 0, 1, 1], 2, epsilon)


def seq_of(vs, fs, ts):
    return MoveSequence(np.asarray(vs, np.int32), np.asarray(fs, np.int32),
                        np.asarray(ts, np.int32), np.zeros(len(vs), np.int64))


class TestStoppingRule:
    def test_never_stops_right_after_improvement(self):
        assert not should_stop(StoppingStats(x=0, gain_mean=-9.0, gain_variance=0.0))

    def test_stops_on_long_bad_streak(self):
        s = StoppingStats(x=10, gain_mean=-2.0, gain_variance=1.0, alpha=3.0, beta=0.0)
        assert should_stop(s)

    def test_variance_keeps_searching(self):
        s = StoppingStats(x=2, gain_mean=-1.0, gain_variance=5.0, alpha=3.0, beta=0.0)
        assert not should_stop(s)

    def test_beta_floor_tolerates_short_streaks(self):
        s = StoppingStats(x=1, gain_mean=-1.0, gain_variance=0.0, alpha=3.0, beta=2.0)
        assert not should_stop(s)
        s = StoppingStats(x=3, gain_mean=-1.0, gain_variance=0.0, alpha=3.0, beta=2.0)
        assert should_stop(s)

    def test_strict_inequality(self):
        s = StoppingStats(x=3, gain_mean=-1.0, gain_variance=1.0, alpha=3.0, beta=0.0)
        assert not should_stop(s)


class TestLpRefine:
    def test_fixed_point_stays(self, path4):
        part = Partition.from_assignment(path4, [0, 0, 1, 1], 2, 0.03)
        lp_refine(path4, part, seed=0)
        assert part.cut == 1
        assert part.assignment.tolist() == [0, 0, 1, 1]

    def test_positive_gain_move_taken(self, path4):
        part = Partition.from_assignment(path4, [0, 1, 1, 0], 2, 0.5)
        lp_refine(path4, part, seed=0)
        assert part.cut == 1
        assert validate_partition(path4, part).stored_consistent

    def test_zero_gain_plateau_not_crossed(self):
        g = cycle8()
        part = paired_cycle_part(g)
        lp_refine(g, part, seed=0)
        assert part.cut == 4  # strict improvement only, so the plateau holds

    def test_respects_balance(self, two_triangles):
        # bridge vertex wants to cross but the bound forbids a 4/2 split
        part = Partition.from_assignment(two_triangles, [0, 0, 0, 1, 1, 1], 2, 0.03)
        lp_refine(two_triangles, part, seed=0)
        assert part.block_weight.tolist() == [3, 3]
        assert part.cut == 1

    def test_relaxed_limit_parameter(self, two_triangles):
        part = Partition.from_assignment(two_triangles, [0, 0, 1, 1, 1, 1], 2, 0.03)
        before = part.cut
        lp_refine(two_triangles, part, seed=0, limit=6)
        assert part.cut <= before
        assert validate_partition(two_triangles, part).stored_consistent

    def test_returns_same_object(self, path4):
        part = Partition.from_assignment(path4, [0, 0, 1, 1], 2, 0.03)
        assert lp_refine(path4, part) is part

    def test_k1_noop(self, path4):
        part = Partition.from_assignment(path4, [0, 0, 0, 0], 1, 0.03)
        lp_refine(path4, part)
        assert part.cut == 0

    def test_deterministic_single_worker(self):
        g = grid_graph(20, 20)
        a = initial_partition(g, 4, 0.03, seed=5)
        b = a.copy()
        lp_refine(g, a, seed=7)
        lp_refine(g, b, seed=7)
        assert np.array_equal(a.assignment, b.assignment)
        assert a.cut == b.cut

    @pytest.mark.parametrize("workers", [1, 2, 4])
    def test_monotone_balanced_consistent(self, workers):
        g = random_graph(300, 1200, seed=3, weighted=True)
        part = initial_partition(g, 4, 0.1, seed=1)
        before = part.cut
        if workers == 1:
            lp_refine(g, part, seed=2, workers=1)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                lp_refine(g, part, seed=2, workers=workers, executor=pool)
        audit = validate_partition(g, part)
        assert part.cut <= before
        assert audit.stored_consistent
        assert audit.balanced

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10**6))
    def test_never_increases_cut(self, seed):
        g = random_graph(80, 280, seed=seed % 12)
        rng = np.random.default_rng(seed)
        part = Partition.from_assignment(g, rng.integers(0, 3, g.n), 3, 1.0)
        before = part.cut
        lp_refine(g, part, seed=seed)
        assert part.cut <= before
        assert validate_partition(g, part).stored_consistent


class TestPerformMoves:
    def make(self):
        g = build_graph([(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)])
        part = Partition.from_assignment(g, [0, 0, 0, 0, 1, 1], 2, 0.5)
        return g, part

    def test_claimed_prefix_is_best_simulated(self):
        g, part = self.make()
        view, seq = perform_moves(g, part, start=3)
        assert seq.vertices.tolist() == [3]
        assert seq.gains.tolist() == [1]

    def test_full_log_continues_past_best(self):
        g, part = self.make()
        view, seq = perform_moves(g, part, start=3)
        assert len(view.move_log) == 3
        assert view.move_log[0] == Move(vertex=3, from_block=0, to_block=1, gain=1)
        # the tail moves are the simulated escape attempts with gain < 0
        assert all(m.gain < 0 for m in view.move_log[1:])

    def test_overlay_and_local_weights(self):
        g, part = self.make()
        view, _ = perform_moves(g, part, start=3)
        assert view.overlay == {3: 1, 2: 1, 5: 0}
        assert view.local_block_weight.tolist() == [3, 3]

    def test_partition_untouched(self):
        g, part = self.make()
        perform_moves(g, part, start=3)
        assert part.assignment.tolist() == [0, 0, 0, 0, 1, 1]
        assert part.cut == 2
        assert part.block_weight.tolist() == [4, 2]

    def test_stats_explain_the_stop(self):
        g, part = self.make()
        view, _ = perform_moves(g, part, start=3)
        s = view.stats
        assert s.x == 2
        assert s.gain_mean == pytest.approx(-1.5)
        assert s.gain_variance == pytest.approx(0.25)
        assert s.beta == pytest.approx(math.log(6))
        assert should_stop(s)

    def test_marked_start_yields_nothing(self):
        g, part = self.make()
        marks = np.ones(g.n, dtype=np.int64)
        view, seq = perform_moves(g, part, start=3, marks=marks)
        assert len(seq) == 0
        assert view.move_log == []

    def test_claims_are_recorded_in_marks(self):
        g, part = self.make()
        marks = np.zeros(g.n, dtype=np.int64)
        perform_moves(g, part, start=3, marks=marks)
        assert marks[3] == 1 and marks[2] == 1 and marks[5] == 1
        _, seq = perform_moves(g, part, start=3, marks=marks)
        assert len(seq) == 0


class TestApplyMoves:
    def test_commits_best_prefix_gain(self):
        g = build_graph([(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)])
        part = Partition.from_assignment(g, [0, 0, 0, 0, 1, 1], 2, 0.5)
        total, moved = apply_moves(g, part, [seq_of([3], [0], [1])])
        assert total == 1
        assert moved.tolist() == [3]
        assert part.cut == 1
        assert validate_partition(g, part).stored_consistent

    def test_zero_gain_tie_keeps_shorter_prefix(self):
        g = cycle8()
        part = paired_cycle_part(g)
        total, moved = apply_moves(g, part, [seq_of([1], [0], [1])])
        assert total == 0
        assert moved.tolist() == []
        assert part.assignment.tolist() == [0, 0, 1, 1, 0, 0, 1, 1]

    def test_negative_prefix_pays_off(self):
        g = cycle8()
        part = paired_cycle_part(g)
        total, moved = apply_moves(g, part, [seq_of([1, 0], [0, 0], [1, 1])])
        assert total == 2
        assert moved.tolist() == [1, 0]
        assert part.cut == 2
        assert part.block_weight.tolist() == [2, 6]

    def test_true_gains_override_stale_claims(self):
        # the recorded gains are ignored; replay recomputes against the
        # current assignment
        g = cycle8()
        part = paired_cycle_part(g)
        bogus = MoveSequence(np.array([1, 0], np.int32), np.array([0, 0], np.int32),
                             np.array([1, 1], np.int32), np.array([-99, -99], np.int64))
        total, _ = apply_moves(g, part, [bogus])
        assert total == 2

    def test_truncates_at_balance_limit(self):
        g = build_graph([(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)])
        part = Partition.from_assignment(g, [0, 0, 0, 1, 1, 1], 2, 0.0)
        total, moved = apply_moves(g, part, [seq_of([2], [0], [1])])
        assert total == 0
        assert moved.tolist() == []
        assert part.cut == 1

    def test_stale_from_block_raises(self):
        g = build_graph([(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)])
        part = Partition.from_assignment(g, [0, 0, 0, 0, 1, 1], 2, 0.5)
        with pytest.raises(RuntimeError, match="already moved"):
            apply_moves(g, part, [seq_of([3], [0], [1]), seq_of([3], [0], [1])])

    def test_empty_sequences_are_fine(self, path4):
        part = Partition.from_assignment(path4, [0, 0, 1, 1], 2, 0.03)
        total, moved = apply_moves(path4, part, [])
        assert total == 0 and moved.tolist() == []


class TestMultiTryLocalSearch:
    def test_escapes_zero_gain_plateau(self):
        g = cycle8()
        for seed in range(4):
            part = paired_cycle_part(g)
            multi_try_local_search(g, part, seed=seed)
            audit = validate_partition(g, part)
            assert part.cut == 2
            assert audit.balanced and audit.stored_consistent

    def test_plateau_needs_negative_moves(self):
        # same start as above: plain label propagation cannot leave it
        g = cycle8()
        part = paired_cycle_part(g)
        lp_refine(g, part, seed=0)
        assert part.cut == 4

    def test_returns_same_object_and_monotone(self):
        g = grid_graph(20, 20)
        part = initial_partition(g, 4, 0.03, seed=2)
        before = part.cut
        out = multi_try_local_search(g, part, seed=3)
        assert out is part
        assert part.cut <= before
        audit = validate_partition(g, part)
        assert audit.balanced and audit.stored_consistent

    def test_deterministic_single_worker(self):
        g = grid_graph(16, 16)
        a = initial_partition(g, 4, 0.03, seed=4)
        b = a.copy()
        multi_try_local_search(g, a, seed=6)
        multi_try_local_search(g, b, seed=6)
        assert np.array_equal(a.assignment, b.assignment)
        assert a.cut == b.cut

    @pytest.mark.parametrize("workers", [2, 4])
    def test_parallel_keeps_invariants(self, workers):
        g = random_graph(400, 1600, seed=8, weighted=True)
        part = initial_partition(g, 4, 0.1, seed=0)
        before = part.cut
        with ThreadPoolExecutor(max_workers=workers) as pool:
            multi_try_local_search(g, part, seed=1, workers=workers, executor=pool)
        audit = validate_partition(g, part)
        assert part.cut <= before
        assert audit.balanced
        assert audit.stored_consistent

    def test_k1_noop(self, path4):
        part = Partition.from_assignment(path4, [0, 0, 0, 0], 1, 0.03)
        assert multi_try_local_search(path4, part) is part

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 10**6), st.integers(2, 5))
    def test_invariants_random(self, seed, k):
        g = random_graph(90, 300, seed=seed % 8)
        part = initial_partition(g, k, 0.3, seed=seed)
        before = part.cut
        multi_try_local_search(g, part, seed=seed)
        audit = validate_partition(g, part)
        assert part.cut <= before
        assert audit.stored_consistent
        assert audit.balanced
