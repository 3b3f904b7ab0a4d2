"""Multilevel pipeline driver: coarsen, initial-partition, project and refine.

Phases run strictly in sequence; all parallelism lives inside the phase
operations, which share one thread pool owned by the driver. Per-phase wall
times and cuts are collected into a MetricsReport.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._rng import mix
from .coarsening import HierarchyLevel, build_hierarchy
from .graph import Graph
from .initpart import initial_partition
from .partition import Partition
from .refine import lp_refine, multi_try_local_search

__all__ = ["PartitionerConfig", "MetricsReport", "partition", "project_partition"]


@dataclass
class PartitionerConfig:
    """Knobs for the whole pipeline."""

    k: int
    epsilon: float = 0.03
    workers: int = 1
    seed: int = 0
    coarsening_iterations: int = 10
    refinement_iterations: int = 25
    # floor of 8 keeps the executed attempt count max(workers, attempts),
    # and with it the cut quality, independent of workers up to 8
    initial_attempts: int = 8
    mls_global_iterations: int = 3
    mls_threshold: float = 0.1
    cluster_factor: int = 16
    alpha: float = 3.0
    beta: float | None = None

    def validate(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not (self.epsilon >= 0):
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        for name in ("workers", "coarsening_iterations", "refinement_iterations",
                     "initial_attempts", "mls_global_iterations", "cluster_factor"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not (0 < self.mls_threshold < 1):
            raise ValueError(
                f"mls_threshold must be in (0, 1), got {self.mls_threshold}")


@dataclass
class MetricsReport:
    """Per-phase timings and cuts, plus end-of-run summary fields.

    rows hold (phase, level, cut, time) with level 0 the input graph and
    level i the graph after i contractions; cut is -1 for phases that have
    no partition yet (coarsening).
    """

    rows: list[tuple[str, int, int, float]] = field(default_factory=list)
    final_cut: int = 0
    max_block_weight: int = 0
    imbalanced: bool = False
    total_time: float = 0.0

    def add(self, phase: str, level: int, cut: int, elapsed: float) -> None:
        self.rows.append((phase, int(level), int(cut), float(elapsed)))

    def phase_time(self, phase: str) -> float:
        return sum(r[3] for r in self.rows if r[0] == phase)

    def to_csv(self) -> str:
        lines = ["phase,level,cut,time"]
        for phase, level, cut, elapsed in self.rows:
            lines.append(f"{phase},{level},{cut},{elapsed:.6f}")
        return "\n".join(lines) + "\n"


def project_partition(coarse_part: Partition, level: HierarchyLevel) -> Partition:
    """Pull a coarse partition down one level.

    Every fine vertex takes the block of its coarse representative, so the
    cut and block weights carry over exactly.
    """
    if len(coarse_part.assignment) != level.coarse_graph.n:
        raise ValueError("partition is not defined on this level's coarse graph")
    fine_assign = coarse_part.assignment[level.map_to_coarse]
    return Partition(k=coarse_part.k, epsilon=coarse_part.epsilon,
                     assignment=np.ascontiguousarray(fine_assign, dtype=np.int32),
                     block_weight=coarse_part.block_weight.copy(),
                     cut=coarse_part.cut)


def partition(g: Graph, config: PartitionerConfig):
    """Run the full pipeline; returns (Partition, MetricsReport)."""
    config.validate()
    if config.k > g.n:
        raise ValueError(f"k={config.k} exceeds vertex count {g.n}")
    report = MetricsReport()
    t_run = time.perf_counter()

    if config.k == 1:
        part = Partition.from_assignment(
            g, np.zeros(g.n, dtype=np.int32), 1, config.epsilon)
        report.final_cut = part.cut
        report.max_block_weight = int(part.block_weight.max()) if g.n else 0
        report.total_time = time.perf_counter() - t_run
        return part, report

    workers = config.workers
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        t0 = time.perf_counter()
        levels = build_hierarchy(
            g, config.k, config.epsilon,
            coarsening_iterations=config.coarsening_iterations,
            cluster_factor=config.cluster_factor, seed=config.seed,
            workers=workers, executor=executor)
        report.add("coarsen", len(levels), -1, time.perf_counter() - t0)
        coarsest = levels[-1].coarse_graph if levels else g

        t0 = time.perf_counter()
        part = initial_partition(
            coarsest, config.k, config.epsilon,
            attempts=config.initial_attempts, workers=workers,
            seed=config.seed, executor=executor)
        report.add("initial", len(levels), part.cut, time.perf_counter() - t0)

        limit = part.weight_limit()
        if int(part.block_weight.max()) > limit:
            # Heavy coarse vertices can make a balanced start impossible;
            # refine under a relaxed bound first, tightening once feasible.
            relaxed = int(part.block_weight.max())
            t0 = time.perf_counter()
            lp_refine(coarsest, part, iterations=config.refinement_iterations,
                      seed=mix(config.seed, len(levels)), workers=workers,
                      executor=executor, limit=relaxed)
            report.add("lp_refine", len(levels), part.cut,
                       time.perf_counter() - t0)

        def refine_at(graph: Graph, level: int) -> None:
            t1 = time.perf_counter()
            lp_refine(graph, part, iterations=config.refinement_iterations,
                      seed=mix(config.seed, level), workers=workers,
                      executor=executor)
            report.add("lp_refine", level, part.cut, time.perf_counter() - t1)
            t1 = time.perf_counter()
            multi_try_local_search(
                graph, part, global_iterations=config.mls_global_iterations,
                gain_threshold=config.mls_threshold, alpha=config.alpha,
                beta=config.beta, seed=mix(config.seed, level),
                workers=workers, executor=executor)
            report.add("mls", level, part.cut, time.perf_counter() - t1)

        refine_at(coarsest, len(levels))
        for li in range(len(levels) - 1, -1, -1):
            fine = levels[li - 1].coarse_graph if li > 0 else g
            t0 = time.perf_counter()
            part = project_partition(part, levels[li])
            report.add("project", li, part.cut, time.perf_counter() - t0)
            refine_at(fine, li)
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    report.final_cut = part.cut
    report.max_block_weight = int(part.block_weight.max())
    report.imbalanced = not part.is_balanced()
    report.total_time = time.perf_counter() - t_run
    return part, report
