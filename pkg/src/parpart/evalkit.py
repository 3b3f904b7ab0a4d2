"""Experiment support: generators, brute-force oracle, and comparison tools.

The comparison tools implement time-fair quality comparisons: virtual
instances sample extra repetitions of the faster algorithm until its time
budget matches the slower one's single run, and performance profiles
normalize cuts as 1 - best/cut per instance.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ._rng import np_rng
from .graph import Graph, build_graph
from .partition import max_feasible_block_weight

__all__ = [
    "RunRecord",
    "VirtualInstance",
    "read_run_records",
    "write_run_records",
    "virtual_instances",
    "performance_profile",
    "brute_force_optimal",
    "gen_er",
    "gen_rgg",
    "gen_grid",
]

_CSV_HEADER = ["algorithm", "instance", "rep", "cut", "time", "imbalanced"]


@dataclass
class RunRecord:
    """One timed repetition of one algorithm on one instance."""

    algorithm: str
    instance: str
    rep: int
    cut: int
    time: float
    imbalanced: bool = False

    def __post_init__(self):
        if self.time <= 0:
            raise ValueError(f"time must be > 0, got {self.time}")
        if self.cut < 0:
            raise ValueError(f"cut must be >= 0, got {self.cut}")


def write_run_records(path: str, records: list[RunRecord]) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_CSV_HEADER)
        for r in records:
            w.writerow([r.algorithm, r.instance, r.rep, r.cut,
                        repr(r.time), "true" if r.imbalanced else "false"])


def read_run_records(path: str) -> list[RunRecord]:
    out = []
    with open(path, encoding="ascii", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _CSV_HEADER:
            raise ValueError(f"unexpected header {header!r}")
        for row in reader:
            out.append(RunRecord(row[0], row[1], int(row[2]), int(row[3]),
                                 float(row[4]), row[5] == "true"))
    return out


@dataclass
class VirtualInstance:
    """One time-fair comparison sample.

    A is the algorithm whose first sample was slower; quality_B is the best
    cut among the accepted B samples and accepted_time_B their total time,
    so E[accepted_time_B] equals A's single-sample time exactly.
    """

    quality_A: int
    quality_B: int
    accepted_time_B: float
    with_replacement: bool = False


def virtual_instances(runs_A: list[RunRecord], runs_B: list[RunRecord],
                      count: int, seed: int = 0) -> list[VirtualInstance]:
    """Sample time-fair virtual instances from two repetition pools.

    Per instance: draw one repetition of each algorithm and let A be the one
    whose draw was slower. Then draw further B repetitions without
    replacement while the accumulated B time stays below A's time; the final
    draw (the one crossing the budget) is accepted with probability
    (t_A - sum_of_earlier_B_times) / t_last, which makes the expected total
    accepted time equal t_A. If B's pool runs dry before the budget is
    crossed it is refilled and the instance is flagged with_replacement.
    When the probabilistic acceptance rejects the only drawn sample,
    quality_B falls back to that sample's cut with zero accepted time.
    """
    if not runs_A or not runs_B:
        raise ValueError("both run lists must be nonempty")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = np_rng(seed, 0xEF)
    out = []
    for _ in range(count):
        a = runs_A[int(rng.integers(len(runs_A)))]
        b = runs_B[int(rng.integers(len(runs_B)))]
        if b.time > a.time:
            first_a, first_b = b, a
            pool_b = list(runs_A)
        else:
            first_a, first_b = a, b
            pool_b = list(runs_B)
        budget = first_a.time

        drawn = [first_b]
        pool_b.remove(first_b)
        cum = first_b.time
        flagged = False
        while cum < budget:
            if not pool_b:
                if b.time > a.time:
                    pool_b = list(runs_A)
                else:
                    pool_b = list(runs_B)
                flagged = True
            nxt = pool_b.pop(int(rng.integers(len(pool_b))))
            drawn.append(nxt)
            cum += nxt.time
        last = drawn[-1]
        p = (budget - (cum - last.time)) / last.time
        if rng.random() < p:
            accepted = drawn
        else:
            accepted = drawn[:-1]
        if accepted:
            quality_b = min(r.cut for r in accepted)
            time_b = sum(r.time for r in accepted)
        else:
            quality_b = last.cut
            time_b = 0.0
        out.append(VirtualInstance(quality_A=first_a.cut, quality_B=quality_b,
                                   accepted_time_B=time_b,
                                   with_replacement=flagged))
    return out


def performance_profile(records: list[RunRecord]) -> dict[str, list[float]]:
    """Normalize cuts to 1 - best/cut per instance; sorted per algorithm.

    best is the smallest cut any algorithm's balanced record achieved on
    that instance. Imbalanced records map to exactly 1.1. When every cut on
    an instance is zero the ratio is defined as 1 (value 0). Multiple
    repetitions of one algorithm on one instance are collapsed to their best
    balanced record first.
    """
    by_pair: dict[tuple[str, str], RunRecord] = {}
    for r in records:
        key = (r.algorithm, r.instance)
        cur = by_pair.get(key)
        if cur is None:
            by_pair[key] = r
        elif cur.imbalanced and not r.imbalanced:
            by_pair[key] = r
        elif cur.imbalanced == r.imbalanced and r.cut < cur.cut:
            by_pair[key] = r

    instances = sorted({i for _, i in by_pair})
    algorithms = sorted({a for a, _ in by_pair})
    for alg in algorithms:
        for inst in instances:
            if (alg, inst) not in by_pair:
                raise ValueError(f"algorithm {alg!r} has no record on {inst!r}")

    best: dict[str, int | None] = {}
    for inst in instances:
        cuts = [by_pair[(a, inst)].cut for a in algorithms
                if not by_pair[(a, inst)].imbalanced]
        best[inst] = min(cuts) if cuts else None

    out: dict[str, list[float]] = {}
    for alg in algorithms:
        vals = []
        for inst in instances:
            rec = by_pair[(alg, inst)]
            if rec.imbalanced:
                vals.append(1.1)
            elif rec.cut == 0 and best[inst] == 0:
                vals.append(0.0)
            else:
                vals.append(1.0 - best[inst] / rec.cut)
        out[alg] = sorted(vals)
    return out


def brute_force_optimal(g: Graph, k: int, epsilon: float):
    """Exhaustive minimum balanced cut; returns (cut, assignment).

    A k-way partition uses every block: assignments with empty blocks are
    excluded, and each block weight must stay within the balance bound.
    Guarded to k**n <= 1e7 assignments; enumeration runs in vectorized
    chunks. Raises when no qualifying assignment exists.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    n = g.n
    if k ** n > 10 ** 7:
        raise ValueError(f"k^n = {k ** n} exceeds the 1e7 brute-force guard")
    limit = max_feasible_block_weight(g.total_vertex_weight, k, epsilon)
    src = np.repeat(np.arange(n), np.diff(g.xadj))
    half = g.adjncy > src
    eu = src[half]
    ev = g.adjncy[half].astype(np.int64)
    ew = g.adjwgt[half]
    powers = k ** np.arange(n, dtype=np.int64)
    vw = g.vwgt
    total = k ** n
    best_cut = None
    best_assign = None
    chunk = 1 << 16
    for lo in range(0, total, chunk):
        codes = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        A = (codes[:, None] // powers[None, :]) % k
        ok = np.ones(len(codes), dtype=bool)
        for b in range(k):
            wb = ((A == b) * vw[None, :]).sum(axis=1)
            ok &= (wb <= limit) & (wb > 0)
        if not ok.any():
            continue
        Ao = A[ok]
        if len(eu):
            cuts = ((Ao[:, eu] != Ao[:, ev]) * ew[None, :]).sum(axis=1)
        else:
            cuts = np.zeros(len(Ao), dtype=np.int64)
        i = int(np.argmin(cuts))
        if best_cut is None or cuts[i] < best_cut:
            best_cut = int(cuts[i])
            best_assign = Ao[i].astype(np.int32)
    if best_cut is None:
        raise ValueError("no balanced assignment exists for these parameters")
    return best_cut, best_assign


def gen_er(n: int, prob: float, seed: int = 0) -> Graph:
    """Uniform random graph: each pair is an edge with the given probability.

    Sparse sampling via geometric jumps over the linearized strict upper
    triangle, so dense materialization is never needed.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not (0.0 <= prob <= 1.0):
        raise ValueError(f"prob must be in [0, 1], got {prob}")
    total = n * (n - 1) // 2
    if total == 0 or prob == 0.0:
        return build_graph(np.empty((0, 2), dtype=np.int64), n=n)
    rng = np_rng(seed, 0xE2, n)
    if prob >= 1.0:
        r, c = np.triu_indices(n, 1)
        return build_graph(np.column_stack([r, c]), n=n)
    taken = []
    cur = -1
    batch = max(256, int(total * prob * 1.1) + 64)
    while True:
        steps = np.cumsum(rng.geometric(prob, batch)) + cur
        inside = steps[steps < total]
        taken.append(inside)
        if len(inside) < len(steps):
            break
        cur = int(steps[-1])
    lin = np.concatenate(taken)
    if len(lin) == 0:
        return build_graph(np.empty((0, 2), dtype=np.int64), n=n)
    # decode row-major strict-upper-triangle linear indices
    i = (n - 2 - np.floor(np.sqrt(-8.0 * lin + 4.0 * n * (n - 1) - 7.0) / 2.0
                          - 0.5)).astype(np.int64)
    for _ in range(2):  # fix float rounding at row boundaries
        row_start = i * (2 * n - i - 1) // 2
        i = np.where(lin < row_start, i - 1, i)
        row_start = i * (2 * n - i - 1) // 2
        row_end = (i + 1) * (2 * n - i - 2) // 2
        i = np.where(lin >= row_end, i + 1, i)
    row_start = i * (2 * n - i - 1) // 2
    j = i + 1 + (lin - row_start)
    return build_graph(np.column_stack([i, j]), n=n)


def default_rgg_radius(n: int) -> float:
    return 0.55 * math.sqrt(math.log(n) / n)


def gen_rgg(n: int, radius: float | None = None, seed: int = 0) -> Graph:
    """Random geometric graph on the unit square.

    Points are uniform; pairs closer than the radius are connected. The
    default radius 0.55 * sqrt(ln n / n) sits just above the connectivity
    threshold.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if radius is None:
        radius = default_rgg_radius(max(n, 2))
    if radius <= 0:
        raise ValueError(f"radius must be > 0, got {radius}")
    rng = np_rng(seed, 0xE6, n)
    points = rng.random((n, 2))
    pairs = cKDTree(points).query_pairs(radius, output_type="ndarray")
    return build_graph(pairs.astype(np.int64), n=n)


def gen_grid(rows: int, cols: int, wrap: bool = False) -> Graph:
    """Four-neighbor lattice; torus when wrap is set."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    edges = set()

    def add(a: int, b: int) -> None:
        if a != b:
            edges.add((a, b) if a < b else (b, a))

    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                add(v, v + 1)
            elif wrap:
                add(v, r * cols)
            if r + 1 < rows:
                add(v, v + cols)
            elif wrap:
                add(v, c)
    return build_graph(sorted(edges), n=rows * cols)
