"""Partitions of weighted graphs: representation, balance arithmetic, audits.

Balance bound: a k-way partition is balanced when every block weight stays
within (1+eps) * ceil(total_weight / k). Because block weights are integers,
feasibility comparisons use the exact integer floor of that bound; it is
computed with rational arithmetic on the decimal value of eps so that borderline
products (0.29 * 100) do not flip on binary float error.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from .graph import Graph

__all__ = [
    "Partition",
    "BalanceReport",
    "balance_bound",
    "feasible_cap",
    "max_feasible_block_weight",
    "cut_size",
    "gain",
    "move_vertex",
    "validate_partition",
    "boundary_vertices",
]


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _check_kb(total_weight: int, k: int, epsilon: float) -> None:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if total_weight < 1:
        raise ValueError("total weight must be positive")
    if not (epsilon >= 0):
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")


def balance_bound(total_weight: int, k: int, epsilon: float) -> float:
    """(1+eps) * ceil(total_weight / k), the per-block weight bound."""
    _check_kb(total_weight, k, epsilon)
    return (1.0 + epsilon) * _ceil_div(int(total_weight), k)


def feasible_cap(ceil_target: int, epsilon: float) -> int:
    """Largest integer weight <= (1+eps) * ceil_target, evaluated exactly."""
    eps = Fraction(epsilon).limit_denominator(10**9)
    return int((1 + eps) * int(ceil_target))


def max_feasible_block_weight(total_weight: int, k: int, epsilon: float) -> int:
    """Largest integer block weight that still counts as balanced."""
    _check_kb(total_weight, k, epsilon)
    return feasible_cap(_ceil_div(int(total_weight), k), epsilon)


@njit(cache=True, nogil=True)
def _audit_kernel(xadj, adjncy, adjwgt, vwgt, assignment, k):
    n = len(vwgt)
    weights = np.zeros(k, dtype=np.int64)
    cut2 = np.int64(0)
    for v in range(n):
        b = assignment[v]
        weights[b] += vwgt[v]
        for e in range(xadj[v], xadj[v + 1]):
            if assignment[adjncy[e]] != b:
                cut2 += adjwgt[e]
    return cut2 // 2, weights


@njit(cache=True, nogil=True)
def _boundary_kernel(xadj, adjncy, assignment):
    n = len(xadj) - 1
    out = np.empty(n, dtype=np.int32)
    cnt = 0
    for v in range(n):
        b = assignment[v]
        for e in range(xadj[v], xadj[v + 1]):
            if assignment[adjncy[e]] != b:
                out[cnt] = v
                cnt += 1
                break
    return out[:cnt].copy()


@dataclass
class Partition:
    """A k-way assignment with maintained block weights and cut.

    The refinement stages update cut and block_weight incrementally; audits
    recompute both from scratch.
    """

    k: int
    epsilon: float
    assignment: np.ndarray
    block_weight: np.ndarray
    cut: int

    @classmethod
    def from_assignment(cls, g: Graph, assignment, k: int, epsilon: float) -> "Partition":
        assignment = np.ascontiguousarray(assignment, dtype=np.int32)
        if len(assignment) != g.n:
            raise ValueError(f"assignment length {len(assignment)} != n {g.n}")
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if g.n and (assignment.min() < 0 or assignment.max() >= k):
            raise ValueError("block id out of range")
        if not (epsilon >= 0):
            raise ValueError(f"epsilon must be >= 0, got {epsilon}")
        cut, weights = _audit_kernel(g.xadj, g.adjncy, g.adjwgt, g.vwgt, assignment, k)
        return cls(k=k, epsilon=float(epsilon), assignment=assignment,
                   block_weight=weights, cut=int(cut))

    def copy(self) -> "Partition":
        return Partition(self.k, self.epsilon, self.assignment.copy(),
                         self.block_weight.copy(), self.cut)

    @property
    def total_weight(self) -> int:
        return int(self.block_weight.sum())

    def weight_limit(self) -> int:
        return max_feasible_block_weight(self.total_weight, self.k, self.epsilon)

    def is_balanced(self) -> bool:
        return int(self.block_weight.max()) <= self.weight_limit()

    def imbalance(self) -> float:
        """max block weight / average block weight."""
        return float(self.block_weight.max()) * self.k / self.total_weight


def cut_size(g: Graph, assignment) -> int:
    """Total weight of edges whose endpoints lie in different blocks."""
    assignment = np.ascontiguousarray(assignment, dtype=np.int32)
    if len(assignment) != g.n:
        raise ValueError("assignment length mismatch")
    if g.n == 0:
        return 0
    k = int(assignment.max()) + 1 if g.n else 1
    if assignment.min() < 0:
        raise ValueError("negative block id")
    cut, _ = _audit_kernel(g.xadj, g.adjncy, g.adjwgt, g.vwgt, assignment, k)
    return int(cut)


def gain(g: Graph, part: Partition, v: int):
    """Best single-vertex move for v, ignoring balance.

    Returns (target_block, cut_reduction) where target is the block other than
    v's own with the strongest connection, ties toward the smaller block id.
    A vertex with no external connections pairs the smallest other block id
    with gain 0 minus its internal connection.
    """
    if part.k < 2:
        raise ValueError("gain needs k >= 2")
    own = int(part.assignment[v])
    conn = np.zeros(part.k, dtype=np.int64)
    ids, ws = g.neighbors(v)
    np.add.at(conn, part.assignment[ids], ws)
    ext = conn.copy()
    ext[own] = -1  # never pick the own block; every other entry is >= 0
    target = int(np.argmax(ext))  # argmax takes the first, so smallest id on ties
    return target, int(conn[target] - conn[own])


def move_vertex(g: Graph, part: Partition, v: int, target: int) -> int:
    """Move v to target with exact delta updates; returns the cut change."""
    own = int(part.assignment[v])
    if target == own:
        return 0
    if not (0 <= target < part.k):
        raise ValueError(f"target block {target} out of range")
    ids, ws = g.neighbors(v)
    conn_own = int(ws[part.assignment[ids] == own].sum())
    conn_tgt = int(ws[part.assignment[ids] == target].sum())
    delta = conn_own - conn_tgt
    part.assignment[v] = target
    part.block_weight[own] -= g.vwgt[v]
    part.block_weight[target] += g.vwgt[v]
    part.cut += delta
    return delta


@dataclass
class BalanceReport:
    """Outcome of a full partition audit."""

    cut: int
    block_weights: np.ndarray
    max_block_weight: int
    bound: float
    weight_limit: int
    balanced: bool
    stored_consistent: bool


def validate_partition(g: Graph, part: Partition) -> BalanceReport:
    """Recompute cut and block weights from scratch and check balance.

    Raises ValueError for structural problems (length mismatch, block id out
    of range); balance violations are reported, not raised.
    """
    if len(part.assignment) != g.n:
        raise ValueError("assignment length mismatch")
    if g.n and (part.assignment.min() < 0 or part.assignment.max() >= part.k):
        raise ValueError("block id out of range")
    cut, weights = _audit_kernel(
        g.xadj, g.adjncy, g.adjwgt, g.vwgt,
        np.ascontiguousarray(part.assignment, dtype=np.int32), part.k,
    )
    limit = max_feasible_block_weight(g.total_vertex_weight, part.k, part.epsilon)
    consistent = int(cut) == part.cut and np.array_equal(weights, part.block_weight)
    return BalanceReport(
        cut=int(cut),
        block_weights=weights,
        max_block_weight=int(weights.max()),
        bound=balance_bound(g.total_vertex_weight, part.k, part.epsilon),
        weight_limit=limit,
        balanced=bool(weights.max() <= limit),
        stored_consistent=bool(consistent),
    )


def boundary_vertices(g: Graph, assignment) -> np.ndarray:
    """Vertices with at least one neighbor in a different block."""
    assignment = np.ascontiguousarray(assignment, dtype=np.int32)
    return _boundary_kernel(g.xadj, g.adjncy, assignment)
