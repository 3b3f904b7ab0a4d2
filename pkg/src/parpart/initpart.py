"""Initial partitioning of the coarsest graph by recursive bisection.

Each bisection grows one side by breadth-first search from a random seed
vertex until the proportional target weight is reached (three seeds tried,
best start kept), then refines with FM passes: moves always leave the side
that is overweight relative to its target, transient infeasibility is allowed,
and each pass rolls back to the best state it saw. Multiple independent
attempts run with derived seeds; the best balanced result wins.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ._rng import TAG_INIT, mix
from .graph import Graph
from .partition import Partition, feasible_cap, max_feasible_block_weight

__all__ = ["bisect", "recursive_bisection", "initial_partition", "epsilon_per_level"]


def epsilon_per_level(epsilon: float, k: int) -> float:
    """Per-bisection allowance whose compounding stays within the global bound."""
    if k <= 2:
        return epsilon
    depth = math.ceil(math.log2(k))
    return (1.0 + epsilon) ** (1.0 / depth) - 1.0


# heap entries ordered by (gain, seq): larger gain first, then more recent
@njit(cache=True, nogil=True, inline="always")
def _entry_less(g1, s1, g2, s2):
    return g1 < g2 or (g1 == g2 and s1 < s2)


@njit(cache=True, nogil=True)
def _heap_push(hg, hs, hv, size, g, s, v):
    i = size
    hg[i] = g
    hs[i] = s
    hv[i] = v
    while i > 0:
        p = (i - 1) >> 1
        if _entry_less(hg[p], hs[p], hg[i], hs[i]):
            hg[p], hg[i] = hg[i], hg[p]
            hs[p], hs[i] = hs[i], hs[p]
            hv[p], hv[i] = hv[i], hv[p]
            i = p
        else:
            break
    return size + 1


@njit(cache=True, nogil=True)
def _heap_pop_root(hg, hs, hv, size):
    size -= 1
    hg[0] = hg[size]
    hs[0] = hs[size]
    hv[0] = hv[size]
    i = 0
    while True:
        l = 2 * i + 1
        r = l + 1
        big = i
        if l < size and _entry_less(hg[big], hs[big], hg[l], hs[l]):
            big = l
        if r < size and _entry_less(hg[big], hs[big], hg[r], hs[r]):
            big = r
        if big == i:
            break
        hg[big], hg[i] = hg[i], hg[big]
        hs[big], hs[i] = hs[i], hs[big]
        hv[big], hv[i] = hv[i], hv[big]
        i = big
    return size


@njit(cache=True, nogil=True)
def _bisect_kernel(xadj, adjncy, adjwgt, vwgt, target0, cap0, cap1,
                   seed64, max_passes, side):
    """Greedy growing + FM. Fills side with 0/1; returns (cut, feasible)."""
    n = len(vwgt)
    total = np.int64(0)
    for v in range(n):
        total += vwgt[v]

    visited = np.zeros(n, dtype=np.uint8)
    queue = np.empty(n, dtype=np.int32)
    pool = np.empty(n, dtype=np.int32)
    idx_of = np.empty(n, dtype=np.int32)
    best_side = np.empty(n, dtype=np.int8)
    best_cut = np.int64(-1)
    best_feas = False
    best_w0 = np.int64(0)
    state = seed64

    for attempt in range(3):
        for v in range(n):
            side[v] = 1
            visited[v] = 0
            pool[v] = v
            idx_of[v] = v
        pool_size = n
        qh = 0
        qt = 0
        w0 = np.int64(0)
        while w0 < target0:
            if qh == qt:
                if pool_size == 0:
                    break
                state = state + np.uint64(0x9E3779B97F4A7C15)
                z = state
                z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
                z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
                z = z ^ (z >> np.uint64(31))
                r = np.int64(z % np.uint64(pool_size))
                s = pool[r]
                visited[s] = 1
                pool_size -= 1
                pool[r] = pool[pool_size]
                idx_of[pool[r]] = r
                queue[qt] = s
                qt += 1
            v = queue[qh]
            qh += 1
            side[v] = 0
            w0 += vwgt[v]
            for e in range(xadj[v], xadj[v + 1]):
                u = adjncy[e]
                if visited[u] == 0:
                    visited[u] = 1
                    j = idx_of[u]
                    pool_size -= 1
                    pool[j] = pool[pool_size]
                    idx_of[pool[j]] = j
                    queue[qt] = u
                    qt += 1
        cut2 = np.int64(0)
        for v in range(n):
            for e in range(xadj[v], xadj[v + 1]):
                if side[adjncy[e]] != side[v]:
                    cut2 += adjwgt[e]
        cut = cut2 // 2
        feas = w0 <= cap0 and (total - w0) <= cap1
        better = False
        if best_cut < 0:
            better = True
        elif feas and not best_feas:
            better = True
        elif feas == best_feas and cut < best_cut:
            better = True
        if better:
            best_cut = cut
            best_feas = feas
            best_w0 = w0
            for v in range(n):
                best_side[v] = side[v]

    for v in range(n):
        side[v] = best_side[v]
    cut = best_cut
    w0 = best_w0

    # FM passes with rollback to the best state seen in each pass
    m2 = len(adjncy)
    heap_cap = n + m2 + 4
    hg0 = np.empty(heap_cap, dtype=np.int64)
    hs0 = np.empty(heap_cap, dtype=np.int64)
    hv0 = np.empty(heap_cap, dtype=np.int32)
    hg1 = np.empty(heap_cap, dtype=np.int64)
    hs1 = np.empty(heap_cap, dtype=np.int64)
    hv1 = np.empty(heap_cap, dtype=np.int32)
    gains = np.zeros(n, dtype=np.int64)
    seq = np.zeros(n, dtype=np.int64)
    locked = np.zeros(n, dtype=np.uint8)
    move_v = np.empty(n, dtype=np.int32)
    move_g = np.empty(n, dtype=np.int64)
    # budget is 2n moves per pass, but locking already caps a pass at n moves
    move_cap = n

    for _pass in range(max_passes):
        sz0 = 0
        sz1 = 0
        sctr = np.int64(0)
        for v in range(n):
            locked[v] = 0
            gsum = np.int64(0)
            own = side[v]
            for e in range(xadj[v], xadj[v + 1]):
                if side[adjncy[e]] != own:
                    gsum += adjwgt[e]
                else:
                    gsum -= adjwgt[e]
            gains[v] = gsum
            sctr += 1
            seq[v] = sctr
            if own == 0:
                sz0 = _heap_push(hg0, hs0, hv0, sz0, gsum, sctr, v)
            else:
                sz1 = _heap_push(hg1, hs1, hv1, sz1, gsum, sctr, v)

        w1 = total - w0
        feas = w0 <= cap0 and w1 <= cap1
        over = max(w0 - cap0, w1 - cap1)
        if over < 0:
            over = np.int64(0)
        start_feas = feas
        start_over = over
        start_cut = cut
        b_feas = feas
        b_over = over
        b_cut = cut
        b_len = 0
        moves = 0

        while moves < move_cap:
            # drop stale/locked tops
            while sz0 > 0 and (locked[hv0[0]] == 1 or hs0[0] != seq[hv0[0]]):
                sz0 = _heap_pop_root(hg0, hs0, hv0, sz0)
            while sz1 > 0 and (locked[hv1[0]] == 1 or hs1[0] != seq[hv1[0]]):
                sz1 = _heap_pop_root(hg1, hs1, hv1, sz1)
            if sz0 == 0 and sz1 == 0:
                break
            d0 = (w0 - target0)
            use0 = True
            if sz0 == 0:
                use0 = False
            elif sz1 == 0:
                use0 = True
            elif d0 > 0:
                use0 = True
            elif d0 < 0:
                use0 = False
            else:
                use0 = not _entry_less(hg0[0], hs0[0], hg1[0], hs1[0])
            if use0:
                v = hv0[0]
                sz0 = _heap_pop_root(hg0, hs0, hv0, sz0)
            else:
                v = hv1[0]
                sz1 = _heap_pop_root(hg1, hs1, hv1, sz1)

            g = gains[v]
            locked[v] = 1
            old = side[v]
            side[v] = 1 - old
            if old == 0:
                w0 -= vwgt[v]
            else:
                w0 += vwgt[v]
            cut -= g
            move_v[moves] = v
            move_g[moves] = g
            moves += 1
            for e in range(xadj[v], xadj[v + 1]):
                u = adjncy[e]
                if locked[u] == 1:
                    continue
                if side[u] == side[v]:
                    gains[u] -= 2 * adjwgt[e]
                else:
                    gains[u] += 2 * adjwgt[e]
                sctr += 1
                seq[u] = sctr
                if side[u] == 0:
                    sz0 = _heap_push(hg0, hs0, hv0, sz0, gains[u], sctr, u)
                else:
                    sz1 = _heap_push(hg1, hs1, hv1, sz1, gains[u], sctr, u)

            w1 = total - w0
            feas = w0 <= cap0 and w1 <= cap1
            over = max(w0 - cap0, w1 - cap1)
            if over < 0:
                over = np.int64(0)
            better = False
            if feas and not b_feas:
                better = True
            elif feas == b_feas:
                if feas:
                    better = cut < b_cut
                else:
                    better = over < b_over or (over == b_over and cut < b_cut)
            if better:
                b_feas = feas
                b_over = over
                b_cut = cut
                b_len = moves

        # roll back to the best prefix (undo is itself a move off side[v])
        for i in range(moves - 1, b_len - 1, -1):
            v = move_v[i]
            old = side[v]
            side[v] = 1 - old
            if old == 0:
                w0 -= vwgt[v]
            else:
                w0 += vwgt[v]
            cut += move_g[i]

        improved = False
        if b_feas and not start_feas:
            improved = True
        elif b_feas == start_feas:
            if b_feas:
                improved = b_cut < start_cut
            else:
                improved = b_over < start_over or (b_over == start_over and b_cut < start_cut)
        if not improved:
            break

    w1 = total - w0
    return cut, (w0 <= cap0 and w1 <= cap1)


@njit(cache=True, nogil=True)
def _induced_csr(xadj, adjncy, adjwgt, vwgt, sub):
    """CSR of the subgraph induced by sub (ids ascending)."""
    ns = len(sub)
    n = len(vwgt)
    newid = np.full(n, -1, dtype=np.int32)
    for i in range(ns):
        newid[sub[i]] = i
    sxadj = np.zeros(ns + 1, dtype=np.int64)
    for i in range(ns):
        v = sub[i]
        cnt = 0
        for e in range(xadj[v], xadj[v + 1]):
            if newid[adjncy[e]] >= 0:
                cnt += 1
        sxadj[i + 1] = sxadj[i] + cnt
    me = sxadj[ns]
    sadjncy = np.empty(me, dtype=np.int32)
    sadjwgt = np.empty(me, dtype=np.int64)
    svwgt = np.empty(ns, dtype=np.int64)
    pos = 0
    for i in range(ns):
        v = sub[i]
        svwgt[i] = vwgt[v]
        for e in range(xadj[v], xadj[v + 1]):
            u = newid[adjncy[e]]
            if u >= 0:
                sadjncy[pos] = u
                sadjwgt[pos] = adjwgt[e]
                pos += 1
    return sxadj, sadjncy, sadjwgt, svwgt


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def bisect(g: Graph, epsilon_adapted: float, seed: int = 0) -> Partition:
    """Bipartition with both sides within (1+eps) * ceil(total/2).

    Returns a k=2 Partition; when no feasible split exists (one vertex heavier
    than the bound) the best-effort result is returned and is_balanced() on it
    reports False.
    """
    if g.n < 2:
        raise ValueError("bisect needs at least two vertices")
    total = g.total_vertex_weight
    half = _ceil_div(total, 2)
    cap = feasible_cap(half, epsilon_adapted)
    side = np.empty(g.n, dtype=np.int8)
    _bisect_kernel(g.xadj, g.adjncy, g.adjwgt, g.vwgt,
                   np.int64(half), np.int64(cap), np.int64(cap),
                   np.uint64(mix(seed, TAG_INIT, 0xB15)), 10, side)
    return Partition.from_assignment(g, side.astype(np.int32), 2, epsilon_adapted)


def _recurse(xadj, adjncy, adjwgt, vwgt, orig_ids, kt, offset, eps_level,
             seed, assignment):
    ns = len(vwgt)
    if kt == 1 or ns <= 1:
        assignment[orig_ids] = offset
        return
    total = int(vwgt.sum())
    k1 = (kt + 1) // 2
    k2 = kt - k1
    ceil0 = _ceil_div(total * k1, kt)
    ceil1 = _ceil_div(total * k2, kt)
    cap0 = feasible_cap(ceil0, eps_level)
    cap1 = feasible_cap(ceil1, eps_level)
    side = np.empty(ns, dtype=np.int8)
    _bisect_kernel(xadj, adjncy, adjwgt, vwgt, np.int64(ceil0),
                   np.int64(cap0), np.int64(cap1),
                   np.uint64(mix(seed, 0x5EED)), 10, side)
    sel0 = np.flatnonzero(side == 0).astype(np.int32)
    sel1 = np.flatnonzero(side == 1).astype(np.int32)
    for sel, kk, off, tag in ((sel0, k1, offset, 1), (sel1, k2, offset + k1, 2)):
        if kk == 1 or len(sel) <= 1:
            # fewer vertices than blocks leaves the remaining blocks empty
            assignment[orig_ids[sel]] = off
            continue
        sx, sa, sw, sv = _induced_csr(xadj, adjncy, adjwgt, vwgt, sel)
        _recurse(sx, sa, sw, sv, orig_ids[sel], kk, off, eps_level,
                 mix(seed, tag), assignment)


def recursive_bisection(g: Graph, k: int, epsilon: float, seed: int = 0) -> Partition:
    """k-way partition by recursive bisection with proportional targets."""
    if k < 1:
        raise ValueError("k must be >= 1")
    assignment = np.zeros(g.n, dtype=np.int32)
    if k > 1 and g.n > 0:
        eps_level = epsilon_per_level(epsilon, k)
        ids = np.arange(g.n, dtype=np.int32)
        _recurse(g.xadj, g.adjncy, g.adjwgt, g.vwgt, ids, k, 0,
                 eps_level, mix(seed, TAG_INIT), assignment)
    return Partition.from_assignment(g, assignment, k, epsilon)


def initial_partition(g: Graph, k: int, epsilon: float, attempts: int = 8,
                      workers: int = 1, seed: int = 0, executor=None,
                      return_attempts: bool = False):
    """Best of max(workers, attempts) independent recursive-bisection attempts.

    Balanced attempts win by cut; if none is balanced, the attempt with the
    smallest maximum overload (then cut) is returned best-effort.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > g.n:
        raise ValueError(f"k={k} exceeds vertex count {g.n}")
    n_att = max(workers, attempts)
    results: list[Partition | None] = [None] * n_att

    def attempt(i):
        results[i] = recursive_bisection(g, k, epsilon, mix(seed, TAG_INIT, 100 + i))

    if workers <= 1 or executor is None:
        for i in range(n_att):
            attempt(i)
    else:
        futs = [executor.submit(attempt, i) for i in range(n_att)]
        for f in futs:
            f.result()

    limit = max_feasible_block_weight(g.total_vertex_weight, k, epsilon)

    def key(i):
        p = results[i]
        over = max(0, int(p.block_weight.max()) - limit)
        return (0, 0, p.cut, i) if over == 0 else (1, over, p.cut, i)

    best = results[min(range(n_att), key=key)]
    if return_attempts:
        return best, results
    return best
