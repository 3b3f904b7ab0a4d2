"""Parallel refinement: block-level label propagation and multi-try local search.

Label propagation refinement moves boundary vertices to the eligible block
with the strictest gain in connection weight. Candidate scans run in parallel
over work packets; commits are serialized and re-check every move against
fresh state, so the cut decreases monotonically and block weights never exceed
the balance bound regardless of interleaving.

Multi-try local search pops start vertices from a shuffled boundary queue.
Each worker runs a private hill-climbing search: moves are simulated through
a local overlay hash map with a gain priority queue, vertices are claimed with
an atomic test-and-set so no vertex is moved twice in one round, and an
adaptive stopping rule cuts off unpromising searches. Claimed sequences are
then replayed sequentially against the shared partition with true gains
recomputed, keeping the best prefix; replay never breaks the balance bound.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from numba import njit

from ._atomics import cas, fetch_add
from ._rng import TAG_MLS, TAG_REFINE, mix, np_rng
from .coarsening import _packet_offsets, packet_bound
from .graph import Graph
from .partition import Partition, boundary_vertices

__all__ = [
    "lp_refine",
    "multi_try_local_search",
    "perform_moves",
    "apply_moves",
    "should_stop",
    "Move",
    "MoveSequence",
    "StoppingStats",
    "LocalSearchView",
]


# ---------------------------------------------------------------------------
# label propagation refinement


@njit(cache=True, nogil=True)
def _scan_packet(xadj, adjncy, adjwgt, vwgt, assign, bw, limit, k,
                 queue, lo, hi, out_v, conn):
    """Collect queue[lo:hi] vertices that currently want to move."""
    cnt = 0
    for qi in range(lo, hi):
        v = queue[qi]
        own = assign[v]
        for b in range(k):
            conn[b] = 0
        for e in range(xadj[v], xadj[v + 1]):
            conn[assign[adjncy[e]]] += adjwgt[e]
        best = conn[own]
        target = -1
        wv = vwgt[v]
        for b in range(k):
            if b != own and conn[b] > best and bw[b] + wv <= limit:
                best = conn[b]
                target = b
        if target >= 0:
            out_v[cnt] = v
            cnt += 1
    return cnt


@njit(cache=True, nogil=True)
def _commit_moves(xadj, adjncy, adjwgt, vwgt, assign, bw, limit, k,
                  cand, ncand, cut_cell, seen, epoch, nextq, ncur, conn):
    """Re-validate and apply candidate moves; runs under the commit lock."""
    moved = 0
    for i in range(ncand):
        v = cand[i]
        own = assign[v]
        for b in range(k):
            conn[b] = 0
        for e in range(xadj[v], xadj[v + 1]):
            conn[assign[adjncy[e]]] += adjwgt[e]
        best = conn[own]
        target = -1
        wv = vwgt[v]
        for b in range(k):
            if b != own and conn[b] > best and bw[b] + wv <= limit:
                best = conn[b]
                target = b
        if target < 0:
            continue
        assign[v] = target
        bw[own] -= wv
        bw[target] += wv
        cut_cell[0] -= conn[target] - conn[own]
        moved += 1
        for e in range(xadj[v], xadj[v + 1]):
            u = adjncy[e]
            if seen[u] != epoch:
                seen[u] = epoch
                nextq[ncur[0]] = u
                ncur[0] += 1
    return moved


def lp_refine(g: Graph, part: Partition, iterations: int = 25, seed: int = 0,
              workers: int = 1, executor=None,
              limit: int | None = None) -> Partition:
    """Label propagation over blocks. Mutates and returns part.

    Every applied move strictly reduces the cut and respects the balance
    bound (or the relaxed `limit` when given), so the cut is monotone even
    under concurrent commits. With workers=1 the result is deterministic for
    a fixed seed.
    """
    if part.k < 2 or g.n == 0 or g.m == 0:
        return part
    k = part.k
    limit = np.int64(part.weight_limit() if limit is None else limit)
    assign = part.assignment
    bw = part.block_weight
    cut_cell = np.array([part.cut], dtype=np.int64)
    degs = g.degrees()

    boundary = boundary_vertices(g, assign)
    if len(boundary) == 0:
        return part
    perm = np_rng(seed, TAG_REFINE, 0xD1CE).permutation(len(boundary))
    queue = boundary[np.lexsort((perm, degs[boundary]))].astype(np.int32)

    seen = np.full(g.n, -1, dtype=np.int64)
    nextq = np.empty(g.n, dtype=np.int32)
    ncur = np.zeros(1, dtype=np.int64)
    bound = packet_bound(g.m)
    lock = threading.Lock()
    nw = max(1, workers)
    conns = [np.empty(k, dtype=np.int64) for _ in range(nw)]
    outs = [np.empty(g.n, dtype=np.int32) for _ in range(nw)]

    for it in range(iterations):
        if len(queue) == 0:
            break
        offsets = _packet_offsets(queue, degs, bound)
        npackets = len(offsets) - 1
        pcur = np.zeros(1, dtype=np.int64)
        ncur[0] = 0
        moved_total = [0] * nw

        def work(wid):
            conn = conns[wid]
            out_v = outs[wid]
            while True:
                p = int(fetch_add(pcur, 0, 1))
                if p >= npackets:
                    break
                lo, hi = offsets[p], offsets[p + 1]
                ncand = _scan_packet(g.xadj, g.adjncy, g.adjwgt, g.vwgt,
                                     assign, bw, limit, k, queue, lo, hi,
                                     out_v, conn)
                if ncand:
                    with lock:
                        moved_total[wid] += _commit_moves(
                            g.xadj, g.adjncy, g.adjwgt, g.vwgt, assign, bw,
                            limit, k, out_v, ncand, cut_cell, seen,
                            np.int64(it), nextq, ncur, conn)

        if nw == 1:
            work(0)
        else:
            futs = [executor.submit(work, w) for w in range(nw)]
            for f in futs:
                f.result()

        if sum(moved_total) == 0:
            break
        queue = nextq[: int(ncur[0])].copy()

    part.cut = int(cut_cell[0])
    return part


# ---------------------------------------------------------------------------
# multi-try local search


class Move(NamedTuple):
    vertex: int
    from_block: int
    to_block: int
    gain: int


@dataclass
class MoveSequence:
    """A claimed move sequence truncated at the best simulated prefix."""

    vertices: np.ndarray
    from_blocks: np.ndarray
    to_blocks: np.ndarray
    gains: np.ndarray

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass
class StoppingStats:
    """Gain statistics since the search last improved its best cut."""

    x: int = 0
    gain_mean: float = 0.0
    gain_variance: float = 0.0
    alpha: float = 3.0
    beta: float = 0.0


def should_stop(stats: StoppingStats) -> bool:
    """Adaptive cutoff: stop once x * mean^2 > alpha * variance + beta.

    Always False at x = 0 so a search that just improved keeps running.
    """
    if stats.x == 0:
        return False
    return stats.x * stats.gain_mean ** 2 > stats.alpha * stats.gain_variance + stats.beta


@dataclass
class LocalSearchView:
    """Private state of one local search, exposed for inspection."""

    start: int
    overlay: dict = field(default_factory=dict)
    local_block_weight: np.ndarray | None = None
    move_log: list = field(default_factory=list)
    stats: StoppingStats = field(default_factory=StoppingStats)


@njit(cache=True, nogil=True, inline="always")
def _ov_get(okey, oval, v):
    mask = len(okey) - 1
    h = np.int64((np.uint64(v) * np.uint64(0x9E3779B97F4A7C15)) >> np.uint64(40)) & mask
    while True:
        k0 = okey[h]
        if k0 == v:
            return oval[h]
        if k0 == -1:
            return np.int64(-1)
        h = (h + 1) & mask


@njit(cache=True, nogil=True)
def _ov_put(okey, oval, v, block):
    """Insert or update; returns 1 when a new key was added."""
    mask = len(okey) - 1
    h = np.int64((np.uint64(v) * np.uint64(0x9E3779B97F4A7C15)) >> np.uint64(40)) & mask
    while True:
        k0 = okey[h]
        if k0 == v:
            oval[h] = block
            return 0
        if k0 == -1:
            okey[h] = v
            oval[h] = block
            return 1
        h = (h + 1) & mask


@njit(cache=True, nogil=True)
def _grow_i64(a):
    b = np.empty(len(a) * 2, dtype=np.int64)
    b[: len(a)] = a
    return b


@njit(cache=True, nogil=True)
def _grow_i32(a):
    b = np.empty(len(a) * 2, dtype=np.int32)
    b[: len(a)] = a
    return b


@njit(cache=True, nogil=True)
def _heap_push4(hg, hs, hv, ht, size, g, s, v, t):
    i = size
    hg[i] = g
    hs[i] = s
    hv[i] = v
    ht[i] = t
    while i > 0:
        p = (i - 1) >> 1
        if hg[p] < hg[i] or (hg[p] == hg[i] and hs[p] < hs[i]):
            hg[p], hg[i] = hg[i], hg[p]
            hs[p], hs[i] = hs[i], hs[p]
            hv[p], hv[i] = hv[i], hv[p]
            ht[p], ht[i] = ht[i], ht[p]
            i = p
        else:
            break
    return size + 1


@njit(cache=True, nogil=True)
def _heap_pop4(hg, hs, hv, ht, size):
    size -= 1
    hg[0] = hg[size]
    hs[0] = hs[size]
    hv[0] = hv[size]
    ht[0] = ht[size]
    i = 0
    while True:
        l = 2 * i + 1
        r = l + 1
        big = i
        if l < size and (hg[big] < hg[l] or (hg[big] == hg[l] and hs[big] < hs[l])):
            big = l
        if r < size and (hg[big] < hg[r] or (hg[big] == hg[r] and hs[big] < hs[r])):
            big = r
        if big == i:
            break
        hg[big], hg[i] = hg[i], hg[big]
        hs[big], hs[i] = hs[i], hs[big]
        hv[big], hv[i] = hv[i], hv[big]
        ht[big], ht[i] = ht[i], ht[big]
        i = big
    return size


@njit(cache=True, nogil=True)
def _mls_run(xadj, adjncy, adjwgt, vwgt, assign, gbw, limit, k,
             marks, starts, i_lo, i_hi, lseq, lepoch, epoch_cell, alpha, beta,
             mv_v, mv_from, mv_to, mv_gain,
             seq_off, seq_best, seq_start, seq_x, seq_mean, seq_var):
    """Run searches for starts[i_lo:i_hi]; returns (next_i, nseq, nmv).

    Each unmarked start spawns one search. Moves are simulated against a
    private overlay and per-search copy of the block weights; claimed
    vertices are marked atomically so concurrent searches stay disjoint.
    The full move log lands in mv_* with seq_best[j] giving the length of
    the best simulated prefix. Returns early (next_i < i_hi) only when the
    move buffer cannot be guaranteed to hold one more full search.
    """
    n = len(vwgt)
    mv_cap = len(mv_v)
    nmv = 0
    nseq = 0
    seq_off[0] = 0

    hg = np.empty(1024, dtype=np.int64)
    hs = np.empty(1024, dtype=np.int64)
    hv = np.empty(1024, dtype=np.int32)
    ht = np.empty(1024, dtype=np.int32)

    okey = np.full(1024, -1, dtype=np.int64)
    oval = np.empty(1024, dtype=np.int64)
    ocnt = 0

    pend = np.empty(n + 8, dtype=np.int32)
    lbw = np.empty(k, dtype=np.int64)
    conn = np.empty(k, dtype=np.int64)

    i = i_lo
    while i < i_hi:
        if nmv + n + 1 > mv_cap:
            break
        s = starts[i]
        i += 1
        if marks[s] != 0:
            continue

        epoch_cell[0] += 1
        epoch = epoch_cell[0]
        hsz = 0
        if ocnt > 0:
            for j in range(len(okey)):
                okey[j] = -1
            ocnt = 0
        for b in range(k):
            lbw[b] = gbw[b]
        seqctr = np.int64(0)
        slen = 0
        cum = np.int64(0)
        best_cum = np.int64(0)
        best_len = 0
        x = np.int64(0)
        mean = 0.0
        m2 = 0.0

        npend = 0
        pend[npend] = s
        npend += 1
        for e in range(xadj[s], xadj[s + 1]):
            u = adjncy[e]
            if marks[u] == 0:
                pend[npend] = u
                npend += 1

        while True:
            # push pending candidates with gains read through the overlay
            for pi in range(npend):
                w = pend[pi]
                if marks[w] != 0:
                    continue
                own_w = assign[w]
                for b in range(k):
                    conn[b] = 0
                for e in range(xadj[w], xadj[w + 1]):
                    u = adjncy[e]
                    bu = _ov_get(okey, oval, u)
                    if bu < 0:
                        bu = assign[u]
                    conn[bu] += adjwgt[e]
                ww = vwgt[w]
                target = -1
                best = np.int64(0)
                for b in range(k):
                    if b != own_w and lbw[b] + ww <= limit:
                        if target < 0 or conn[b] > best:
                            best = conn[b]
                            target = b
                if target < 0:
                    continue
                seqctr += 1
                lseq[w] = seqctr
                lepoch[w] = epoch
                if hsz >= len(hg):
                    hg = _grow_i64(hg)
                    hs = _grow_i64(hs)
                    hv = _grow_i32(hv)
                    ht = _grow_i32(ht)
                hsz = _heap_push4(hg, hs, hv, ht, hsz,
                                  best - conn[own_w], seqctr, w, target)
            npend = 0

            # pop the freshest best candidate and claim it
            pv = -1
            pt = -1
            pg = np.int64(0)
            while hsz > 0:
                cg = hg[0]
                cs = hs[0]
                cv = hv[0]
                ct = ht[0]
                hsz = _heap_pop4(hg, hs, hv, ht, hsz)
                if lepoch[cv] != epoch or lseq[cv] != cs:
                    continue
                if marks[cv] != 0:
                    continue
                if lbw[ct] + vwgt[cv] > limit:
                    continue
                if cas(marks, cv, 0, 1):
                    pv = cv
                    pt = ct
                    pg = cg
                    break
            if pv < 0:
                break

            old = assign[pv]
            if (ocnt + 1) * 2 > len(okey):
                nkey = np.full(len(okey) * 2, -1, dtype=np.int64)
                nval = np.empty(len(okey) * 2, dtype=np.int64)
                for j in range(len(okey)):
                    if okey[j] != -1:
                        _ov_put(nkey, nval, okey[j], oval[j])
                okey = nkey
                oval = nval
            ocnt += _ov_put(okey, oval, pv, pt)
            lbw[pt] += vwgt[pv]
            lbw[old] -= vwgt[pv]
            mv_v[nmv] = pv
            mv_from[nmv] = old
            mv_to[nmv] = pt
            mv_gain[nmv] = pg
            nmv += 1
            slen += 1
            cum += pg
            if cum > best_cum:
                best_cum = cum
                best_len = slen
                x = 0
                mean = 0.0
                m2 = 0.0
            else:
                x += 1
                d = float(pg) - mean
                mean += d / x
                m2 += d * (float(pg) - mean)
            if x > 0 and x * mean * mean > alpha * (m2 / x) + beta:
                break
            for e in range(xadj[pv], xadj[pv + 1]):
                u = adjncy[e]
                if marks[u] == 0:
                    pend[npend] = u
                    npend += 1

        if slen > 0:
            seq_start[nseq] = s
            seq_best[nseq] = best_len
            seq_x[nseq] = x
            seq_mean[nseq] = mean
            seq_var[nseq] = m2 / x if x > 0 else 0.0
            nseq += 1
            seq_off[nseq] = nmv
    return i, nseq, nmv


@njit(cache=True, nogil=True)
def _replay(xadj, adjncy, adjwgt, vwgt, assign, bw, limit, k,
            vs, froms, tos, conn):
    """Replay one claimed sequence with true gains; keep the best prefix.

    Truncates at the first move that would break the balance bound. Returns
    (applied_prefix_len, gain_of_prefix, error_flag); the error flag is set
    when a vertex is no longer in the block the sequence recorded.
    """
    applied = 0
    run = np.int64(0)
    best = np.int64(0)
    blen = 0
    err = 0
    for i in range(len(vs)):
        v = vs[i]
        if assign[v] != froms[i]:
            err = 1
            break
        t = tos[i]
        wv = vwgt[v]
        if bw[t] + wv > limit:
            break
        for b in range(k):
            conn[b] = 0
        for e in range(xadj[v], xadj[v + 1]):
            conn[assign[adjncy[e]]] += adjwgt[e]
        gain = conn[t] - conn[froms[i]]
        assign[v] = t
        bw[froms[i]] -= wv
        bw[t] += wv
        run += gain
        applied = i + 1
        if run > best:
            best = run
            blen = applied
    for i in range(applied - 1, blen - 1, -1):
        v = vs[i]
        assign[v] = froms[i]
        bw[tos[i]] -= vwgt[v]
        bw[froms[i]] += vwgt[v]
    return blen, best, err


def apply_moves(g: Graph, part: Partition, sequences, limit: int | None = None):
    """Sequentially replay claimed sequences against the shared partition.

    True gains are recomputed move by move; each sequence keeps exactly the
    prefix with the smallest running cut (ties broken toward the shorter
    prefix) and is truncated at any move that would exceed the bound.
    Returns (total_gain, moved_vertices).
    """
    if limit is None:
        limit = part.weight_limit()
    conn = np.empty(part.k, dtype=np.int64)
    total = 0
    moved_parts = []
    for seq in sequences:
        if len(seq) == 0:
            continue
        blen, gain, err = _replay(g.xadj, g.adjncy, g.adjwgt, g.vwgt,
                                  part.assignment, part.block_weight,
                                  np.int64(limit), part.k,
                                  seq.vertices, seq.from_blocks,
                                  seq.to_blocks, conn)
        if err:
            raise RuntimeError(
                "claimed sequence references a vertex that already moved")
        if blen > 0:
            total += int(gain)
            moved_parts.append(seq.vertices[:blen])
    part.cut -= total
    if moved_parts:
        moved = np.concatenate(moved_parts)
    else:
        moved = np.empty(0, dtype=np.int32)
    return total, moved


def perform_moves(g: Graph, part: Partition, start: int,
                  marks: np.ndarray | None = None, alpha: float = 3.0,
                  beta: float | None = None):
    """Run a single local search from start without touching the partition.

    Returns (view, sequence): the view exposes the full simulated move log,
    overlay, local block weights, and stopping statistics; the sequence is
    the move log truncated at the best simulated prefix, ready for
    apply_moves. A marked start yields an empty sequence.
    """
    n = g.n
    if marks is None:
        marks = np.zeros(n, dtype=np.int64)
    if beta is None:
        beta = math.log(max(n, 2))
    limit = np.int64(part.weight_limit())
    lseq = np.zeros(n, dtype=np.int64)
    lepoch = np.zeros(n, dtype=np.int64)
    ecell = np.zeros(1, dtype=np.int64)
    cap = n + 8
    mv_v = np.empty(cap, dtype=np.int32)
    mv_from = np.empty(cap, dtype=np.int32)
    mv_to = np.empty(cap, dtype=np.int32)
    mv_gain = np.empty(cap, dtype=np.int64)
    seq_off = np.empty(2, dtype=np.int64)
    seq_best = np.empty(1, dtype=np.int64)
    seq_start = np.empty(1, dtype=np.int32)
    seq_x = np.empty(1, dtype=np.int64)
    seq_mean = np.empty(1, dtype=np.float64)
    seq_var = np.empty(1, dtype=np.float64)
    starts = np.array([start], dtype=np.int32)

    _, nseq, nmv = _mls_run(g.xadj, g.adjncy, g.adjwgt, g.vwgt,
                            part.assignment, part.block_weight, limit, part.k,
                            marks, starts, 0, 1, lseq, lepoch, ecell,
                            float(alpha), float(beta),
                            mv_v, mv_from, mv_to, mv_gain,
                            seq_off, seq_best, seq_start, seq_x, seq_mean,
                            seq_var)

    view = LocalSearchView(start=start)
    view.local_block_weight = part.block_weight.astype(np.int64)
    empty = MoveSequence(np.empty(0, np.int32), np.empty(0, np.int32),
                         np.empty(0, np.int32), np.empty(0, np.int64))
    if nseq == 0:
        return view, empty
    for j in range(nmv):
        mv = Move(int(mv_v[j]), int(mv_from[j]), int(mv_to[j]), int(mv_gain[j]))
        view.move_log.append(mv)
        view.overlay[mv.vertex] = mv.to_block
        view.local_block_weight[mv.from_block] -= g.vwgt[mv.vertex]
        view.local_block_weight[mv.to_block] += g.vwgt[mv.vertex]
    view.stats = StoppingStats(x=int(seq_x[0]), gain_mean=float(seq_mean[0]),
                               gain_variance=float(seq_var[0]),
                               alpha=float(alpha), beta=float(beta))
    b = int(seq_best[0])
    seq = MoveSequence(mv_v[:b].copy(), mv_from[:b].copy(),
                       mv_to[:b].copy(), mv_gain[:b].copy())
    return view, seq


def multi_try_local_search(g: Graph, part: Partition,
                           global_iterations: int = 3,
                           gain_threshold: float = 0.1,
                           alpha: float = 3.0, beta: float | None = None,
                           seed: int = 0, workers: int = 1,
                           executor=None) -> Partition:
    """K-way local search from all boundary vertices. Mutates and returns part.

    Each global iteration rebuilds the boundary queue with per-worker bucket
    shuffles, then runs local iterations: parallel searches claim disjoint
    move sequences, sequential replay applies the best true prefixes, and
    moved vertices re-enter the queue while the iteration gain stays above
    gain_threshold times the gain accumulated so far.
    """
    if part.k < 2 or g.n == 0 or g.m == 0:
        return part
    n = g.n
    k = part.k
    if beta is None:
        beta = math.log(max(n, 2))
    limit = np.int64(part.weight_limit())
    nw = max(1, workers)
    marks = np.zeros(n, dtype=np.int64)
    lseqs = [np.zeros(n, dtype=np.int64) for _ in range(nw)]
    lepochs = [np.zeros(n, dtype=np.int64) for _ in range(nw)]
    ecells = [np.zeros(1, dtype=np.int64) for _ in range(nw)]
    cap = n + 8
    mvbufs = [(np.empty(cap, np.int32), np.empty(cap, np.int32),
               np.empty(cap, np.int32), np.empty(cap, np.int64))
              for _ in range(nw)]

    for gi in range(global_iterations):
        boundary = boundary_vertices(g, part.assignment)
        if len(boundary) == 0:
            break
        chunks = np.array_split(boundary, nw)
        shuffled = [np_rng(seed, TAG_MLS, gi, 7, ci).permutation(c)
                    for ci, c in enumerate(chunks)]
        order = np_rng(seed, TAG_MLS, gi, 11).permutation(nw)
        queue = np.concatenate([shuffled[j] for j in order]).astype(np.int32)

        total_gain = 0
        li = 0
        while True:
            marks[:] = 0
            qcur = np.zeros(1, dtype=np.int64)
            nq = len(queue)
            chunk = nq if nw == 1 else max(32, nq // (nw * 8) + 1)
            collected: list[list] = [[] for _ in range(nw)]

            def work(wid):
                lseq = lseqs[wid]
                lepoch = lepochs[wid]
                ecell = ecells[wid]
                mv_v, mv_from, mv_to, mv_gain = mvbufs[wid]
                out = collected[wid]
                while True:
                    i0 = int(fetch_add(qcur, 0, chunk))
                    if i0 >= nq:
                        break
                    i1 = min(i0 + chunk, nq)
                    i = i0
                    while i < i1:
                        scap = i1 - i
                        seq_off = np.empty(scap + 1, dtype=np.int64)
                        seq_best = np.empty(scap, dtype=np.int64)
                        seq_start = np.empty(scap, dtype=np.int32)
                        seq_x = np.empty(scap, dtype=np.int64)
                        seq_mean = np.empty(scap, dtype=np.float64)
                        seq_var = np.empty(scap, dtype=np.float64)
                        i, nseq, nmv = _mls_run(
                            g.xadj, g.adjncy, g.adjwgt, g.vwgt,
                            part.assignment, part.block_weight, limit, k,
                            marks, queue, i, i1, lseq, lepoch, ecell,
                            float(alpha), float(beta),
                            mv_v, mv_from, mv_to, mv_gain,
                            seq_off, seq_best, seq_start, seq_x, seq_mean,
                            seq_var)
                        if nseq:
                            out.append((mv_v[:nmv].copy(), mv_from[:nmv].copy(),
                                        mv_to[:nmv].copy(), mv_gain[:nmv].copy(),
                                        seq_off[:nseq + 1].copy(),
                                        seq_best[:nseq].copy()))

            if nw == 1:
                work(0)
            else:
                futs = [executor.submit(work, w) for w in range(nw)]
                for f in futs:
                    f.result()

            sequences = []
            for wlist in collected:
                for mvv, mvf, mvt, mvg, soff, sbest in wlist:
                    for si in range(len(sbest)):
                        b = int(sbest[si])
                        if b == 0:
                            continue
                        o = int(soff[si])
                        sequences.append(MoveSequence(
                            mvv[o:o + b], mvf[o:o + b], mvt[o:o + b],
                            mvg[o:o + b]))

            gain, moved = apply_moves(g, part, sequences, int(limit))
            if len(moved) == 0:
                break
            li += 1
            queue = np_rng(seed, TAG_MLS, gi, 13, li).permutation(
                moved).astype(np.int32)
            if not (gain > gain_threshold * total_gain):
                break
            total_gain += gain
    return part
