"""Coarsening: size-constrained parallel label propagation and contraction.

Clustering walks vertices in work packets (bounded total degree, so packets
cost roughly the same), moving each vertex to the eligible neighboring cluster
with the strongest connection. Cluster weights are guarded by an atomic
reserve: a move first claims room in the target cluster with compare-and-swap
against the bound U, so U holds under any interleaving. Neighbors of moved
vertices are re-queued for the next iteration through a seen-array dedup.

Contraction runs in three phases: dense cluster-id remap (prefix sum),
parallel accumulation of crossing edge weights into a shared concurrent map
(slots claimed by CAS, weights added atomically, restart with doubled capacity
on overflow), and sequential assembly of the coarse CSR from the sorted
accumulated triples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ._atomics import cas, fetch_add
from ._parallel import run_workers
from ._rng import TAG_COARSEN, mix, mix2, next_below, np_rng
from .graph import Graph
from .hashcache import TabularHasher, tab_hash

__all__ = [
    "ClusterAssignment",
    "WorkPacket",
    "HierarchyLevel",
    "packet_bound",
    "build_packets",
    "lp_cluster",
    "contract",
    "build_hierarchy",
]


@dataclass
class ClusterAssignment:
    """Clustering of a graph: cluster id per vertex plus maintained weights."""

    cluster: np.ndarray  # int32 per vertex, ids live in the vertex id space
    cluster_weight: np.ndarray  # int64 per cluster id
    U: int
    # per iteration: (queued vertices, queued degree sum, edges scanned, moves)
    iteration_stats: list = field(default_factory=list)

    @classmethod
    def from_array(cls, g: Graph, cluster, U: int | None = None) -> "ClusterAssignment":
        cluster = np.ascontiguousarray(cluster, dtype=np.int32)
        if len(cluster) != g.n:
            raise ValueError("cluster array length mismatch")
        if g.n and (cluster.min() < 0 or cluster.max() >= g.n):
            raise ValueError("cluster id out of range")
        weights = np.zeros(g.n, dtype=np.int64)
        np.add.at(weights, cluster, g.vwgt)
        if U is None:
            U = int(weights.max()) if g.n else 0
        return cls(cluster=cluster, cluster_weight=weights, U=int(U))

    @property
    def n_clusters(self) -> int:
        return len(np.unique(self.cluster))


@dataclass
class WorkPacket:
    vertices: np.ndarray
    degree_sum: int


@dataclass
class HierarchyLevel:
    coarse_graph: Graph
    map_to_coarse: np.ndarray  # int32, one coarse id per fine vertex


def packet_bound(m: int) -> int:
    return max(1000, int(math.isqrt(max(m, 0))))


@njit(cache=True, nogil=True)
def _packet_offsets(verts, degs, bound):
    n = len(verts)
    offsets = np.empty(n + 1, dtype=np.int64)
    offsets[0] = 0
    cnt = 0
    cur = np.int64(0)
    for i in range(n):
        d = degs[verts[i]]
        if cur > 0 and cur + d > bound:
            cnt += 1
            offsets[cnt] = i
            cur = 0
        cur += d
    cnt += 1
    offsets[cnt] = n
    return offsets[: cnt + 1].copy()


def build_packets(order, g: Graph) -> list[WorkPacket]:
    """Split a vertex order into packets with degree sums capped at B.

    B = max(1000, sqrt(m)); a vertex whose degree alone exceeds B forms a
    singleton packet. Vertex order is preserved within and across packets.
    """
    order = np.ascontiguousarray(order, dtype=np.int32)
    degs = g.degrees()
    offsets = _packet_offsets(order, degs, packet_bound(g.m))
    out = []
    for i in range(len(offsets) - 1):
        vs = order[offsets[i]:offsets[i + 1]]
        out.append(WorkPacket(vertices=vs, degree_sum=int(degs[vs].sum())))
    return out


@njit(cache=True, nogil=True)
def _lp_packet(xadj, adjncy, adjwgt, vwgt, cluster, cluster_weight, U,
               verts, lo, hi, seen, iter_idx, nextbuf, next_cnt,
               stamp, slot, ckeys, cvals, tag_cell, seed64):
    """Process verts[lo:hi]; returns (moves, edges scanned)."""
    moved = 0
    scanned = np.int64(0)
    for i in range(lo, hi):
        v = verts[i]
        own = cluster[v]
        wv = vwgt[v]
        tag_cell[0] += 1
        tag = tag_cell[0]
        nd = 0
        for e in range(xadj[v], xadj[v + 1]):
            c = cluster[adjncy[e]]
            w = adjwgt[e]
            if stamp[c] != tag:
                stamp[c] = tag
                slot[c] = nd
                ckeys[nd] = c
                cvals[nd] = w
                nd += 1
            else:
                cvals[slot[c]] += w
        scanned += xadj[v + 1] - xadj[v]

        own_conn = cvals[slot[own]] if stamp[own] == tag else np.int64(0)
        # strongest eligible connection; own cluster always eligible
        best = own_conn
        for j in range(nd):
            c = ckeys[j]
            if c == own:
                continue
            if cvals[j] > best and cluster_weight[c] + wv <= U:
                best = cvals[j]
        # uniform choice among ties (own competes when own_conn == best)
        ties = 0
        if own_conn == best:
            ties += 1
        for j in range(nd):
            c = ckeys[j]
            if c != own and cvals[j] == best and cluster_weight[c] + wv <= U:
                ties += 1
        if ties == 0:
            continue
        state = mix2(mix2(seed64, np.uint64(iter_idx)), np.uint64(v))
        state, pick = next_below(state, ties)
        chosen = np.int32(-1)
        idx = np.int64(0)
        if own_conn == best:
            if pick == 0:
                chosen = own
            idx = 1
        if chosen == -1:
            for j in range(nd):
                c = ckeys[j]
                if c != own and cvals[j] == best and cluster_weight[c] + wv <= U:
                    if idx == pick:
                        chosen = c
                        break
                    idx += 1
        if chosen == -1 or chosen == own:
            continue

        # atomic reserve on the target, then release the old cluster
        ok = False
        while True:
            cur = cluster_weight[chosen]
            if cur + wv > U:
                break
            if cas(cluster_weight, chosen, cur, cur + wv):
                ok = True
                break
        if not ok:
            continue
        fetch_add(cluster_weight, own, -wv)
        cluster[v] = chosen
        moved += 1
        for e in range(xadj[v], xadj[v + 1]):
            u = adjncy[e]
            while True:
                cur = seen[u]
                if cur == iter_idx:
                    break
                if cas(seen, np.intp(u), cur, np.int64(iter_idx)):
                    nextbuf[next_cnt[0]] = u
                    next_cnt[0] += 1
                    break
    return moved, scanned


def lp_cluster(g: Graph, U: int, iterations: int = 10, seed: int = 0,
               workers: int = 1, executor=None) -> ClusterAssignment:
    """Size-constrained label propagation clustering.

    Every vertex starts as its own cluster. Per iteration, queued vertices
    (all of V in increasing-degree order on the first round) move to the
    eligible neighboring cluster with the strongest connection, ties broken
    uniformly at random by the seeded RNG; a cluster is eligible when its
    weight plus the vertex weight stays within U. No cluster ever exceeds U.

    Raises ValueError when U < max vertex weight or iterations < 1.
    """
    n = g.n
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if n == 0:
        return ClusterAssignment(np.empty(0, np.int32), np.empty(0, np.int64), int(U))
    if U < int(g.vwgt.max()):
        raise ValueError(f"U={U} below max vertex weight {int(g.vwgt.max())}")

    cluster = np.arange(n, dtype=np.int32)
    cluster_weight = g.vwgt.copy()
    degs = g.degrees()
    perm = np_rng(seed, TAG_COARSEN, 1).permutation(n)
    queue = np.lexsort((perm, degs)).astype(np.int32)
    bound = packet_bound(g.m)
    seen = np.full(n, -1, dtype=np.int64)
    seed64 = np.uint64(mix(seed, TAG_COARSEN, 2))

    stamps = [np.zeros(n, dtype=np.int64) for _ in range(workers)]
    slots = [np.zeros(n, dtype=np.int32) for _ in range(workers)]
    maxd = int(degs.max()) if n else 0
    ckeys = [np.zeros(maxd + 1, dtype=np.int32) for _ in range(workers)]
    cvals = [np.zeros(maxd + 1, dtype=np.int64) for _ in range(workers)]
    tags = [np.zeros(1, dtype=np.int64) for _ in range(workers)]
    nextbufs = [np.zeros(n, dtype=np.int32) for _ in range(workers)]
    next_cnts = [np.zeros(1, dtype=np.int64) for _ in range(workers)]
    moved_tot = [0] * workers
    scanned_tot = [0] * workers
    qpos = np.zeros(1, dtype=np.int64)

    out = ClusterAssignment(cluster, cluster_weight, int(U))
    for it in range(iterations):
        offsets = _packet_offsets(queue, degs, bound)
        n_packets = len(offsets) - 1
        qpos[0] = 0
        for w in range(workers):
            next_cnts[w][0] = 0
            moved_tot[w] = 0
            scanned_tot[w] = 0

        def work(wid, _queue=queue, _offsets=offsets, _np=n_packets, _it=it):
            while True:
                p = fetch_add(qpos, 0, 1)
                if p >= _np:
                    break
                mv, sc = _lp_packet(
                    g.xadj, g.adjncy, g.adjwgt, g.vwgt, cluster, cluster_weight,
                    np.int64(U), _queue, _offsets[p], _offsets[p + 1], seen,
                    np.int64(_it), nextbufs[wid], next_cnts[wid],
                    stamps[wid], slots[wid], ckeys[wid], cvals[wid],
                    tags[wid], seed64,
                )
                moved_tot[wid] += int(mv)
                scanned_tot[wid] += int(sc)

        run_workers(work, workers, executor)
        moved = sum(moved_tot)
        out.iteration_stats.append(
            (len(queue), int(degs[queue].sum()), sum(scanned_tot), moved)
        )
        if moved == 0:
            break
        queue = np.concatenate(
            [nextbufs[w][: int(next_cnts[w][0])] for w in range(workers)]
        )
        if len(queue) == 0:
            break
    return out


# ---------------------------------------------------------------------------
# contraction


@njit(cache=True, nogil=True)
def _accumulate(xadj, adjncy, adjwgt, map2c, nc, keys, vals, count, flag,
                v_lo, v_hi, tables, chunk_bits, low_bits):
    """Accumulate crossing-edge weights for vertices [v_lo, v_hi)."""
    mask = len(keys) - 1
    half = len(keys) // 2
    for v in range(v_lo, v_hi):
        if flag[0] != 0:
            return
        cu = np.int64(map2c[v])
        for e in range(xadj[v], xadj[v + 1]):
            cv = np.int64(map2c[adjncy[e]])
            if cu == cv:
                continue
            key = cu * nc + cv
            s = tab_hash(tables, chunk_bits, low_bits, key) & mask
            while True:
                k = keys[s]
                if k == key:
                    fetch_add(vals, s, adjwgt[e])
                    break
                if k == -1:
                    if cas(keys, s, -1, key):
                        if fetch_add(count, 0, 1) + 1 > half:
                            flag[0] = 1
                        fetch_add(vals, s, adjwgt[e])
                        break
                    continue  # slot was claimed meanwhile, re-read it
                s = (s + 1) & mask


def contract(g: Graph, clusters: ClusterAssignment, workers: int = 1,
             executor=None) -> HierarchyLevel:
    """Contract each cluster to one coarse vertex.

    Coarse vertex weights are cluster weight sums; a coarse edge (A, B)
    carries the total weight of fine edges crossing the two clusters.
    """
    n = g.n
    cluster = np.ascontiguousarray(clusters.cluster, dtype=np.int32)
    if len(cluster) != n:
        raise ValueError("cluster array length mismatch")

    # phase 1: dense remap via prefix sum over an indicator array
    present = np.zeros(n, dtype=np.int64)
    present[cluster] = 1
    remap = np.cumsum(present) - present  # new id for each present old id
    nc = int(present.sum())
    map2c = remap[cluster].astype(np.int32)

    coarse_vwgt = np.zeros(nc, dtype=np.int64)
    np.add.at(coarse_vwgt, map2c, g.vwgt)

    if nc == 1 or g.m == 0:
        xadj = np.zeros(nc + 1, dtype=np.int64)
        return HierarchyLevel(
            Graph(xadj, np.empty(0, np.int32), np.empty(0, np.int64), coarse_vwgt),
            map2c,
        )

    # phase 2: parallel accumulation into the shared concurrent map
    avg_deg = max(1, (2 * g.m) // max(1, n))
    entries = max(64, min(avg_deg * nc, max(g.m // 10, 64)))
    capacity = 64
    while capacity < 2 * entries:
        capacity *= 2
    key_bits = min(62, max(6, (nc * nc - 1).bit_length()))
    hasher = TabularHasher(seed=0x51AB, key_bits=key_bits)

    step = max(1, (2 * g.m) // max(1, workers))
    cuts = [0]
    for t in range(1, workers):
        cuts.append(int(np.searchsorted(g.xadj, t * step)))
    cuts.append(n)

    while True:
        keys = np.full(capacity, -1, dtype=np.int64)
        vals = np.zeros(capacity, dtype=np.int64)
        count = np.zeros(1, dtype=np.int64)
        flag = np.zeros(1, dtype=np.int64)

        def work(wid):
            _accumulate(g.xadj, g.adjncy, g.adjwgt, map2c, np.int64(nc),
                        keys, vals, count, flag, cuts[wid], cuts[wid + 1],
                        hasher.tables, hasher.chunk_bits, hasher.low_bits)

        run_workers(work, workers, executor)
        if flag[0] == 0:
            break
        capacity *= 2  # overflow: restart with doubled capacity

    # phase 3: sequential assembly from sorted triples (canonical CSR)
    occ = keys != -1
    kk = keys[occ]
    ww = vals[occ]
    cu = (kk // nc).astype(np.int64)
    cv = (kk % nc).astype(np.int64)
    order = np.lexsort((cv, cu))
    cu, cv, ww = cu[order], cv[order], ww[order]
    xadj = np.zeros(nc + 1, dtype=np.int64)
    np.cumsum(np.bincount(cu, minlength=nc), out=xadj[1:])
    coarse = Graph(xadj, cv.astype(np.int32), ww, coarse_vwgt)
    return HierarchyLevel(coarse, map2c)


def coarsest_threshold(k: int) -> int:
    return max(1000, 30 * k)


def cluster_weight_bound(g: Graph, k: int, cluster_factor: int) -> int:
    return int(max(int(g.vwgt.max()), -(-g.total_vertex_weight // (cluster_factor * k))))


def build_hierarchy(g: Graph, k: int, epsilon: float, *, coarsening_iterations: int = 10,
                    cluster_factor: int = 16, seed: int = 0, workers: int = 1,
                    executor=None) -> list[HierarchyLevel]:
    """Alternate clustering and contraction until the graph is small or stalls.

    Stops at max(1000, 30k) vertices or when a level shrinks by less than a
    factor of 1.1. Levels are returned finest-first: levels[0] maps the input
    graph onto the first coarse graph.
    """
    levels: list[HierarchyLevel] = []
    cur = g
    while cur.n > coarsest_threshold(k):
        U = cluster_weight_bound(cur, k, cluster_factor)
        clusters = lp_cluster(cur, U, iterations=coarsening_iterations,
                              seed=mix(seed, TAG_COARSEN, len(levels)),
                              workers=workers, executor=executor)
        level = contract(cur, clusters, workers=workers, executor=executor)
        if level.coarse_graph.n >= cur.n:
            break  # no shrink at all: drop the identity level
        levels.append(level)
        shrunk_enough = cur.n * 10 >= level.coarse_graph.n * 11
        cur = level.coarse_graph
        if not shrunk_enough:
            break
    return levels
