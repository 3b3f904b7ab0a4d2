"""Undirected weighted graphs in CSR form, plus file IO.

The CSR arrays are frozen after construction; every pipeline stage shares the
same graph object and kernels receive the raw arrays. Vertex and edge weights
are int64 throughout (integral weights are what the balance arithmetic is
defined on), vertex ids are int32.

File format: the classic adjacency text format. Header ``n m [fmt]`` where fmt
is 0 (no weights, may be omitted), 1 (edge weights), 10 (vertex weights) or
11 (both); then one line per vertex, 1-based neighbor ids, ``%`` starts a
comment line. Partition files hold one block id per line.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Graph",
    "GraphFormatError",
    "build_graph",
    "read_metis",
    "write_metis",
    "read_partition",
    "write_partition",
]


class GraphFormatError(ValueError):
    """Malformed graph or partition file; knows where the problem is."""

    def __init__(self, path, line, col, message):
        self.path = str(path)
        self.line = int(line)
        self.col = int(col)
        self.message = message
        super().__init__(f"{self.path}:{self.line}:{self.col}: {message}")


class Graph:
    """Immutable undirected graph in CSR form.

    Attributes:
        xadj: int64 array of length n+1, neighbor range offsets.
        adjncy: int32 array of length 2m, neighbor ids (both directions).
        adjwgt: int64 array of length 2m, edge weights (symmetric).
        vwgt: int64 array of length n, positive vertex weights.
    """

    __slots__ = ("xadj", "adjncy", "adjwgt", "vwgt", "_total_vwgt")

    def __init__(self, xadj, adjncy, adjwgt, vwgt):
        self.xadj = np.ascontiguousarray(xadj, dtype=np.int64)
        self.adjncy = np.ascontiguousarray(adjncy, dtype=np.int32)
        self.adjwgt = np.ascontiguousarray(adjwgt, dtype=np.int64)
        self.vwgt = np.ascontiguousarray(vwgt, dtype=np.int64)
        for a in (self.xadj, self.adjncy, self.adjwgt, self.vwgt):
            a.setflags(write=False)
        self._total_vwgt = int(self.vwgt.sum())

    @property
    def n(self) -> int:
        return len(self.vwgt)

    @property
    def m(self) -> int:
        """Number of undirected edges."""
        return len(self.adjncy) // 2

    @property
    def total_vertex_weight(self) -> int:
        return self._total_vwgt

    def degree(self, v: int) -> int:
        return int(self.xadj[v + 1] - self.xadj[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.xadj)

    def neighbors(self, v: int):
        """Views of the neighbor ids and edge weights of v."""
        a, b = self.xadj[v], self.xadj[v + 1]
        return self.adjncy[a:b], self.adjwgt[a:b]

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            np.array_equal(self.xadj, other.xadj)
            and np.array_equal(self.adjncy, other.adjncy)
            and np.array_equal(self.adjwgt, other.adjwgt)
            and np.array_equal(self.vwgt, other.vwgt)
        )

    __hash__ = None

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m}, c(V)={self.total_vertex_weight})"

    @classmethod
    def from_csr(cls, xadj, adjncy, adjwgt, vwgt, validate: bool = False) -> "Graph":
        """Wrap prebuilt CSR arrays. validate=True checks structure and symmetry."""
        g = cls(xadj, adjncy, adjwgt, vwgt)
        if validate:
            _check_csr(g)
        return g


def _check_csr(g: Graph) -> None:
    n = g.n
    if len(g.xadj) != n + 1 or g.xadj[0] != 0 or g.xadj[-1] != len(g.adjncy):
        raise ValueError("inconsistent xadj")
    if np.any(np.diff(g.xadj) < 0):
        raise ValueError("xadj not monotone")
    if len(g.adjwgt) != len(g.adjncy):
        raise ValueError("adjwgt length mismatch")
    if n and (g.vwgt <= 0).any():
        raise ValueError("vertex weights must be positive")
    if len(g.adjncy):
        if g.adjncy.min() < 0 or g.adjncy.max() >= n:
            raise ValueError("neighbor id out of range")
        if (g.adjwgt <= 0).any():
            raise ValueError("edge weights must be positive")
        src = np.repeat(np.arange(n, dtype=np.int64), np.diff(g.xadj))
        if np.any(src == g.adjncy):
            raise ValueError("self loop")
        fwd = np.lexsort((g.adjncy, src))
        rev = np.lexsort((src, g.adjncy))
        ok = (
            np.array_equal(src[fwd], g.adjncy[rev])
            and np.array_equal(g.adjncy[fwd], src[rev])
            and np.array_equal(g.adjwgt[fwd], g.adjwgt[rev])
        )
        if not ok:
            raise ValueError("adjacency not symmetric")


def _as_int_array(values, what: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.size == 0:
        return arr.astype(np.int64).reshape(arr.shape)
    if not np.issubdtype(arr.dtype, np.number):
        raise ValueError(f"{what} must be numeric")
    if np.issubdtype(arr.dtype, np.floating):
        rounded = np.rint(arr)
        if not np.all(np.isfinite(arr)) or np.any(arr != rounded):
            raise ValueError(f"{what} must be integral")
        arr = rounded
    return arr.astype(np.int64)


def build_graph(edges, n: int | None = None, vertex_weights=None) -> Graph:
    """Build a Graph from an edge list.

    Args:
        edges: sequence or (m,2)/(m,3) array of (u, v) or (u, v, weight) rows.
            Unweighted edges get weight 1. Parallel edges are merged by
            summing their weights.
        n: vertex count; inferred as max id + 1 when omitted. Required for
            graphs with isolated trailing vertices or an empty edge list.
        vertex_weights: positive integer weights, default all ones.

    Raises:
        ValueError: on self loops, ids out of range, or non-positive weights.
    """
    rows = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges)
    if rows.size == 0:
        rows = rows.reshape(0, 2)
    if rows.ndim != 2 or rows.shape[1] not in (2, 3):
        raise ValueError("edges must be (u, v) or (u, v, weight) rows")
    uv = _as_int_array(rows[:, :2], "vertex ids")
    if rows.shape[1] == 3:
        w = _as_int_array(rows[:, 2], "edge weights")
    else:
        w = np.ones(len(rows), dtype=np.int64)

    if len(uv) and uv.min() < 0:
        raise ValueError("vertex ids must be non-negative")
    max_id = int(uv.max()) if len(uv) else -1
    if n is None:
        if max_id < 0:
            raise ValueError("n is required for an empty edge list")
        n = max_id + 1
    elif n <= max_id:
        raise ValueError(f"vertex id {max_id} out of range for n={n}")

    if np.any(uv[:, 0] == uv[:, 1]):
        bad = int(uv[np.argmax(uv[:, 0] == uv[:, 1]), 0])
        raise ValueError(f"self loop at vertex {bad}")
    if np.any(w <= 0):
        raise ValueError("edge weights must be positive")

    if vertex_weights is None:
        vwgt = np.ones(n, dtype=np.int64)
    else:
        vwgt = _as_int_array(vertex_weights, "vertex weights")
        if len(vwgt) != n:
            raise ValueError(f"expected {n} vertex weights, got {len(vwgt)}")
        if n and vwgt.min() <= 0:
            raise ValueError("vertex weights must be positive")

    # symmetrize, then merge parallel edges by summing weights
    src = np.concatenate([uv[:, 0], uv[:, 1]])
    dst = np.concatenate([uv[:, 1], uv[:, 0]])
    ww = np.concatenate([w, w])
    order = np.lexsort((dst, src))
    src, dst, ww = src[order], dst[order], ww[order]
    if len(src):
        new_group = np.empty(len(src), dtype=bool)
        new_group[0] = True
        new_group[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
        starts = np.flatnonzero(new_group)
        merged_w = np.add.reduceat(ww, starts)
        src, dst = src[starts], dst[starts]
    else:
        merged_w = ww

    xadj = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=xadj[1:])
    return Graph(xadj, dst.astype(np.int32), merged_w, vwgt)


# ---------------------------------------------------------------------------
# file IO


def _tokenize(raw: str):
    """Split one line into (token, 1-based column) pairs, honoring % comments."""
    if "%" in raw:
        raw = raw[: raw.index("%")]
    out = []
    i, L = 0, len(raw)
    while i < L:
        if raw[i].isspace():
            i += 1
            continue
        j = i
        while j < L and not raw[j].isspace():
            j += 1
        out.append((raw[i:j], i + 1))
        i = j
    return out


def _parse_uint(tok, path, line, col, what, minimum=0):
    try:
        v = int(tok)
    except ValueError:
        raise GraphFormatError(path, line, col, f"{what} must be an integer, got {tok!r}") from None
    if v < minimum:
        raise GraphFormatError(path, line, col, f"{what} must be >= {minimum}, got {v}")
    return v


def read_metis(path) -> Graph:
    """Read a graph file; raises GraphFormatError with line:col on bad input."""
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.readlines()

    it = enumerate(lines, start=1)
    header = None
    for lineno, raw in it:
        toks = _tokenize(raw)
        if toks:
            header = (lineno, toks)
            break
    if header is None:
        raise GraphFormatError(path, max(len(lines), 1), 1, "missing header line")

    hline, toks = header
    if len(toks) not in (2, 3):
        raise GraphFormatError(path, hline, toks[0][1], "header must be 'n m [fmt]'")
    n = _parse_uint(toks[0][0], path, hline, toks[0][1], "vertex count")
    m_declared = _parse_uint(toks[1][0], path, hline, toks[1][1], "edge count")
    fmt = 0
    if len(toks) == 3:
        fmt = _parse_uint(toks[2][0], path, hline, toks[2][1], "format code")
        if fmt not in (0, 1, 10, 11):
            raise GraphFormatError(path, hline, toks[2][1], f"unsupported format code {fmt}")
    has_ew = fmt % 10 == 1
    has_vw = fmt >= 10

    vwgt = np.ones(n, dtype=np.int64)
    srcs, dsts, wgts, poss = [], [], [], []

    v = 0
    for lineno, raw in it:
        if raw.lstrip().startswith("%"):
            continue
        toks = _tokenize(raw)
        if v >= n:
            if not toks:
                continue  # trailing blank lines are harmless
            raise GraphFormatError(path, lineno, toks[0][1], f"more than {n} vertex lines")
        # a blank line is a vertex with no neighbors
        idx = 0
        if has_vw:
            if not toks:
                raise GraphFormatError(path, lineno, 1, "vertex weight missing")
            wv = _parse_uint(toks[0][0], path, lineno, toks[0][1], "vertex weight", minimum=1)
            vwgt[v] = wv
            idx = 1
        rest = toks[idx:]
        step = 2 if has_ew else 1
        if len(rest) % step:
            t, c = rest[-1]
            raise GraphFormatError(path, lineno, c, "neighbor id without edge weight")
        for i in range(0, len(rest), step):
            t, c = rest[i]
            u = _parse_uint(t, path, lineno, c, "neighbor id", minimum=1)
            if u > n:
                raise GraphFormatError(path, lineno, c, f"neighbor id {u} out of range 1..{n}")
            if u - 1 == v:
                raise GraphFormatError(path, lineno, c, f"self loop at vertex {v + 1}")
            if has_ew:
                tw, cw = rest[i + 1]
                w = _parse_uint(tw, path, lineno, cw, "edge weight", minimum=1)
            else:
                w = 1
            srcs.append(v)
            dsts.append(u - 1)
            wgts.append(w)
            poss.append((lineno, c))
        v += 1

    if v != n:
        raise GraphFormatError(path, len(lines), 1, f"expected {n} vertex lines, found {v}")

    src = np.asarray(srcs, dtype=np.int64).reshape(-1)
    dst = np.asarray(dsts, dtype=np.int64).reshape(-1)
    ww = np.asarray(wgts, dtype=np.int64).reshape(-1)

    # merge duplicate mentions of the same directed pair, then demand symmetry
    order = np.lexsort((dst, src))
    src, dst, ww = src[order], dst[order], ww[order]
    pos_order = order
    if len(src):
        new_group = np.empty(len(src), dtype=bool)
        new_group[0] = True
        new_group[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
        starts = np.flatnonzero(new_group)
        ww = np.add.reduceat(ww, starts)
        src, dst = src[starts], dst[starts]
        pos_order = pos_order[starts]

    lo = np.minimum(src, dst)
    hi = np.maximum(src, dst)
    ord2 = np.lexsort((src, hi, lo))
    lo2, hi2, w2 = lo[ord2], hi[ord2], ww[ord2]
    bad = -1
    if len(lo2) % 2:
        bad = 0
    else:
        a = np.arange(0, len(lo2), 2)
        pairs_ok = (
            np.array_equal(lo2[a], lo2[a + 1])
            and np.array_equal(hi2[a], hi2[a + 1])
            and np.array_equal(w2[a], w2[a + 1])
        )
        if not pairs_ok:
            bad = 0
    if bad == 0:
        # locate the first directed edge whose mirror is missing or mismatched
        key = {}
        for i in range(len(src)):
            key[(int(src[i]), int(dst[i]))] = int(ww[i])
        for i in range(len(src)):
            s, d, w = int(src[i]), int(dst[i]), int(ww[i])
            if key.get((d, s)) != w:
                ln, c = poss[pos_order[i]]
                raise GraphFormatError(
                    path, ln, c,
                    f"edge {s + 1}-{d + 1} has no matching reverse entry with equal weight",
                )

    if len(src) // 2 != m_declared:
        raise GraphFormatError(
            path, hline, 1,
            f"header declares {m_declared} edges, file contains {len(src) // 2}",
        )

    xadj = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=xadj[1:])
    return Graph(xadj, dst.astype(np.int32), ww, vwgt)


def write_metis(g: Graph, path) -> None:
    """Write in canonical form: minimal fmt code, sorted neighbors, single spaces."""
    has_vw = bool((g.vwgt != 1).any())
    has_ew = bool((g.adjwgt != 1).any()) if len(g.adjwgt) else False
    fmt = (10 if has_vw else 0) + (1 if has_ew else 0)
    with open(path, "w", encoding="ascii") as fh:
        if fmt:
            fh.write(f"{g.n} {g.m} {fmt:02d}\n" if has_vw else f"{g.n} {g.m} {fmt}\n")
        else:
            fh.write(f"{g.n} {g.m}\n")
        for v in range(g.n):
            parts = []
            if has_vw:
                parts.append(str(int(g.vwgt[v])))
            ids, ws = g.neighbors(v)
            order = np.argsort(ids, kind="stable")
            for i in order:
                parts.append(str(int(ids[i]) + 1))
                if has_ew:
                    parts.append(str(int(ws[i])))
            fh.write(" ".join(parts) + "\n")


def read_partition(path) -> np.ndarray:
    """Read one block id per line into an int32 array."""
    out = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            toks = _tokenize(raw)
            if not toks:
                continue
            if len(toks) != 1:
                raise GraphFormatError(path, lineno, toks[1][1], "one block id per line")
            out.append(_parse_uint(toks[0][0], path, lineno, toks[0][1], "block id"))
    return np.asarray(out, dtype=np.int32)


def write_partition(assignment, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for b in np.asarray(assignment).tolist():
            fh.write(f"{int(b)}\n")
