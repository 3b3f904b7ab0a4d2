import numpy as np
import pytest

from parpart.graph import Graph, build_graph


@pytest.fixture
def path4() -> Graph:
    return build_graph([(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def cycle4() -> Graph:
    return build_graph([(0, 1), (1, 2), (2, 3), (3, 0)])


@pytest.fixture
def two_triangles() -> Graph:
    """Two triangles joined by a single bridge edge 2-3."""
    return build_graph([(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)])


def grid_graph(rows: int, cols: int) -> Graph:
    edges = []
    for i in range(rows):
        for j in range(cols):
            v = i * cols + j
            if j + 1 < cols:
                edges.append((v, v + 1))
            if i + 1 < rows:
                edges.append((v, v + cols))
    return build_graph(edges)


def random_graph(n: int, m: int, seed: int, weighted: bool = False) -> Graph:
    """Random simple graph with exactly m edges (m capped at the maximum)."""
    rng = np.random.default_rng(seed)
    m = min(m, n * (n - 1) // 2)
    edges = set()
    while len(edges) < m:
        a, b = (int(x) for x in rng.integers(0, n, 2))
        if a != b:
            edges.add((min(a, b), max(a, b)))
    rows = sorted(edges)
    if weighted:
        w = rng.integers(1, 8, len(rows))
        rows = [(a, b, int(wi)) for (a, b), wi in zip(rows, w)]
        vw = rng.integers(1, 5, n).astype(np.int64)
        return build_graph(rows, n=n, vertex_weights=vw)
    return build_graph(rows, n=n)
