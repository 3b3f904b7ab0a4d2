"""Scikit-learn style front end for the partitioner."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClusterMixin

from .driver import PartitionerConfig, partition
from .graph import Graph, build_graph

__all__ = ["GraphPartitioner", "as_graph"]


def _as_integral(values, what: str) -> np.ndarray:
    """Cast to int64, rejecting fractional values instead of truncating."""
    arr = np.asarray(values)
    if arr.dtype.kind == "f":
        rounded = np.rint(arr)
        if not np.array_equal(rounded, arr):
            raise ValueError(f"{what} must be integers; got fractional values")
        arr = rounded
    return arr.astype(np.int64)


def as_graph(X) -> Graph:
    """Coerce X into a Graph.

    Accepts a Graph, a symmetric scipy sparse adjacency matrix, a symmetric
    dense adjacency array, or an (m, 2)/(m, 3) edge array. Adjacency entries
    must be non-negative integers; zeros mean no edge.
    """
    if isinstance(X, Graph):
        return X
    if sp.issparse(X):
        A = sp.coo_matrix(X)
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"adjacency matrix must be square, got {A.shape}")
        mask = (A.row < A.col) & (A.data != 0)
        weights = _as_integral(A.data[mask], "adjacency weights")
        edges = np.column_stack([A.row[mask], A.col[mask], weights])
        g = build_graph(edges, n=A.shape[0])
        # reject asymmetry: rebuilt symmetric graph must match the input
        At = sp.coo_matrix(X.T)
        if (abs(A - At)).count_nonzero() != 0:
            raise ValueError("adjacency matrix must be symmetric")
        return g
    X = np.asarray(X)
    if X.ndim == 2 and X.shape[0] == X.shape[1] and X.shape[0] > 3:
        if not np.array_equal(X, X.T):
            raise ValueError("adjacency matrix must be symmetric")
        r, c = np.nonzero(np.triu(X, 1))
        weights = _as_integral(X[r, c], "adjacency weights")
        return build_graph(np.column_stack([r, c, weights]), n=X.shape[0])
    if X.ndim == 2 and X.shape[1] in (2, 3):
        return build_graph(_as_integral(X, "edge entries"))
    if X.ndim == 2 and X.shape[0] == X.shape[1]:
        # small square arrays are ambiguous; require symmetry to treat as
        # adjacency, otherwise interpret rows as edges
        if np.array_equal(X, X.T):
            r, c = np.nonzero(np.triu(X, 1))
            weights = _as_integral(X[r, c], "adjacency weights")
            return build_graph(np.column_stack([r, c, weights]), n=X.shape[0])
        return build_graph(_as_integral(X, "edge entries"))
    raise TypeError(
        "X must be a Graph, a symmetric adjacency matrix, or an edge array")


class GraphPartitioner(ClusterMixin, BaseEstimator):
    """Balanced k-way graph partitioner with a clusterer interface.

    fit(X) computes a partition of the graph X into k blocks whose weights
    stay within (1 + epsilon) times the average, minimizing the weight of
    edges between blocks.

    Attributes after fit: labels_ (block per vertex), cut_ (total weight of
    cut edges), block_weights_, report_ (per-phase metrics).
    """

    def __init__(self, k: int = 2, epsilon: float = 0.03, workers: int = 1,
                 seed: int = 0, coarsening_iterations: int = 10,
                 refinement_iterations: int = 25, initial_attempts: int = 4,
                 mls_global_iterations: int = 3, mls_threshold: float = 0.1,
                 cluster_factor: int = 16):
        self.k = k
        self.epsilon = epsilon
        self.workers = workers
        self.seed = seed
        self.coarsening_iterations = coarsening_iterations
        self.refinement_iterations = refinement_iterations
        self.initial_attempts = initial_attempts
        self.mls_global_iterations = mls_global_iterations
        self.mls_threshold = mls_threshold
        self.cluster_factor = cluster_factor

    def _config(self) -> PartitionerConfig:
        return PartitionerConfig(
            k=self.k, epsilon=self.epsilon, workers=self.workers,
            seed=self.seed,
            coarsening_iterations=self.coarsening_iterations,
            refinement_iterations=self.refinement_iterations,
            initial_attempts=self.initial_attempts,
            mls_global_iterations=self.mls_global_iterations,
            mls_threshold=self.mls_threshold,
            cluster_factor=self.cluster_factor)

    def fit(self, X, y=None):
        g = as_graph(X)
        part, report = partition(g, self._config())
        self.n_features_in_ = g.n
        self.labels_ = part.assignment.copy()
        self.cut_ = part.cut
        self.block_weights_ = part.block_weight.copy()
        self.report_ = report
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_
