"""Shared-memory parallel multilevel graph partitioner.

Partitions a graph into k blocks of near-equal weight while minimizing the
total weight of edges between blocks. The pipeline coarsens with
size-constrained parallel label propagation, partitions the coarsest graph
by repeated recursive bisection, and refines each level with label
propagation plus multi-try local search under a hard balance bound.
"""

from .graph import (Graph, GraphFormatError, build_graph, read_metis,
                    read_partition, write_metis, write_partition)
from .partition import (Partition, balance_bound, boundary_vertices, cut_size,
                        validate_partition)
from .coarsening import build_hierarchy, contract, lp_cluster
from .initpart import bisect, initial_partition, recursive_bisection
from .refine import (apply_moves, lp_refine, multi_try_local_search,
                     perform_moves, should_stop)
from .hashcache import CacheAwareMap, TabularHasher, tabular_hash
from .driver import MetricsReport, PartitionerConfig, partition, project_partition
from .estimator import GraphPartitioner

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "GraphFormatError",
    "build_graph",
    "read_metis",
    "write_metis",
    "read_partition",
    "write_partition",
    "Partition",
    "balance_bound",
    "boundary_vertices",
    "cut_size",
    "validate_partition",
    "build_hierarchy",
    "contract",
    "lp_cluster",
    "bisect",
    "initial_partition",
    "recursive_bisection",
    "lp_refine",
    "multi_try_local_search",
    "perform_moves",
    "apply_moves",
    "should_stop",
    "CacheAwareMap",
    "TabularHasher",
    "tabular_hash",
    "PartitionerConfig",
    "MetricsReport",
    "partition",
    "project_partition",
    "GraphPartitioner",
    "__version__",
]
