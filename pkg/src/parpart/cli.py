"""Command line entry point.

Reads a metis-format graph, partitions it, writes the partition file and an
optional metrics CSV, and prints a one-line summary to stdout. Exit codes:
0 success, 1 invalid flags, 2 unreadable input, 3 malformed graph file.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from .driver import PartitionerConfig, partition
from .graph import GraphFormatError, read_metis, write_partition

__all__ = ["main"]

_PRESETS = {
    # fewer attempts and iterations: roughly half the work for most inputs
    "fast": dict(coarsening_iterations=5, refinement_iterations=8,
                 initial_attempts=2, mls_global_iterations=1),
    # more attempts and search rounds at the cost of runtime
    "quality": dict(refinement_iterations=40, initial_attempts=16,
                    mls_global_iterations=5),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    p = _Parser(prog="parpart",
                description="Balanced k-way graph partitioner.")
    p.add_argument("graph", help="input graph in metis format")
    p.add_argument("--k", type=int, required=True, help="number of blocks")
    p.add_argument("--epsilon", type=float, default=0.03,
                   help="allowed imbalance (default 0.03)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker threads (default: logical cores)")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--output", "-o", help="partition output file")
    p.add_argument("--metrics-csv", help="write per-phase metrics CSV here")
    p.add_argument("--preset", choices=sorted(_PRESETS),
                   help="quality knob bundle")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.k < 1:
        print(f"parpart: error: --k must be >= 1, got {args.k}",
              file=sys.stderr)
        return 1
    if args.epsilon < 0:
        print(f"parpart: error: --epsilon must be >= 0, got {args.epsilon}",
              file=sys.stderr)
        return 1
    if args.threads < 1:
        print(f"parpart: error: --threads must be >= 1, got {args.threads}",
              file=sys.stderr)
        return 1

    try:
        g = read_metis(args.graph)
    except GraphFormatError as exc:
        print(str(exc), file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"parpart: cannot read {args.graph}: {exc.strerror or exc}",
              file=sys.stderr)
        return 2

    knobs = dict(_PRESETS[args.preset]) if args.preset else {}
    config = PartitionerConfig(k=args.k, epsilon=args.epsilon,
                               workers=args.threads, seed=args.seed, **knobs)
    try:
        config.validate()
        if config.k > g.n:
            raise ValueError(f"k={config.k} exceeds vertex count {g.n}")
    except ValueError as exc:
        print(f"parpart: error: {exc}", file=sys.stderr)
        return 1

    t0 = time.perf_counter()
    part, report = partition(g, config)
    elapsed = time.perf_counter() - t0

    if args.output:
        try:
            write_partition(part.assignment, args.output)
        except OSError as exc:
            print(f"parpart: cannot write {args.output}: "
                  f"{exc.strerror or exc}", file=sys.stderr)
            return 2
    if args.metrics_csv:
        try:
            with open(args.metrics_csv, "w", encoding="ascii") as fh:
                fh.write(report.to_csv())
        except OSError as exc:
            print(f"parpart: cannot write {args.metrics_csv}: "
                  f"{exc.strerror or exc}", file=sys.stderr)
            return 2

    print(f"cut={part.cut} balance={part.imbalance():.4f} time={elapsed:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
