"""Worker-pool plumbing shared by the parallel phases.

Phases submit one callable per worker id; kernels drop the GIL, so threads
genuinely overlap on multicore hosts. workers=1 runs inline in the caller.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

__all__ = ["run_workers"]


def run_workers(fn, workers: int, executor: ThreadPoolExecutor | None = None) -> None:
    """Run fn(worker_id) for each worker id and wait; exceptions propagate."""
    if workers <= 1:
        fn(0)
        return
    if executor is None:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            futures = [ex.submit(fn, w) for w in range(workers)]
            for f in futures:
                f.result()
    else:
        futures = [executor.submit(fn, w) for w in range(workers)]
        for f in futures:
            f.result()
