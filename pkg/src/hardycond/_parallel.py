"""Process-based map for independent probe solves.

Dense solver assembly applies the same operator pipeline to a few hundred
basis vectors.  The work is numpy-heavy but dominated by many small GMRES
solves, so threads mostly fight the GIL; real scaling needs processes.
Fork is required: workers inherit the parent's cached transfer matrices
copy-on-write, so nothing large is ever pickled.
"""

from __future__ import annotations

import itertools
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from functools import partial

# token -> (fn, payload), inherited by forked workers; never pickled
_JOBS: dict = {}
_counter = itertools.count()
_limiter = None  # keeps the threadpoolctl handle alive in workers


def _limit_worker_threads():
    """Pin BLAS pools to one thread inside each forked worker."""
    global _limiter
    try:
        from threadpoolctl import threadpool_limits

        _limiter = threadpool_limits(limits=1)
    except Exception:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = "1"


def _run(token: int, idx: int):
    fn, payload = _JOBS[token]
    return fn(payload, idx)


def default_workers() -> int:
    env = os.environ.get("HARDYCOND_WORKERS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def parallel_map(fn, payload, count: int, workers: int | None = None) -> list:
    """[fn(payload, i) for i in range(count)], fanned out over forked workers.

    ``fn`` must be a module-level function (pickled by name); ``payload`` is
    shared with workers through fork and must not be mutated by them.  Falls
    back to a serial loop when only one worker is requested or fork is
    unavailable.
    """
    if workers is None:
        workers = default_workers()
    if workers <= 1 or count <= 1:
        return [fn(payload, i) for i in range(count)]
    try:
        ctx = multiprocessing.get_context("fork")
    except ValueError:
        return [fn(payload, i) for i in range(count)]
    token = next(_counter)
    _JOBS[token] = (fn, payload)
    try:
        with ProcessPoolExecutor(
            max_workers=min(workers, count),
            mp_context=ctx,
            initializer=_limit_worker_threads,
        ) as pool:
            return list(pool.map(partial(_run, token), range(count)))
    finally:
        _JOBS.pop(token, None)
