"""Bounded fan-out of blocking numerical work.

Grid points, replicates, Monte Carlo row blocks and posterior subset
chunks all go through here. Results always come back in submission order.
"""

from __future__ import annotations

import asyncio
import contextvars
import logging
from typing import Callable, Sequence, TypeVar

from .config import get_settings

logger = logging.getLogger(__name__)

T = TypeVar("T")

# Set inside worker threads; nested fan-outs then run inline on that worker
_IN_WORKER = contextvars.ContextVar("edgevote_in_worker", default=False)


def _runs_inline(tasks: Sequence) -> bool:
    return get_settings().runs_sequentially or len(tasks) <= 1 or _IN_WORKER.get()


def _as_worker(task: Callable[[], T]) -> T:
    _IN_WORKER.set(True)
    return task()


async def gather_blocking(
    tasks: Sequence[Callable[[], T]],
    label: str = "task",
) -> list[T]:
    """Run blocking callables on worker threads and collect their results.

    Execution mode follows Settings.runs_sequentially:
    - Sequential: call each task in order on the current thread
    - Parallel: run through asyncio.to_thread, at most EDGEVOTE_THREADS at once

    Args:
        tasks: Zero-argument callables.
        label: Name used in log messages.

    Returns:
        Task results in submission order.

    Raises:
        Exception: The first task failure, after every task has finished.
    """
    if _runs_inline(tasks):
        return [task() for task in tasks]

    semaphore = asyncio.Semaphore(get_settings().threads)

    async def run_one(task: Callable[[], T]) -> T:
        async with semaphore:
            return await asyncio.to_thread(_as_worker, task)

    results = await asyncio.gather(*(run_one(task) for task in tasks), return_exceptions=True)

    failures = [(i, r) for i, r in enumerate(results) if isinstance(r, BaseException)]
    for index, error in failures:
        logger.error("%s %d failed: %s", label, index, error)
    if failures:
        raise failures[0][1]

    return list(results)


def run_blocking(tasks: Sequence[Callable[[], T]], label: str = "task") -> list[T]:
    """Synchronous wrapper around gather_blocking.

    Called from inside a worker, the tasks run in order on that worker so
    nested fan-outs never multiply the thread count. From inside a running
    event loop, await gather_blocking instead.
    """
    if _runs_inline(tasks):
        return [task() for task in tasks]
    return asyncio.run(gather_blocking(tasks, label=label))
