"""Utilities for fanning work out over a thread pool with progress tracking.

Results always come back in item order, whatever order the workers finish in, so every
reduction built on top of them is independent of the pool size.
"""

from __future__ import annotations

from concurrent.futures import Future, ThreadPoolExecutor, as_completed
from typing import TYPE_CHECKING, TypeVar

from .config import MAX_WORKERS, TASK_COLOR

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from rich.progress import Progress

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(workers: int | None) -> int:
    """Pool size to use; None means the available parallelism."""
    return MAX_WORKERS if workers is None else max(1, workers)


def manage_finished_tasks(
    futures: dict[Future, int],
    job_progress: Progress | None,
    overall_task: int | None,
) -> None:
    """Advance the overall progress task as futures complete."""
    for _ in as_completed(futures):
        if job_progress is not None and overall_task is not None:
            job_progress.advance(overall_task)


def run_in_parallel(
    func: Callable[..., R],
    items: Sequence[T],
    *args: object,
    workers: int | None = None,
    job_progress: Progress | None = None,
    description: str = "Progress",
) -> list[R]:
    """Apply func(item, *args) to every item on a thread pool, preserving item order.

    With a single worker the items run inline, which keeps tracebacks simple and
    avoids thread start-up for small jobs.
    """
    num_items = len(items)
    overall_task = None
    if job_progress is not None:
        overall_task = job_progress.add_task(
            f"[{TASK_COLOR}]{description}", total=num_items, visible=True,
        )

    pool_size = resolve_workers(workers)
    if pool_size == 1 or num_items <= 1:
        results = []
        for item in items:
            results.append(func(item, *args))
            if job_progress is not None:
                job_progress.advance(overall_task)
        return results

    with ThreadPoolExecutor(max_workers=pool_size) as executor:
        futures = {
            executor.submit(func, item, *args): indx for indx, item in enumerate(items)
        }
        manage_finished_tasks(futures, job_progress, overall_task)

    ordered = sorted(futures.items(), key=lambda entry: entry[1])
    return [future.result() for future, _ in ordered]
