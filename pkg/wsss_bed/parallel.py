"""
Order-preserving parallel map over dataset images.

Work runs on a thread pool (numpy and Pillow release the GIL for the heavy
parts); results always come back in input order so reductions downstream are
independent of the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

from tqdm import tqdm

T = TypeVar("T")
R = TypeVar("R")


def default_jobs() -> int:
    return os.cpu_count() or 1


def map_ordered(
    fn: Callable[[T], R],
    items: Sequence[T],
    jobs: Optional[int] = None,
    desc: Optional[str] = None,
) -> List[R]:
    jobs = default_jobs() if jobs is None else jobs
    if jobs < 1:
        raise ValueError(f"jobs must be at least 1, got {jobs}")

    # disable=None turns the bar off when stderr is not a terminal
    progress = tqdm(total=len(items), desc=desc, disable=None, leave=False)
    try:
        if jobs == 1 or len(items) <= 1:
            results = []
            for item in items:
                results.append(fn(item))
                progress.update()
            return results
        with ThreadPoolExecutor(max_workers=min(jobs, len(items))) as executor:
            results = []
            for result in executor.map(fn, items):
                results.append(result)
                progress.update()
            return results
    finally:
        progress.close()
