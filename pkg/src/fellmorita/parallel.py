from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, List, Optional, Sequence, TypeVar

from fellmorita.config import settings

T = TypeVar("T")
R = TypeVar("R")


def map_indexed(
    fn: Callable[[T], R],
    items: Sequence[T],
    *,
    max_workers: Optional[int] = None,
) -> List[R]:
    """
    Apply fn to every item, keeping input order.

    Runs inline for one worker; otherwise results land in index slots, so the
    output does not depend on completion order.
    """
    workers = max_workers if max_workers is not None else settings.max_workers
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    results: List[Optional[R]] = [None] * len(items)
    filled = [False] * len(items)

    def _one(i: int, item: T) -> tuple[int, R]:
        try:
            return i, fn(item)
        except Exception as e:
            raise RuntimeError(f"Parallel task failed at index={i}: {e}") from e

    with ThreadPoolExecutor(max_workers=workers) as ex:
        futures = [ex.submit(_one, i, item) for i, item in enumerate(items)]
        for fut in as_completed(futures):
            i, value = fut.result()
            results[i] = value
            filled[i] = True

    if not all(filled):
        raise RuntimeError("Internal error: missing result for one or more tasks.")
    return results  # type: ignore[return-value]
