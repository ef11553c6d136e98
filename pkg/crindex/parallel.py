from typing import Callable, Iterable, List, TypeVar

from joblib import Parallel, delayed

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """
    Apply `fn` to every item, possibly in parallel, keeping input order.

    Args:
        fn: Pure function of one item
        items: Work items
        workers: Number of joblib workers (1 runs inline, -1 uses all cores)

    Returns:
        List[R]: Results in the order of `items`
    """
    items = list(items)
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    return Parallel(n_jobs=workers)(delayed(fn)(item) for item in items)
