"""
Seed splitting and parallel execution of independent samples
"""

import logging
from enum import IntEnum
from multiprocessing import Pool
from typing import Callable, Iterable, Iterator, List, TypeVar

import numpy as np

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class Component(IntEnum):
    """Independent random streams drawn from one root seed"""
    GRAPH = 0
    SOURCES = 1
    INITIAL_STATE = 2
    ANNEALER = 3
    RANDOM_SEARCH = 4
    PORTFOLIO = 5


def component_seed(root: int, component: Component, index: int = 0) -> int:
    """64-bit seed of stream ``component`` for sample ``index``"""
    sequence = np.random.SeedSequence(root, spawn_key=(int(component), index))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def component_rng(root: int, component: Component, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(root, spawn_key=(int(component), index)))


def iter_ensemble(task: Callable[[T], R], items: Iterable[T], workers: int = 1) -> Iterator[R]:
    """
    Yield ``task(item)`` in input order as results become available.

    ``task`` must be a module-level function when ``workers`` > 1.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        for item in items:
            yield task(item)
        return
    logger.debug(f"running {len(items)} samples on {workers} workers")
    with Pool(min(workers, len(items))) as pool:
        yield from pool.imap(task, items)


def run_ensemble(task: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    return list(iter_ensemble(task, items, workers))
