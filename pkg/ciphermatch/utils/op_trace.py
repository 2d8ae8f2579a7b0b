from __future__ import annotations

import threading
from collections import Counter
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Iterator


class OperationCounter:
    """
    Thread-safe tally of ring and homomorphic operations.

    A counter becomes active for the current context inside
    `track_operations()`; worker threads started with
    `contextvars.copy_context()` report into the same instance.
    """

    def __init__(self) -> None:
        self._counts: Counter[str] = Counter()
        self._lock = threading.Lock()

    def record(self, name: str, amount: int = 1) -> None:
        with self._lock:
            self._counts[name] += amount

    def __getitem__(self, name: str) -> int:
        with self._lock:
            return self._counts[name]

    def snapshot(self) -> dict[str, int]:
        with self._lock:
            return dict(self._counts)


_active: ContextVar[tuple[OperationCounter, ...]] = ContextVar("ciphermatch_op_counters", default=())


def record(name: str, amount: int = 1) -> None:
    for counter in _active.get():
        counter.record(name, amount)


@contextmanager
def track_operations() -> Iterator[OperationCounter]:
    counter = OperationCounter()
    token = _active.set(_active.get() + (counter,))
    try:
        yield counter
    finally:
        _active.reset(token)
