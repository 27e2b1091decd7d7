"""Collective building blocks used by the matchers.

Every function here is a pure function of its arguments: outputs do not
depend on how work is split across threads. ``parallel_map`` is the only
place threads are started.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Sequence, TypeVar

import numpy as np

from .core import EdgeId

K = TypeVar("K", bound=Hashable)
V = TypeVar("V")
T = TypeVar("T")
R = TypeVar("R")

I64_MAX = (1 << 63) - 1

# Below this many items a parallel map runs inline; thread hand-off costs more.
PARALLEL_GRAIN = 4096


def group_by(pairs: Iterable[tuple[K, V]]) -> dict[K, list[V]]:
    """Gather the values of each distinct key.

    Values keep their input order within a group, so the result is
    deterministic for a deterministic input sequence.
    """
    out: dict[K, list[V]] = {}
    for k, v in pairs:
        bucket = out.get(k)
        if bucket is None:
            out[k] = [v]
        else:
            bucket.append(v)
    return out


def sum_by(pairs: Iterable[tuple[K, int]]) -> dict[K, int]:
    """Sum the integer values of each distinct key.

    Raises OverflowError if any partial sum leaves the signed 64-bit range.
    """
    out: dict[K, int] = {}
    for k, v in pairs:
        s = out.get(k, 0) + v
        if s > I64_MAX or s < -I64_MAX - 1:
            raise OverflowError(f"sum for key {k!r} overflows 64 bits")
        out[k] = s
    return out


def remove_duplicates(items: Iterable[T]) -> list[T]:
    """Distinct elements of ``items`` in first-occurrence order."""
    return list(dict.fromkeys(items))


def find_next(i: int, arr: Sequence[T], pred: Callable[[T], bool]) -> int:
    """Smallest ``j > i`` with ``pred(arr[j])``, or ``len(arr)`` if none.

    Probes windows of doubling size after ``i`` and then halves the first
    window containing a hit, so the cost is linear in ``j - i``.
    """
    n = len(arr)
    lo = i + 1
    size = 1
    while lo < n:
        hi = min(n, lo + size)
        if any(pred(arr[t]) for t in range(lo, hi)):
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if any(pred(arr[t]) for t in range(lo, mid)):
                    hi = mid
                else:
                    lo = mid
            return lo
        lo = hi
        size *= 2
    return n


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> list[R]:
    """``[fn(x) for x in items]``, chunked across a thread pool when ``workers > 1``.

    Result order always follows ``items``. ``fn`` may only write to state
    keyed by its own argument.
    """
    if workers <= 1 or len(items) < PARALLEL_GRAIN:
        return [fn(x) for x in items]
    chunk = -(-len(items) // workers)
    parts = [items[s : s + chunk] for s in range(0, len(items), chunk)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        done = list(pool.map(lambda part: [fn(x) for x in part], parts))
    return [r for part in done for r in part]


def _tag_code(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


@dataclass(frozen=True)
class SeededRng:
    """Counter-keyed random streams.

    ``stream(batch, round, tag)`` always returns a generator with the same
    sequence for the same seed and key, independent of call order.
    """

    seed: int = 0

    def stream(self, batch: int, round_: int, tag: str) -> np.random.Generator:
        ss = np.random.SeedSequence([self.seed & ((1 << 64) - 1), batch, round_, _tag_code(tag)])
        return np.random.Generator(np.random.Philox(ss))


@dataclass
class PriorityAssignment:
    """Random 64-bit priorities; ``key`` orders edges, smallest first.

    The first edge in ``key`` order is the one the greedy matchers take first.
    Ties on the random value fall back to the edge id.
    """

    priority: dict[EdgeId, int] = field(default_factory=dict)

    def key(self, e: EdgeId) -> tuple[int, EdgeId]:
        return (self.priority[e], e)

    def order(self, edges: Iterable[EdgeId]) -> list[EdgeId]:
        pri = self.priority
        return sorted(edges, key=lambda e: (pri[e], e))

    def __contains__(self, e: EdgeId) -> bool:
        return e in self.priority

    def __len__(self) -> int:
        return len(self.priority)

    @classmethod
    def from_ranks(cls, ranked: Sequence[EdgeId]) -> PriorityAssignment:
        """Explicit order: ``ranked[0]`` is processed first."""
        return cls({e: i for i, e in enumerate(ranked)})


def draw_priorities(edges: Iterable[EdgeId], rng: np.random.Generator) -> PriorityAssignment:
    """Draw one uniform 64-bit priority per edge from ``rng``.

    Edges are sorted first so the assignment depends only on the edge set
    and the stream, not on iteration order.
    """
    ids = sorted(set(edges))
    if not ids:
        return PriorityAssignment()
    draws = rng.integers(0, np.iinfo(np.uint64).max, size=len(ids), dtype=np.uint64, endpoint=True)
    return PriorityAssignment(dict(zip(ids, draws.tolist())))


class BatchDict:
    """A dictionary updated and queried in batches.

    ``apply`` takes ``("insert", key, value)``, ``("delete", key)`` and
    ``("lookup", key)`` operations. A key may not be both inserted and
    deleted in one call; inserts and deletes therefore commute, and lookups
    observe the state after them. Inserting a present key or deleting an
    absent key leaves the dictionary unchanged and reports ``False``.
    Capacity management is delegated to the built-in dict, which resizes
    geometrically.
    """

    def __init__(self) -> None:
        self._data: dict[Hashable, Any] = {}

    def apply(self, ops: Sequence[tuple]) -> list[Any]:
        ins = {op[1] for op in ops if op[0] == "insert"}
        dels = {op[1] for op in ops if op[0] == "delete"}
        clash = ins & dels
        if clash:
            raise ValueError(f"keys both inserted and deleted in one batch: {sorted(map(repr, clash))}")
        results: list[Any] = [None] * len(ops)
        for idx, op in enumerate(ops):
            kind = op[0]
            if kind == "insert":
                key = op[1]
                fresh = key not in self._data
                if fresh:
                    self._data[key] = op[2] if len(op) > 2 else True
                results[idx] = fresh
            elif kind == "delete":
                results[idx] = self._data.pop(op[1], _MISSING) is not _MISSING
            elif kind != "lookup":
                raise ValueError(f"unknown dictionary operation {kind!r}")
        for idx, op in enumerate(ops):
            if op[0] == "lookup":
                results[idx] = (op[1] in self._data, self._data.get(op[1]))
        return results

    def __contains__(self, key: Hashable) -> bool:
        return key in self._data

    def __len__(self) -> int:
        return len(self._data)

    def items(self):
        return self._data.items()


_MISSING = object()
