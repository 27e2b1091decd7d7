"""Text formats for update streams, set-cover instances and priority files,
plus the oblivious workload generator.

Update stream::

    # comment
    + 7 1 4 9      insert edge 7 on vertices 1, 4, 9
    - 3            delete edge 3
    ;              end of batch

A batch must be all inserts or all deletes. A trailing batch without a
closing ``;`` is accepted.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import BatchKind, EdgeId, HypermatchError, Hyperedge, UpdateBatch

PATTERNS = ("insert-all-delete-all", "interleaved", "churn")


class ParseError(HypermatchError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


def _ints(tokens: Sequence[str], lineno: int) -> list[int]:
    try:
        out = [int(t) for t in tokens]
    except ValueError as exc:
        raise ParseError(lineno, f"expected integers, got {' '.join(tokens)!r}") from exc
    if any(x < 0 or x >= 1 << 64 for x in out):
        raise ParseError(lineno, "ids must be unsigned 64-bit integers")
    return out


def parse_stream(text: str) -> list[UpdateBatch]:
    batches: list[UpdateBatch] = []
    kind: BatchKind | None = None
    items: list = []

    def close() -> None:
        nonlocal kind, items
        if kind is not None:
            batches.append(UpdateBatch(kind, tuple(items)))
        kind, items = None, []

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == ";":
            close()
            continue
        tokens = line.split()
        op = tokens[0]
        if op == "+":
            if len(tokens) < 3:
                raise ParseError(lineno, "insert needs an edge id and at least one vertex")
            nums = _ints(tokens[1:], lineno)
            try:
                item = Hyperedge.of(nums[0], nums[1:])
            except ValueError as exc:
                raise ParseError(lineno, str(exc)) from exc
            this = BatchKind.INSERT
        elif op == "-":
            if len(tokens) != 2:
                raise ParseError(lineno, "delete takes exactly one edge id")
            item = _ints(tokens[1:], lineno)[0]
            this = BatchKind.DELETE
        else:
            raise ParseError(lineno, f"unknown operation {op!r}")
        if kind is None:
            kind = this
        elif kind is not this:
            raise ParseError(lineno, "batch mixes inserts and deletes")
        items.append(item)
    close()
    return batches


def format_stream(batches: Iterable[UpdateBatch]) -> str:
    lines = []
    for b in batches:
        if b.kind is BatchKind.INSERT:
            for h in b.items:
                lines.append("+ " + " ".join(map(str, (h.id, *h.vertices))))  # type: ignore[union-attr]
        else:
            for e in b.items:
                lines.append(f"- {e}")
        lines.append(";")
    return "".join(line + "\n" for line in lines)


def parse_priorities(text: str) -> list[EdgeId]:
    """Edge ids in processing order (first listed is taken first)."""
    out: list[EdgeId] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.extend(_ints(line.split(), lineno))
    if len(set(out)) != len(out):
        raise ParseError(0, "priority file lists an edge twice")
    return out


# set cover


@dataclass(frozen=True)
class SetCoverOp:
    kind: BatchKind
    elements: tuple  # (elem, sets) pairs for inserts, element ids for deletes


def parse_setcover(text: str) -> list[SetCoverOp]:
    """Batches of ``e <elem> <set> ...`` lines (inserts) or ``- <elem>`` lines (deletes)."""
    ops: list[SetCoverOp] = []
    kind: BatchKind | None = None
    items: list = []
    for lineno, raw in enumerate(text.splitlines() + [";"], 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == ";":
            if kind is not None:
                ops.append(SetCoverOp(kind, tuple(items)))
            kind, items = None, []
            continue
        tokens = line.split()
        if tokens[0] == "e":
            if len(tokens) < 3:
                raise ParseError(lineno, "element line needs an id and at least one set")
            nums = _ints(tokens[1:], lineno)
            this, item = BatchKind.INSERT, (nums[0], tuple(nums[1:]))
        elif tokens[0] == "-":
            if len(tokens) != 2:
                raise ParseError(lineno, "delete takes exactly one element id")
            this, item = BatchKind.DELETE, _ints(tokens[1:], lineno)[0]
        else:
            raise ParseError(lineno, f"unknown operation {tokens[0]!r}")
        if kind is None:
            kind = this
        elif kind is not this:
            raise ParseError(lineno, "batch mixes inserts and deletes")
        items.append(item)
    return ops


# generator


def _gen_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & ((1 << 64) - 1), zlib.crc32(b"workload")]))


class _Live:
    """Live edge ids with O(1) uniform removal."""

    def __init__(self) -> None:
        self.ids: list[int] = []

    def add(self, ids: Iterable[int]) -> None:
        self.ids.extend(ids)

    def take(self, k: int, rng: np.random.Generator) -> list[int]:
        out = []
        ids = self.ids
        for _ in range(min(k, len(ids))):
            i = int(rng.integers(len(ids)))
            ids[i], ids[-1] = ids[-1], ids[i]
            out.append(ids.pop())
        return out

    def __len__(self) -> int:
        return len(self.ids)


def _random_edges(rng: np.random.Generator, start: int, count: int, n: int, r: int) -> list[Hyperedge]:
    lo = min(2, r, n)
    hi = min(r, n)
    sizes = rng.integers(lo, hi + 1, size=count)
    draws = rng.integers(0, n, size=(count, hi))
    out = []
    for i in range(count):
        k = int(sizes[i])
        vs = set(draws[i, :k].tolist())
        while len(vs) < k:
            vs.add(int(rng.integers(n)))
        out.append(Hyperedge(start + i, tuple(sorted(vs))))
    return out


def generate(
    n: int,
    m: int,
    r: int,
    batch_size: int,
    pattern: str,
    seed: int = 0,
    ops: int | None = None,
) -> list[UpdateBatch]:
    """Deterministic update stream for ``(parameters, seed)``.

    ``insert-all-delete-all`` inserts ``m`` edges then deletes them all in
    random order. ``interleaved`` alternates inserting ``batch_size`` edges
    with deleting half as many until ``m`` were inserted, then empties the
    graph. ``churn`` grows to ``m`` edges, performs ``ops`` further updates
    (default ``m``) as alternating delete/insert batches, then empties the
    graph. The stream never depends on any engine's random choices.
    """
    if pattern not in PATTERNS:
        raise ValueError(f"unknown pattern {pattern!r}; expected one of {', '.join(PATTERNS)}")
    if m < 0 or (m > 0 and (n < 1 or r < 1 or batch_size < 1)):
        raise ValueError("n, r and batch size must be positive and m non-negative")
    if m == 0:
        return []
    rng = _gen_rng(seed)
    live = _Live()
    out: list[UpdateBatch] = []
    next_id = 0

    def insert(count: int) -> None:
        nonlocal next_id
        edges = _random_edges(rng, next_id, count, n, r)
        next_id += count
        live.add(e.id for e in edges)
        out.append(UpdateBatch.insert(edges))

    def delete(count: int) -> None:
        ids = live.take(count, rng)
        if ids:
            out.append(UpdateBatch.delete(ids))

    def grow_to(total: int) -> None:
        while next_id < total:
            insert(min(batch_size, total - next_id))

    def drain() -> None:
        while len(live):
            delete(batch_size)

    if pattern == "insert-all-delete-all":
        grow_to(m)
    elif pattern == "interleaved":
        while next_id < m:
            insert(min(batch_size, m - next_id))
            delete(max(1, batch_size // 2))
    else:
        grow_to(m)
        remaining = m if ops is None else ops
        while remaining > 0:
            k = min(batch_size, remaining)
            delete(k)
            remaining -= k
            if remaining <= 0:
                break
            k = min(batch_size, remaining)
            start = next_id
            insert(k)
            remaining -= next_id - start
    drain()
    return out
