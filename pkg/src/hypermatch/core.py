"""Identifiers, hyperedges, update batches and graph statistics."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable, Union

VertexId = int
EdgeId = int

U64_MAX = (1 << 64) - 1


class HypermatchError(Exception):
    """Base class for errors raised by this package."""


class BatchError(HypermatchError):
    """A batch is inconsistent with itself or with the current structure."""

    def __init__(self, edge_id: EdgeId, message: str) -> None:
        super().__init__(f"{message}: edge {edge_id}")
        self.edge_id = edge_id


class DuplicateInBatch(BatchError):
    def __init__(self, edge_id: EdgeId) -> None:
        super().__init__(edge_id, "duplicate id in batch")


class AlreadyPresent(BatchError):
    def __init__(self, edge_id: EdgeId) -> None:
        super().__init__(edge_id, "already present")


class NotPresent(BatchError):
    def __init__(self, edge_id: EdgeId) -> None:
        super().__init__(edge_id, "not present")


class RankExceeded(BatchError):
    def __init__(self, edge_id: EdgeId, size: int, rank: int) -> None:
        super().__init__(edge_id, f"edge of size {size} exceeds rank bound {rank}")
        self.size = size
        self.rank = rank


def _check_u64(value: int, what: str) -> int:
    value = int(value)
    if value < 0 or value > U64_MAX:
        raise ValueError(f"{what} {value} is outside the unsigned 64-bit range")
    return value


@dataclass(frozen=True, slots=True)
class Hyperedge:
    """An edge over a sorted, duplicate-free tuple of vertices.

    ``Hyperedge.of(7, [3, 1, 3])`` gives ``Hyperedge(id=7, vertices=(1, 3))``.
    """

    id: EdgeId
    vertices: tuple[VertexId, ...]

    def __post_init__(self) -> None:
        _check_u64(self.id, "edge id")
        if not self.vertices:
            raise ValueError(f"edge {self.id} has no vertices")
        vs = self.vertices
        if any(vs[i] >= vs[i + 1] for i in range(len(vs) - 1)):
            raise ValueError(f"edge {self.id}: vertices must be sorted and distinct, got {vs}")

    @classmethod
    def of(cls, edge_id: EdgeId, vertices: Iterable[VertexId]) -> Hyperedge:
        vs = tuple(sorted({_check_u64(v, "vertex id") for v in vertices}))
        return cls(_check_u64(edge_id, "edge id"), vs)

    @property
    def rank(self) -> int:
        return len(self.vertices)

    def __len__(self) -> int:
        return len(self.vertices)


class BatchKind(enum.Enum):
    INSERT = "+"
    DELETE = "-"


@dataclass(frozen=True)
class UpdateBatch:
    """One homogeneous user operation.

    Insert batches carry :class:`Hyperedge` values, delete batches carry ids.
    """

    kind: BatchKind
    items: tuple[Union[Hyperedge, EdgeId], ...]

    @classmethod
    def insert(cls, edges: Iterable[Hyperedge]) -> UpdateBatch:
        return cls(BatchKind.INSERT, tuple(edges))

    @classmethod
    def delete(cls, ids: Iterable[EdgeId]) -> UpdateBatch:
        return cls(BatchKind.DELETE, tuple(int(i) for i in ids))

    @property
    def ids(self) -> list[EdgeId]:
        if self.kind is BatchKind.INSERT:
            return [e.id for e in self.items]  # type: ignore[union-attr]
        return list(self.items)  # type: ignore[arg-type]

    def __len__(self) -> int:
        return len(self.items)


def validate_batch(
    batch: UpdateBatch,
    contains: Callable[[EdgeId], bool],
    rank: int | None = None,
) -> None:
    """Raise a :class:`BatchError` if ``batch`` cannot be applied.

    ``contains`` answers membership against the current structure. Edges
    larger than ``rank`` are rejected when a bound is given.
    """
    seen: set[EdgeId] = set()
    for item in batch.items:
        if batch.kind is BatchKind.INSERT:
            eid = item.id  # type: ignore[union-attr]
        else:
            eid = item  # type: ignore[assignment]
        if eid in seen:
            raise DuplicateInBatch(eid)
        seen.add(eid)
        if batch.kind is BatchKind.INSERT:
            if contains(eid):
                raise AlreadyPresent(eid)
            if rank is not None and len(item) > rank:  # type: ignore[arg-type]
                raise RankExceeded(eid, len(item), rank)  # type: ignore[arg-type]
        elif not contains(eid):
            raise NotPresent(eid)


@dataclass
class GraphStats:
    """Running size statistics of the maintained hypergraph.

    ``n`` counts distinct vertices ever seen and is for reporting only.
    """

    rank: int
    n: int = 0
    m: int = 0
    m_max: int = 0
    m_prime: int = 0
    _seen: set[VertexId] = field(default_factory=set, repr=False)

    def on_insert(self, edge: Hyperedge) -> None:
        self.m += 1
        self.m_prime += len(edge)
        self.m_max = max(self.m_max, self.m)
        for v in edge.vertices:
            if v not in self._seen:
                self._seen.add(v)
                self.n += 1

    def on_delete(self, edge: Hyperedge) -> None:
        self.m -= 1
        self.m_prime -= len(edge)

    def as_dict(self) -> dict[str, int]:
        return {"n": self.n, "m": self.m, "m_max": self.m_max, "m_prime": self.m_prime, "r": self.rank}
