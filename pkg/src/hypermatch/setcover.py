"""Dynamic r-approximate set cover through hypergraph matching.

Sets become vertices and each element becomes a hyperedge over the sets
containing it. Every element touches a matched edge, so the sets of all
matched edges cover everything. Any cover must pick a distinct set for each
matched element (they share no set), so the cover is at most ``r`` times
the optimum when every element lies in at most ``r`` sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping

from .core import EdgeId, HypermatchError, Hyperedge
from .dynamic import DynamicMatching


class ElementInNoSet(HypermatchError):
    def __init__(self, element: EdgeId) -> None:
        super().__init__(f"element {element} belongs to no set")
        self.element = element


@dataclass
class SetCoverInstance:
    membership: dict[EdgeId, frozenset[Hashable]] = field(default_factory=dict)

    @classmethod
    def of(cls, membership: Mapping[EdgeId, Iterable[Hashable]]) -> SetCoverInstance:
        return cls({e: frozenset(s) for e, s in membership.items()})

    @property
    def elements(self) -> set[EdgeId]:
        return set(self.membership)

    @property
    def sets(self) -> set[Hashable]:
        return {s for ss in self.membership.values() for s in ss}

    @property
    def frequency(self) -> int:
        return max((len(s) for s in self.membership.values()), default=0)


class SetRegistry:
    """Stable two-way map between set identifiers and vertex ids."""

    def __init__(self) -> None:
        self.vertex: dict[Hashable, int] = {}
        self.name: list[Hashable] = []

    def __call__(self, set_id: Hashable) -> int:
        v = self.vertex.get(set_id)
        if v is None:
            v = self.vertex[set_id] = len(self.name)
            self.name.append(set_id)
        return v


def to_hypergraph(inst: SetCoverInstance, registry: SetRegistry | None = None) -> list[Hyperedge]:
    """One hyperedge per element, with the element id as edge id."""
    reg = registry if registry is not None else SetRegistry()
    out = []
    for e in sorted(inst.membership):
        sets = inst.membership[e]
        if not sets:
            raise ElementInNoSet(e)
        out.append(Hyperedge.of(e, (reg(s) for s in sorted(sets, key=repr))))
    return out


def is_cover(cover: Iterable[Hashable], membership: Mapping[EdgeId, Iterable[Hashable]]) -> bool:
    chosen = set(cover)
    return all(any(s in chosen for s in sets) for sets in membership.values())


class DynamicSetCover:
    """Set cover maintained under batches of element insertions and deletions."""

    def __init__(self, rank: int, seed: int = 0, workers: int = 1, accounting: bool = True) -> None:
        self.engine = DynamicMatching(rank, seed=seed, workers=workers, accounting=accounting)
        self.registry = SetRegistry()
        self.membership: dict[EdgeId, frozenset[Hashable]] = {}

    @property
    def rank(self) -> int:
        return self.engine.rank

    def insert_elements(self, elements: Mapping[EdgeId, Iterable[Hashable]] | Iterable[tuple[EdgeId, Iterable[Hashable]]]) -> None:
        items = elements.items() if isinstance(elements, Mapping) else elements
        inst = SetCoverInstance.of(dict(items))
        edges = to_hypergraph(inst, self.registry)
        self.engine.insert_edges(edges)
        self.membership.update(inst.membership)

    def delete_elements(self, elements: Iterable[EdgeId]) -> None:
        ids = list(elements)
        self.engine.delete_edges(ids)
        for e in ids:
            del self.membership[e]

    def cover(self) -> set[Hashable]:
        s = self.engine.structure
        return {self.registry.name[v] for m in s.matches for v in s.edges[m].vertices}

    def matched_elements(self) -> set[EdgeId]:
        return self.engine.matched_edges()
