"""The leveled matching structure.

Every stored edge is owned by an incident matched edge. A matched edge
owns itself and its *sample* (the edges absorbed when it was picked) and a
set of *cross* edges. A match created from a sample of size ``s`` sits on
level ``floor(lg s)`` for its whole lifetime, and a cross edge is always
owned by an incident match on the highest level among its incident
matches. Per vertex, cross edges are bucketed by their owner's level so
that all edges below a given level can be collected without scanning.

Between batches :meth:`LeveledStructure.check_invariants` verifies all of
the above plus the bucket contents, matching validity and maximality.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable

from .accounting import Ledger
from .core import EdgeId, HypermatchError, VertexId


class StructureError(HypermatchError):
    pass


class EmptySample(StructureError):
    pass


class SampleNotEmpty(StructureError):
    pass


class NoIncidentMatch(StructureError):
    pass


class NotCross(StructureError):
    pass


class EdgeType(enum.Enum):
    MATCHED = "matched"
    SAMPLED = "sampled"
    CROSS = "cross"
    UNSETTLED = "unsettled"


@dataclass(slots=True)
class EdgeRecord:
    vertices: tuple[VertexId, ...]
    type: EdgeType = EdgeType.UNSETTLED
    owner: EdgeId | None = None


@dataclass(slots=True)
class MatchRecord:
    level: int
    size: int
    sample: set[EdgeId] = field(default_factory=set)
    cross: set[EdgeId] = field(default_factory=set)


@dataclass(frozen=True)
class Violation:
    invariant: str
    evidence: str

    def __str__(self) -> str:
        return f"{self.invariant}: {self.evidence}"


class InvariantViolation(StructureError):
    def __init__(self, violation: Violation) -> None:
        super().__init__(str(violation))
        self.violation = violation


def level_of(sample_size: int) -> int:
    return sample_size.bit_length() - 1


class LeveledStructure:
    def __init__(self, rank: int, ledger: Ledger | None = None) -> None:
        if rank < 1:
            raise ValueError("rank bound must be at least 1")
        self.rank = rank
        self.ledger = ledger if ledger is not None else Ledger(enabled=False)
        self.edges: dict[EdgeId, EdgeRecord] = {}
        self.matches: dict[EdgeId, MatchRecord] = {}
        # p(v): the match covering v; absent means free
        self.vertex_match: dict[VertexId, EdgeId] = {}
        # (v, level) -> cross edges at v whose owner is on that level; keys are the initialized bags
        self.bags: dict[tuple[VertexId, int], set[EdgeId]] = {}

    # queries

    def __contains__(self, e: EdgeId) -> bool:
        return e in self.edges

    def __len__(self) -> int:
        return len(self.edges)

    def is_matched(self, v: VertexId) -> EdgeId | None:
        return self.vertex_match.get(v)

    def matched_edges(self) -> set[EdgeId]:
        return set(self.matches)

    def type_of(self, e: EdgeId) -> EdgeType:
        return self.edges[e].type

    def heavy_threshold(self, level: int) -> int:
        return 4 * self.rank * self.rank * (1 << level)

    def is_heavy(self, m: EdgeId) -> bool:
        rec = self.matches[m]
        return len(rec.cross) >= self.heavy_threshold(rec.level)

    # edge records

    def add_record(self, e: EdgeId, vertices: tuple[VertexId, ...]) -> None:
        if e in self.edges:
            raise StructureError(f"edge {e} already has a record")
        self.edges[e] = EdgeRecord(vertices)
        self.ledger.work.record_inserts += 1

    def drop_record(self, e: EdgeId) -> None:
        rec = self.edges[e]
        if rec.type is not EdgeType.UNSETTLED:
            raise StructureError(f"edge {e} is still {rec.type.value}")
        del self.edges[e]
        self.ledger.work.record_deletes += 1

    # matches

    def add_match(self, m: EdgeId, sample: Iterable[EdgeId]) -> int:
        """Make ``m`` a match owning ``sample``; returns its level."""
        sample = set(sample)
        if not sample:
            raise EmptySample(f"match {m} needs a non-empty sample")
        lvl = level_of(len(sample))
        self.matches[m] = MatchRecord(lvl, len(sample), sample)
        edges = self.edges
        for e in sample:
            rec = edges[e]
            rec.type = EdgeType.SAMPLED
            rec.owner = m
        edges[m].type = EdgeType.MATCHED
        for v in edges[m].vertices:
            self.vertex_match[v] = m
        self.ledger.work.record_inserts += len(sample) + 1
        return lvl

    def remove_match(self, m: EdgeId) -> list[EdgeId]:
        """Drop match ``m`` whose sample is already empty; returns its former cross edges.

        The returned edges are left unsettled. Vertices are freed only where
        ``m`` still covers them; during a settle round a new match may
        already have taken some of them.
        """
        rec = self.matches[m]
        if rec.sample:
            raise SampleNotEmpty(f"match {m} still owns {len(rec.sample)} sampled edges")
        owned = sorted(rec.cross)
        for e in owned:
            self.remove_cross_edge(e)
        del self.matches[m]
        for v in self.edges[m].vertices:
            if self.vertex_match.get(v) == m:
                del self.vertex_match[v]
        self.ledger.work.record_deletes += 1
        return owned

    def release_sample(self, m: EdgeId, e: EdgeId) -> None:
        """Take ``e`` out of ``S(m)`` and mark it unsettled."""
        self.matches[m].sample.discard(e)
        rec = self.edges[e]
        rec.type = EdgeType.UNSETTLED
        rec.owner = None

    # cross edges

    def add_cross_edge(self, e: EdgeId) -> EdgeId:
        """Attach ``e`` to the incident match on the highest level; returns the owner.

        Ties on level go to the smallest match id.
        """
        rec = self.edges[e]
        if rec.type is EdgeType.CROSS or rec.type is EdgeType.SAMPLED:
            raise StructureError(f"edge {e} is already {rec.type.value}")
        best = None
        best_level = -1
        vm = self.vertex_match
        matches = self.matches
        for v in rec.vertices:
            m = vm.get(v)
            if m is None:
                continue
            lvl = matches[m].level
            if lvl > best_level or (lvl == best_level and m < best):
                best, best_level = m, lvl
        if best is None:
            raise NoIncidentMatch(f"edge {e} has no matched vertex")
        rec.type = EdgeType.CROSS
        rec.owner = best
        matches[best].cross.add(e)
        bags = self.bags
        for v in rec.vertices:
            bag = bags.get((v, best_level))
            if bag is None:
                bags[(v, best_level)] = {e}
            else:
                bag.add(e)
        self.ledger.work.bag_touches += len(rec.vertices) + 1
        return best

    def remove_cross_edge(self, e: EdgeId) -> None:
        rec = self.edges[e]
        if rec.type is not EdgeType.CROSS:
            raise NotCross(f"edge {e} is {rec.type.value}, not cross")
        owner = self.matches[rec.owner]
        owner.cross.discard(e)
        lvl = owner.level
        bags = self.bags
        for v in rec.vertices:
            key = (v, lvl)
            bag = bags[key]
            bag.discard(e)
            if not bag:
                del bags[key]
        rec.type = EdgeType.UNSETTLED
        rec.owner = None
        self.ledger.work.bag_touches += len(rec.vertices) + 1

    def adjust_cross_edges(self, new_matches: Iterable[EdgeId]) -> list[EdgeId]:
        """Re-own cross edges at the vertices of ``new_matches`` that sit below the new level.

        Returns the edges that were moved.
        """
        vertices = {v for m in new_matches for v in self.edges[m].vertices}
        moved: set[EdgeId] = set()
        bags = self.bags
        probes = 0
        for v in sorted(vertices):
            lvl = self.matches[self.vertex_match[v]].level
            probes += lvl
            for i in range(lvl):
                bag = bags.get((v, i))
                if bag:
                    moved.update(bag)
        self.ledger.work.bag_touches += probes
        ordered = sorted(moved)
        for e in ordered:
            self.remove_cross_edge(e)
        for e in ordered:
            self.add_cross_edge(e)
        return ordered

    # verification

    def check_invariants(self) -> Violation | None:
        """First violated property found, or None if the structure is consistent."""
        edges, matches, vm, bags = self.edges, self.matches, self.vertex_match, self.bags
        for e, rec in edges.items():
            if rec.type is EdgeType.UNSETTLED:
                return Violation("I1 edge types", f"edge {e} is unsettled")
            if (rec.type is EdgeType.MATCHED) != (e in matches):
                return Violation("I1 edge types", f"edge {e} has type {rec.type.value} but match membership {e in matches}")
        for m, mrec in matches.items():
            if edges[m].owner != m:
                return Violation("I2 ownership", f"match {m} is owned by {edges[m].owner}, not itself")
            if m not in mrec.sample:
                return Violation("I1 edge types", f"match {m} is not in its own sample")
            if mrec.sample & mrec.cross:
                return Violation("sample/cross disjointness", f"match {m} has {sorted(mrec.sample & mrec.cross)} in both")
            if mrec.level != level_of(mrec.size) or len(mrec.sample) > mrec.size:
                return Violation("I3 levels", f"match {m}: level {mrec.level}, creation size {mrec.size}, sample now {len(mrec.sample)}")
            for v in edges[m].vertices:
                if vm.get(v) != m:
                    return Violation("matching validity", f"vertex {v} of match {m} points to {vm.get(v)}")
            for e in mrec.sample:
                if e not in edges or edges[e].owner != m or edges[e].type not in (EdgeType.SAMPLED, EdgeType.MATCHED):
                    return Violation("I2 ownership", f"S({m}) lists {e} which is not a sampled edge of {m}")
            for e in mrec.cross:
                if e not in edges or edges[e].owner != m or edges[e].type is not EdgeType.CROSS:
                    return Violation("I2 ownership", f"C({m}) lists {e} which is not a cross edge of {m}")
        for v, m in vm.items():
            if m not in matches or v not in edges[m].vertices:
                return Violation("matching validity", f"p({v}) = {m} which is not a match on {v}")
        for e, rec in edges.items():
            owner = rec.owner
            if owner not in matches:
                return Violation("I2 ownership", f"edge {e} is owned by {owner}, which is not matched")
            ovs = edges[owner].vertices
            if not any(v in ovs for v in rec.vertices):
                return Violation("I2 ownership", f"edge {e} is owned by non-incident match {owner}")
            if rec.type is EdgeType.SAMPLED and e not in matches[owner].sample:
                return Violation("I2 ownership", f"sampled edge {e} missing from S({owner})")
            if rec.type is EdgeType.CROSS:
                if e not in matches[owner].cross:
                    return Violation("I2 ownership", f"cross edge {e} missing from C({owner})")
                top = max(matches[vm[v]].level for v in rec.vertices if v in vm)
                lvl = matches[owner].level
                if lvl != top:
                    return Violation("I4 max level", f"cross edge {e} owned at level {lvl}, highest incident level is {top}")
                for v in rec.vertices:
                    if e not in bags.get((v, lvl), ()):
                        return Violation("bag exactness", f"cross edge {e} missing from P({v}, {lvl})")
        for (v, lvl), bag in bags.items():
            if not bag:
                return Violation("bag exactness", f"P({v}, {lvl}) is initialized but empty")
            for e in bag:
                rec = edges.get(e)
                if rec is None or rec.type is not EdgeType.CROSS or v not in rec.vertices or matches[rec.owner].level != lvl:
                    return Violation("bag exactness", f"P({v}, {lvl}) holds {e} which does not belong there")
        return None

    def assert_invariants(self) -> None:
        bad = self.check_invariants()
        if bad is not None:
            raise InvariantViolation(bad)

    def snapshot(self) -> tuple:
        """Canonical, comparable image of the whole structure."""
        return (
            tuple(sorted((e, r.vertices, r.type.value, r.owner) for e, r in self.edges.items())),
            tuple(sorted((m, r.level, r.size, tuple(sorted(r.sample)), tuple(sorted(r.cross))) for m, r in self.matches.items())),
            tuple(sorted(self.vertex_match.items())),
            tuple(sorted((k, tuple(sorted(b))) for k, b in self.bags.items())),
        )
