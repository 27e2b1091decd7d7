"""Static random greedy maximal matching with sample spaces.

Both matchers process edges in :class:`PriorityAssignment` key order. When
an edge is taken it absorbs every still-free incident edge; the absorbed
edges (and the edge itself) form its sample space.

:func:`parallel_greedy_match` works in rounds. Each round matches the root
set (edges that come first at every one of their vertices), removes the
roots and their neighbours, and advances per-vertex pointers into
priority-sorted incidence lists to find the next roots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from .core import EdgeId, Hyperedge, VertexId
from .parprims import PriorityAssignment, find_next, group_by, parallel_map, remove_duplicates, sum_by

EdgeInput = Union[Iterable[Hyperedge], Mapping[EdgeId, Sequence[VertexId]]]


def _vertex_map(edges: EdgeInput) -> dict[EdgeId, tuple[VertexId, ...]]:
    if isinstance(edges, Mapping):
        return {e: tuple(vs) for e, vs in edges.items()}
    out: dict[EdgeId, tuple[VertexId, ...]] = {}
    for h in edges:
        if h.id in out:
            raise ValueError(f"duplicate edge id {h.id}")
        out[h.id] = h.vertices
    return out


@dataclass
class MatchResult:
    """Matched edges with their sample spaces.

    ``samples`` maps each matched edge to its sample space (sorted, and
    always containing the matched edge). ``rounds`` is 0 for the sequential
    matcher. ``work`` counts incidence-list entries touched.
    """

    samples: dict[EdgeId, list[EdgeId]] = field(default_factory=dict)
    rounds: int = 0
    work: int = 0

    @property
    def matched(self) -> set[EdgeId]:
        return set(self.samples)

    def partition(self) -> dict[EdgeId, frozenset[EdgeId]]:
        return {m: frozenset(s) for m, s in self.samples.items()}

    def same_as(self, other: MatchResult) -> bool:
        return self.partition() == other.partition()

    def first_difference(self, other: MatchResult) -> str | None:
        """Human-readable description of the first differing entry, if any."""
        mine, theirs = self.partition(), other.partition()
        for m in sorted(set(mine) | set(theirs)):
            a, b = mine.get(m), theirs.get(m)
            if a != b:
                fmt = lambda s: "unmatched" if s is None else sorted(s)  # noqa: E731
                return f"edge {m}: {fmt(a)} vs {fmt(b)}"
        return None

    def owner_of(self) -> dict[EdgeId, EdgeId]:
        return {e: m for m, s in self.samples.items() for e in s}


def sequential_greedy_match(edges: EdgeInput, pri: PriorityAssignment) -> MatchResult:
    """Reference greedy matcher: one pass over the edges in priority order."""
    verts = _vertex_map(edges)
    incident = group_by((v, e) for e, vs in verts.items() for v in vs)
    free = set(verts)
    result = MatchResult()
    work = 0
    for e in pri.order(verts):
        if e not in free:
            continue
        free.discard(e)
        sample = [e]
        for v in verts[e]:
            for f in incident[v]:
                work += 1
                if f in free:
                    free.discard(f)
                    sample.append(f)
        result.samples[e] = sorted(sample)
    result.work = work + sum(len(vs) for vs in verts.values())
    return result


@dataclass
class GreedyWorkspace:
    """Per-call scratch state of the parallel matcher.

    ``edges_by_vertex[v]`` is v's incident edges in priority order and
    ``top[v]`` indexes the first of them still remaining. ``counter[e]``
    counts the vertices where ``e`` is on top; ``e`` is a root exactly when
    that equals its rank. ``remaining[v]`` is the unordered set N(v).
    """

    verts: dict[EdgeId, tuple[VertexId, ...]]
    edges_by_vertex: dict[VertexId, list[EdgeId]]
    top: dict[VertexId, int]
    counter: dict[EdgeId, int]
    remaining: dict[VertexId, set[EdgeId]]
    done: set[EdgeId] = field(default_factory=set)
    slides: int = 0

    @classmethod
    def build(cls, verts: dict[EdgeId, tuple[VertexId, ...]], pri: PriorityAssignment, workers: int = 1) -> GreedyWorkspace:
        incident = group_by((v, e) for e, vs in verts.items() for v in vs)
        vertices = list(incident)
        key = pri.key
        ordered = parallel_map(lambda v: sorted(incident[v], key=key), vertices, workers)
        edges_by_vertex = dict(zip(vertices, ordered))
        counter = dict.fromkeys(verts, 0)
        counter.update(sum_by((lst[0], 1) for lst in ordered))
        return cls(
            verts=verts,
            edges_by_vertex=edges_by_vertex,
            top=dict.fromkeys(vertices, 0),
            counter=counter,
            remaining={v: set(es) for v, es in incident.items()},
        )

    def advance_top(self, v: VertexId) -> EdgeId | None:
        """Move ``top[v]`` past finished edges; return the new top edge if it moved.

        Writes only ``top[v]``, so calls for distinct vertices may run
        concurrently. The counter increment is left to the caller.
        """
        lst = self.edges_by_vertex[v]
        t = self.top[v]
        if t >= len(lst) or lst[t] not in self.done:
            return None
        done = self.done
        nt = find_next(t, lst, lambda e: e not in done)
        self.top[v] = nt
        self.slides += nt - t
        return lst[nt] if nt < len(lst) else None


def update_top(v: VertexId, ws: GreedyWorkspace) -> EdgeId | None:
    """Advance ``top[v]`` if its edge is done and count the new top edge.

    Returns the new top edge when it has become a root (on top at all of
    its vertices), otherwise None.
    """
    e = ws.advance_top(v)
    if e is None:
        return None
    ws.counter[e] += 1
    return e if ws.counter[e] == len(ws.verts[e]) else None


def parallel_greedy_match(
    edges: EdgeInput,
    pri: PriorityAssignment,
    workers: int = 1,
    sample_rule: str = "sequential",
) -> MatchResult:
    """Round-based greedy matcher; same output as :func:`sequential_greedy_match`.

    With ``sample_rule="sequential"`` (the default) each edge is placed in
    the sample of the first matched edge, in priority order, among those
    incident on it, which is exactly what the one-pass matcher does. With
    ``sample_rule="round"`` an edge removed in a round joins the first
    root of that round incident on it. The two rules select the same
    matched edges but can disagree on samples: on the path
    a-b, b-c, c-d, d-e, e-f taken in the order ab, bc, cd, ef, de, the
    edge de ends up with cd in one pass but is removed by ef in round one.
    """
    if sample_rule not in ("sequential", "round"):
        raise ValueError(f"unknown sample rule {sample_rule!r}")
    verts = _vertex_map(edges)
    if not verts:
        return MatchResult()
    key = pri.key
    ws = GreedyWorkspace.build(verts, pri, workers)
    roots = sorted((e for e, c in ws.counter.items() if c == len(verts[e])), key=key)
    result = MatchResult()
    touched = 0
    rounds = 0
    while roots:
        rounds += 1
        neighbours = [(e, w) for w in roots for v in verts[w] for e in ws.remaining[v]]
        touched += len(neighbours)
        if sample_rule == "round":
            contested = group_by(neighbours)
            for w, sample in group_by((min(ws_, key=key), e) for e, ws_ in contested.items()).items():
                result.samples[w] = sorted(sample)
        else:
            for w in roots:
                result.samples[w] = []
        finished = remove_duplicates(roots + [e for e, _ in neighbours])
        ws.done.update(finished)
        finished_vertices = remove_duplicates(v for e in finished for v in verts[e])
        tops = parallel_map(ws.advance_top, finished_vertices, workers)
        nxt = []
        for e, c in sum_by((e, 1) for e in tops if e is not None).items():
            ws.counter[e] += c
            if ws.counter[e] == len(verts[e]):
                nxt.append(e)
        for e in finished:
            for v in verts[e]:
                ws.remaining[v].discard(e)
                touched += 1
        roots = sorted(nxt, key=key)
    if sample_rule == "sequential":
        matched_at = {v: m for m in result.samples for v in verts[m]}
        owner_pairs = []
        for e, vs in verts.items():
            owners = [matched_at[v] for v in vs if v in matched_at]
            touched += len(vs)
            owner_pairs.append((min(owners, key=key), e))
        for m, sample in group_by(owner_pairs).items():
            result.samples[m] = sorted(sample)
    result.rounds = rounds
    result.work = touched + ws.slides + sum(len(vs) for vs in verts.values())
    return result


def round_bound(m: int) -> int:
    """Round budget ``10 * (ceil(lg m) + 1)`` for ``m`` edges."""
    return 10 * ((max(m, 1) - 1).bit_length() + 1)
