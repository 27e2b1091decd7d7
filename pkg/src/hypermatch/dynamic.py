"""Batch-dynamic maximal matching engine.

Insertions match the free new edges greedily and attach the rest as cross
edges. Deletions release the samples of deleted matches as cross edges,
rematch the owned edges of light matches directly, and resettle the owned
edges of heavy matches with random greedy matching in doubling rounds.
"""

from __future__ import annotations

import logging
from typing import Iterable

from .accounting import DeathCause, DeleteKind, Ledger, RoundStats
from .core import BatchKind, EdgeId, GraphStats, Hyperedge, UpdateBatch, VertexId, validate_batch
from .leveled import EdgeType, LeveledStructure, Violation
from .parprims import SeededRng, draw_priorities
from .static_mm import MatchResult, parallel_greedy_match

log = logging.getLogger(__name__)


class DynamicMatching:
    """Maintains a maximal matching of a rank-``rank`` hypergraph under batch updates.

    ``seed`` fixes every random choice; ``workers`` sets the thread count
    of the greedy matcher and does not change any result. With
    ``accounting=False`` only work counters are kept.
    """

    def __init__(self, rank: int, seed: int = 0, workers: int = 1, accounting: bool = True) -> None:
        self.rank = rank
        self.rng = SeededRng(seed)
        self.workers = workers
        self.ledger = Ledger(enabled=accounting)
        self.structure = LeveledStructure(rank, self.ledger)
        self.graph_stats = GraphStats(rank)
        self.batch_index = 0
        self.greedy_calls = 0
        self.greedy_rounds_total = 0
        self._call = 0
        self._bloated_size = 0
        self._originals: dict[EdgeId, Hyperedge] = {}

    # public API

    def apply(self, batch: UpdateBatch) -> None:
        if batch.kind is BatchKind.INSERT:
            self.insert_edges(batch.items)  # type: ignore[arg-type]
        else:
            self.delete_edges(batch.items)  # type: ignore[arg-type]

    def insert_edges(self, edges: Iterable[Hyperedge]) -> None:
        batch = UpdateBatch.insert(edges)
        validate_batch(batch, self.structure.__contains__, self.rank)
        self._begin(batch)
        s = self.structure
        for h in batch.items:
            s.add_record(h.id, h.vertices)
            self._originals[h.id] = h
            self.graph_stats.on_insert(h)
        self._insert([h.id for h in batch.items])
        self._end()

    def delete_edges(self, ids: Iterable[EdgeId]) -> None:
        batch = UpdateBatch.delete(ids)
        validate_batch(batch, self.structure.__contains__)
        self._begin(batch)
        s = self.structure
        ledger = self.ledger
        edges = s.edges
        deleted = list(batch.items)
        matched = [e for e in deleted if edges[e].type is EdgeType.MATCHED]
        for e in deleted:
            rec = edges[e]
            if rec.type is EdgeType.CROSS:
                ledger.record_user_delete(e, DeleteKind.CROSS)
                s.remove_cross_edge(e)
            elif rec.type is EdgeType.SAMPLED:
                ledger.record_user_delete(e, DeleteKind.SAMPLED, owner=rec.owner)
                s.release_sample(rec.owner, e)
        for m in matched:
            ledger.record_user_delete(m, DeleteKind.MATCHED, remaining=len(s.matches[m].sample))
            s.release_sample(m, m)
            ledger.close_epoch(m, DeathCause.NATURAL, len(s.matches[m].sample))
        self._bloated_size = 0
        pending = self._delete_matched(matched)
        for e in deleted:
            s.drop_record(e)
            self.graph_stats.on_delete(self._originals.pop(e))
        sampled_edges = 0
        settle_round = 0
        while 2 * len(pending) > sampled_edges:
            sampled_edges += len(pending)
            pending = self._random_settle(pending, settle_round)
            settle_round += 1
        self._insert(pending)
        self._end()

    def is_matched(self, v: VertexId) -> EdgeId | None:
        return self.structure.is_matched(v)

    def matched_edges(self) -> set[EdgeId]:
        return self.structure.matched_edges()

    def edge(self, e: EdgeId) -> Hyperedge:
        return self._originals[e]

    def edges(self) -> list[Hyperedge]:
        return [self._originals[e] for e in sorted(self._originals)]

    def stats(self) -> dict:
        out = self.graph_stats.as_dict()
        out.update(
            batches=self.batch_index,
            matched=len(self.structure.matches),
            greedy_calls=self.greedy_calls,
            greedy_rounds=self.greedy_rounds_total,
            work_total=self.ledger.work.total(),
        )
        return out

    def check_invariants(self) -> Violation | None:
        return self.structure.check_invariants()

    def snapshot(self) -> tuple:
        return self.structure.snapshot()

    # internals

    def _begin(self, batch: UpdateBatch) -> None:
        self._call = 0
        self.ledger.begin_batch(self.batch_index, batch.kind.value, len(batch))

    def _end(self) -> None:
        self.ledger.end_batch()
        self.batch_index += 1

    def _greedy(self, ids: list[EdgeId], tag: str) -> MatchResult:
        edges = self.structure.edges
        pri = draw_priorities(ids, self.rng.stream(self.batch_index, self._call, tag))
        self._call += 1
        result = parallel_greedy_match({e: edges[e].vertices for e in ids}, pri, self.workers)
        self.greedy_calls += 1
        self.greedy_rounds_total += result.rounds
        self.ledger.work.greedy_visits += result.work
        self.ledger.note_greedy_rounds(result.rounds)
        return result

    def _insert(self, ids: list[EdgeId]) -> None:
        """Settle unsettled edges: match the free ones, attach the rest as cross edges."""
        if not ids:
            return
        s = self.structure
        edges, vm = s.edges, s.vertex_match
        free = [e for e in ids if not any(v in vm for v in edges[e].vertices)]
        new = self._greedy(free, "insert").matched if free else set()
        for e in sorted(new):
            lvl = s.add_match(e, (e,))
            self.ledger.open_epoch(e, lvl, 1)
        for e in ids:
            if e not in new:
                s.add_cross_edge(e)

    def _delete_matched(self, ms: list[EdgeId]) -> list[EdgeId]:
        """Remove the matches ``ms``; rematch light ones, return heavy ones' owned edges."""
        if not ms:
            return []
        s = self.structure
        released = []
        for m in ms:
            sample = sorted(s.matches[m].sample)
            for e in sample:
                s.release_sample(m, e)
            released.extend(sample)
        for e in released:
            s.add_cross_edge(e)
        self.ledger.work.sample_conversions += len(released)
        heavy = [m for m in ms if s.is_heavy(m)]
        light = [m for m in ms if not s.is_heavy(m)]
        rematch = [e for m in light for e in s.remove_match(m)]
        self._insert(rematch)
        return [e for m in heavy for e in s.remove_match(m)]

    def _random_settle(self, pending: list[EdgeId], round_index: int) -> list[EdgeId]:
        if not pending:
            return []
        s = self.structure
        ledger = self.ledger
        result = self._greedy(pending, "settle")
        vm, edges = s.vertex_match, s.edges
        # stolen must be read before addMatch overwrites p(v)
        stolen = sorted({vm[v] for m in result.samples for v in edges[m].vertices if v in vm})
        s_d = self._bloated_size
        for m in stolen:
            s_d += s.matches[m].size
            ledger.close_epoch(m, DeathCause.STOLEN, len(s.matches[m].sample))
        new = sorted(result.samples)
        s_a = 0
        for m in new:
            sample = result.samples[m]
            lvl = s.add_match(m, sample)
            ledger.open_epoch(m, lvl, len(sample))
            s_a += len(sample)
        s.adjust_cross_edges(new)
        bloated = [m for m in new if s.is_heavy(m)]
        self._bloated_size = 0
        for m in bloated:
            self._bloated_size += s.matches[m].size
            ledger.close_epoch(m, DeathCause.BLOATED, len(s.matches[m].sample))
        ledger.record_round(
            RoundStats(self.batch_index, round_index, s_a, s_d, len(new), len(stolen), len(bloated))
        )
        if bloated or stolen:
            log.debug("batch %d round %d: %d new, %d stolen, %d bloated", self.batch_index, round_index, len(new), len(stolen), len(bloated))
        return self._delete_matched(sorted(set(bloated) | set(stolen)))
