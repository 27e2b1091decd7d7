import random

import pytest

from hypermatch import parprims
from hypermatch.accounting import DeathCause
from hypermatch.core import Hyperedge, NotPresent, RankExceeded
from hypermatch.dynamic import DynamicMatching
from hypermatch.leveled import EdgeType
from hypermatch.streams import generate

from conftest import replay


def H(e, *vs):
    return Hyperedge.of(e, vs)


def maximal(eng):
    covered = {}
    for m in eng.matched_edges():
        for v in eng.edge(m).vertices:
            assert v not in covered
            covered[v] = m
    return all(any(v in covered for v in h.vertices) for h in eng.edges())


def test_single_edge_matched_at_level_zero():
    eng = DynamicMatching(2)
    eng.insert_edges([H(1, 1, 2)])
    assert eng.matched_edges() == {1}
    assert eng.structure.matches[1].level == 0
    assert eng.is_matched(1) == 1 and eng.is_matched(3) is None


def test_edge_on_matched_vertices_becomes_cross():
    eng = DynamicMatching(2)
    eng.insert_edges([H(1, 1, 2), H(2, 3, 4)])
    eng.insert_edges([H(3, 2, 3)])
    assert eng.structure.type_of(3) is EdgeType.CROSS


def test_pairwise_incident_free_edges():
    eng = DynamicMatching(3)
    eng.insert_edges([H(i, 0, i + 1) for i in range(7)])
    assert len(eng.matched_edges()) == 1
    assert sum(eng.structure.type_of(i) is EdgeType.CROSS for i in range(7)) == 6


def test_rejects_bad_batches():
    eng = DynamicMatching(2)
    eng.insert_edges([H(1, 1, 2)])
    snap = eng.snapshot()
    with pytest.raises(NotPresent):
        eng.delete_edges([9])
    with pytest.raises(RankExceeded):
        eng.insert_edges([H(5, 1, 2, 3)])
    assert eng.snapshot() == snap


def test_delete_cross_edge():
    eng = DynamicMatching(2)
    eng.insert_edges([H(1, 1, 2)])
    eng.insert_edges([H(2, 2, 3)])
    eng.delete_edges([2])
    assert eng.matched_edges() == {1} and 2 not in eng.structure
    assert eng.check_invariants() is None


def test_delete_lonely_match_frees_vertices():
    eng = DynamicMatching(2)
    eng.insert_edges([H(1, 1, 2)])
    eng.delete_edges([1])
    assert eng.is_matched(1) is None and eng.is_matched(2) is None
    assert len(eng.structure) == 0 and eng.check_invariants() is None


def test_delete_light_match_rematches_owned_edges():
    eng = DynamicMatching(2)
    eng.insert_edges([H(1, 1, 2)])
    eng.insert_edges([H(2, 2, 3), H(3, 1, 4), H(4, 2, 5)])
    assert eng.structure.matches[1].cross == {2, 3, 4}
    eng.delete_edges([1])
    assert eng.check_invariants() is None and maximal(eng)
    assert len(eng.matched_edges()) == 2


def _heavy_setup():
    eng = DynamicMatching(2)
    eng.insert_edges([H(0, 0, 1)])
    eng.insert_edges([H(10 + i, 1, 100 + i) for i in range(16)])
    return eng


def test_delete_matched_heavy_returns_owned_edges():
    eng = _heavy_setup()
    s = eng.structure
    assert s.is_heavy(0)
    s.release_sample(0, 0)
    out = eng._delete_matched([0])
    assert sorted(out) == list(range(10, 26))
    assert all(s.type_of(e) is EdgeType.UNSETTLED for e in out)
    assert s.matches == {}


def test_delete_matched_light_returns_nothing():
    eng = DynamicMatching(2)
    eng.insert_edges([H(0, 0, 1)])
    eng.insert_edges([H(10, 1, 5), H(11, 0, 6)])
    eng.structure.release_sample(0, 0)
    assert eng._delete_matched([0]) == []
    assert eng.structure.matched_edges() and all(eng.structure.type_of(e) is not EdgeType.UNSETTLED for e in (10, 11))


def test_delete_matched_mixed():
    eng = _heavy_setup()
    eng.insert_edges([H(1, 2, 3)])
    eng.insert_edges([H(200, 3, 300), H(201, 3, 301)])
    s = eng.structure
    heavy_owned = set(s.matches[0].cross)
    assert not s.is_heavy(1)
    s.release_sample(0, 0)
    s.release_sample(1, 1)
    out = eng._delete_matched([0, 1])
    assert set(out) == heavy_owned
    assert {s.type_of(200), s.type_of(201)} <= {EdgeType.MATCHED, EdgeType.CROSS}


def test_full_heavy_delete_resettles():
    eng = _heavy_setup()
    eng.delete_edges([0])
    assert eng.check_invariants() is None and maximal(eng)
    assert eng.matched_edges() <= set(range(10, 26)) and len(eng.matched_edges()) == 1
    (m,) = eng.matched_edges()
    assert eng.structure.matches[m].level == 4  # sample of all 16 edges
    assert len(eng.ledger.rounds) == 1


def test_random_settle_trivial_cases():
    eng = DynamicMatching(2)
    assert eng._random_settle([], 0) == []
    eng.structure.add_record(7, (1, 2))
    assert eng._random_settle([7], 0) == []
    assert eng.structure.matches[7].sample == {7}


class _Probe(DynamicMatching):
    """Records, per settle round, the pre-existing matches, the new matches and the stolen ones."""

    def __init__(self, *a, **k):
        super().__init__(*a, **k)
        self.observed = []
        self._last = None

    def _greedy(self, ids, tag):
        self._last = super()._greedy(ids, tag)
        return self._last

    def _random_settle(self, pending, round_index):
        s = self.structure
        before = {m: set(s.edges[m].vertices) for m in s.matches}
        n_closed = len(self.ledger.closed)
        out = super()._random_settle(pending, round_index)
        new = {m: set(s.edges[m].vertices) for m in self._last.samples} if pending else {}
        stolen = [r.match for r in self.ledger.closed[n_closed:] if r.cause is DeathCause.STOLEN]
        self.observed.append((before, new, stolen))
        return out


def test_stolen_matches_existed_and_touch_new_matches():
    seen = 0
    for seed in range(4):
        eng = _Probe(2, seed=seed)
        replay(eng, generate(10, 600, 2, 5, "churn", seed))
        for before, new, stolen in eng.observed:
            for m in stolen:
                seen += 1
                assert m in before and m not in new
                assert any(before[m] & vs for vs in new.values())
            ms = list(new.values())
            assert all(not (a & b) for i, a in enumerate(ms) for b in ms[i + 1 :])
    assert seen > 0


def test_settle_rounds_are_logarithmic():
    for seed in range(3):
        eng = DynamicMatching(2, seed=seed)
        replay(eng, generate(12, 800, 2, 1, "insert-all-delete-all", seed))
        for row in eng.ledger.rows:
            assert row.settle_rounds <= eng.graph_stats.m_max.bit_length() + 1


def test_bloated_path_is_exercised():
    causes = {c: 0 for c in DeathCause}
    for seed in range(5):
        eng = DynamicMatching(2, seed=seed)
        replay(eng, generate(10, 1000, 2, 5, "churn", seed))
        assert eng.check_invariants() is None and len(eng.structure) == 0
        for r in eng.ledger.closed:
            causes[r.cause] += 1
    assert causes[DeathCause.BLOATED] > 0 and causes[DeathCause.STOLEN] > 0


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_random_stress_with_invariants(r):
    for seed in range(15):
        rnd = random.Random(seed * 10 + r)
        n = rnd.choice([4, 8, 20])
        eng = DynamicMatching(r, seed=seed)
        live, nid = [], 0
        for _ in range(120):
            if not live or rnd.random() < 0.55:
                batch = []
                for _ in range(rnd.randint(1, 6)):
                    batch.append(Hyperedge.of(nid, rnd.sample(range(n), rnd.randint(1, min(r, n)))))
                    live.append(nid)
                    nid += 1
                eng.insert_edges(batch)
            else:
                dead = rnd.sample(live, rnd.randint(1, min(6, len(live))))
                live = [e for e in live if e not in dead]
                eng.delete_edges(dead)
            assert eng.check_invariants() is None
            assert maximal(eng)
            assert all(rec.type is not EdgeType.UNSETTLED for rec in eng.structure.edges.values())


def test_deterministic_per_seed():
    stream = generate(15, 400, 3, 7, "interleaved", 5)
    a = replay(DynamicMatching(3, seed=42), stream)
    b = replay(DynamicMatching(3, seed=42), stream)
    c = replay(DynamicMatching(3, seed=43), stream[: len(stream) // 2])
    d = replay(DynamicMatching(3, seed=42), stream[: len(stream) // 2])
    assert a.snapshot() == b.snapshot()
    assert a.ledger.csv_text() == b.ledger.csv_text()
    assert c.snapshot() != d.snapshot()


def test_accounting_does_not_change_behaviour():
    stream = generate(15, 400, 2, 3, "churn", 1)
    half = stream[: len(stream) // 2]
    on = replay(DynamicMatching(2, seed=3, accounting=True), half)
    off = replay(DynamicMatching(2, seed=3, accounting=False), half)
    assert on.snapshot() == off.snapshot()
    assert on.ledger.work == off.ledger.work
    assert off.ledger.rows == [] and off.ledger.payments == []


def test_workers_do_not_change_behaviour(monkeypatch):
    monkeypatch.setattr(parprims, "PARALLEL_GRAIN", 8)
    stream = generate(50, 1500, 3, 300, "churn", 2)
    half = stream[: len(stream) // 2]
    a = replay(DynamicMatching(3, seed=1, workers=1), half)
    b = replay(DynamicMatching(3, seed=1, workers=4), half)
    assert a.snapshot() == b.snapshot()


def test_stats():
    eng = DynamicMatching(2)
    eng.insert_edges([H(1, 1, 2), H(2, 2, 3)])
    eng.delete_edges([2])
    st = eng.stats()
    assert (st["n"], st["m"], st["m_max"], st["m_prime"], st["r"]) == (3, 1, 2, 2, 2)
    assert st["batches"] == 2 and st["matched"] == 1
