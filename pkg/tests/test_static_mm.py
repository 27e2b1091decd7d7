import random

import pytest

from hypermatch import parprims
from hypermatch.core import Hyperedge
from hypermatch.parprims import PriorityAssignment, SeededRng, draw_priorities
from hypermatch.static_mm import (
    GreedyWorkspace,
    parallel_greedy_match,
    round_bound,
    sequential_greedy_match,
    update_top,
)

from conftest import random_edges

A, B, C = 1, 2, 3


def check_partition(edges, result):
    owner = {}
    for m, sample in result.samples.items():
        assert m in sample
        for e in sample:
            assert e not in owner, f"edge {e} in two samples"
            owner[e] = m
    assert set(owner) == {h.id for h in edges}
    verts = {h.id: set(h.vertices) for h in edges}
    for m in result.samples:
        for e in result.samples[m]:
            assert verts[m] & verts[e], f"sample edge {e} not incident on {m}"
    ms = sorted(result.samples)
    for i, a in enumerate(ms):
        for b in ms[i + 1 :]:
            assert not verts[a] & verts[b]


@pytest.mark.parametrize("matcher", [sequential_greedy_match, parallel_greedy_match])
def test_empty(matcher):
    res = matcher([], PriorityAssignment())
    assert res.samples == {} and res.rounds == 0


@pytest.mark.parametrize("matcher", [sequential_greedy_match, parallel_greedy_match])
def test_pairwise_incident_triangle(matcher):
    edges = [Hyperedge.of(A, [1, 2]), Hyperedge.of(B, [2, 3]), Hyperedge.of(C, [1, 3])]
    res = matcher(edges, PriorityAssignment.from_ranks([A, B, C]))
    assert res.partition() == {A: frozenset({A, B, C})}


@pytest.mark.parametrize("matcher", [sequential_greedy_match, parallel_greedy_match])
def test_path_on_four_vertices(matcher):
    e12, e23, e34 = Hyperedge.of(12, [1, 2]), Hyperedge.of(23, [2, 3]), Hyperedge.of(34, [3, 4])
    res = matcher([e12, e23, e34], PriorityAssignment.from_ranks([23, 12, 34]))
    assert res.partition() == {23: frozenset({12, 23, 34})}


def test_single_edge_one_round():
    res = parallel_greedy_match([Hyperedge.of(5, [1, 2, 3])], PriorityAssignment.from_ranks([5]))
    assert res.partition() == {5: frozenset({5})}
    assert res.rounds == 1


def test_round_rule_differs_from_one_pass_on_p6():
    # path a-b-c-d-e-f; edge de is absorbed by cd in one pass but removed by root ef in round one
    ab, bc, cd, de, ef = (Hyperedge.of(i, [i, i + 1]) for i in range(1, 6))
    edges = [ab, bc, cd, de, ef]
    pri = PriorityAssignment.from_ranks([1, 2, 3, 5, 4])
    one_pass = sequential_greedy_match(edges, pri)
    by_round = parallel_greedy_match(edges, pri, sample_rule="round")
    assert one_pass.partition() == {1: {1, 2}, 3: {3, 4}, 5: {5}}
    assert by_round.partition() == {1: {1, 2}, 3: {3}, 5: {4, 5}}
    assert one_pass.matched == by_round.matched
    assert parallel_greedy_match(edges, pri).same_as(one_pass)


def _workspace(edges, order):
    verts = {h.id: h.vertices for h in edges}
    return GreedyWorkspace.build(verts, PriorityAssignment.from_ranks(order))


def test_update_top_guard_and_exhaustion():
    edges = [Hyperedge.of(1, [1, 2]), Hyperedge.of(2, [1, 3])]
    ws = _workspace(edges, [1, 2])
    assert update_top(1, ws) is None and ws.top[1] == 0
    ws.done.update({1, 2})
    assert update_top(2, ws) is None
    assert ws.top[2] == len(ws.edges_by_vertex[2])


def test_update_top_returns_new_root():
    edges = [Hyperedge.of(1, [1, 2]), Hyperedge.of(2, [1, 3])]
    ws = _workspace(edges, [1, 2])
    # edge 2 is on top at vertex 3 only; vertex 1 has edge 1 on top
    assert ws.counter[2] == len(ws.verts[2]) - 1
    ws.done.add(1)
    assert update_top(1, ws) == 2
    assert ws.counter[2] == 2


def test_update_top_partial_counter():
    edges = [Hyperedge.of(1, [1, 2]), Hyperedge.of(2, [1, 3]), Hyperedge.of(3, [3, 4])]
    ws = _workspace(edges, [1, 3, 2])
    ws.done.add(1)
    assert update_top(1, ws) is None
    assert ws.counter[2] == 1


def test_oracle_equivalence_rank3_200_edges():
    rnd = random.Random(11)
    edges = random_edges(rnd, 60, 200, 3)
    for seed in range(20):
        pri = draw_priorities((h.id for h in edges), SeededRng(seed).stream(0, 0, "t"))
        a, b = sequential_greedy_match(edges, pri), parallel_greedy_match(edges, pri)
        assert a.first_difference(b) is None
        check_partition(edges, b)


def test_roots_are_first_at_all_their_vertices():
    rnd = random.Random(4)
    edges = random_edges(rnd, 30, 120, 3)
    pri = draw_priorities((h.id for h in edges), SeededRng(1).stream(0, 0, "t"))
    ws = GreedyWorkspace.build({h.id: h.vertices for h in edges}, pri)
    roots = {e for e, c in ws.counter.items() if c == len(ws.verts[e])}
    brute = {
        h.id
        for h in edges
        if all(pri.key(h.id) <= pri.key(g.id) for g in edges if set(g.vertices) & set(h.vertices))
    }
    assert roots == brute


def test_workers_do_not_change_output(monkeypatch):
    monkeypatch.setattr(parprims, "PARALLEL_GRAIN", 8)
    rnd = random.Random(9)
    edges = random_edges(rnd, 300, 2000, 4)
    pri = draw_priorities((h.id for h in edges), SeededRng(0).stream(0, 0, "t"))
    a = parallel_greedy_match(edges, pri, workers=1)
    b = parallel_greedy_match(edges, pri, workers=4)
    assert a.same_as(b) and a.rounds == b.rounds


def test_round_bound():
    assert round_bound(1) == 10
    assert round_bound(1000) == 10 * (10 + 1)
    assert round_bound(1024) == 10 * (10 + 1)
    assert round_bound(1025) == 10 * (11 + 1)


def test_duplicate_ids_rejected():
    with pytest.raises(ValueError):
        sequential_greedy_match([Hyperedge.of(1, [1]), Hyperedge.of(1, [2])], PriorityAssignment.from_ranks([1]))
