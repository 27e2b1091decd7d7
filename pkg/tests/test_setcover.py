import random

import pytest

from hypermatch.core import AlreadyPresent, Hyperedge
from hypermatch.setcover import (
    DynamicSetCover,
    ElementInNoSet,
    SetCoverInstance,
    SetRegistry,
    is_cover,
    to_hypergraph,
)

from conftest import brute_force_cover


def test_to_hypergraph_example():
    inst = SetCoverInstance.of({1: {"a", "b"}, 2: {"b", "c"}, 3: {"c"}})
    reg = SetRegistry()
    edges = to_hypergraph(inst, reg)
    a, b, c = reg("a"), reg("b"), reg("c")
    assert edges == [Hyperedge.of(1, [a, b]), Hyperedge.of(2, [b, c]), Hyperedge.of(3, [c])]
    assert inst.frequency == 2 and inst.sets == {"a", "b", "c"}


def test_element_in_no_set():
    with pytest.raises(ElementInNoSet):
        to_hypergraph(SetCoverInstance.of({4: []}))
    sc = DynamicSetCover(2)
    with pytest.raises(ElementInNoSet):
        sc.insert_elements({4: []})
    assert sc.membership == {}


def test_registry_is_stable():
    reg = SetRegistry()
    assert reg("x") == 0 and reg("y") == 1 and reg("x") == 0
    assert reg.name == ["x", "y"]


def test_example_cover():
    sc = DynamicSetCover(2)
    sc.insert_elements({1: {"a", "b"}, 2: {"b", "c"}, 3: {"c"}})
    cover = sc.cover()
    assert is_cover(cover, sc.membership)
    assert len(cover) <= 2 * brute_force_cover(sc.membership)
    sc.delete_elements([3])
    assert is_cover(sc.cover(), sc.membership)


def test_duplicate_element_rejected():
    sc = DynamicSetCover(2)
    sc.insert_elements({1: {"a"}})
    with pytest.raises(AlreadyPresent):
        sc.insert_elements({1: {"b"}})
    assert sc.membership == {1: frozenset({"a"})}


def test_random_dynamic_cover_is_valid_and_bounded():
    rnd = random.Random(1)
    for trial in range(40):
        r = rnd.randint(1, 3)
        sets = list(range(rnd.randint(r, 8)))
        sc = DynamicSetCover(r, seed=trial)
        live, nid = [], 0
        for _ in range(15):
            if not live or rnd.random() < 0.6:
                batch = {}
                for _ in range(rnd.randint(1, 4)):
                    batch[nid] = rnd.sample(sets, rnd.randint(1, r))
                    live.append(nid)
                    nid += 1
                sc.insert_elements(batch)
            else:
                dead = rnd.sample(live, rnd.randint(1, len(live)))
                live = [e for e in live if e not in dead]
                sc.delete_elements(dead)
            cover = sc.cover()
            assert is_cover(cover, sc.membership)
            assert len(cover) <= r * brute_force_cover(sc.membership)


def test_brute_force_cover():
    assert brute_force_cover({}) == 0
    assert brute_force_cover({1: frozenset("ab"), 2: frozenset("b"), 3: frozenset("c")}) == 2
