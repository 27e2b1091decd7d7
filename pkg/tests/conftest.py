from __future__ import annotations

import random

import numpy as np
import pytest

from hypermatch.core import BatchKind, Hyperedge

ACCEPTANCE: list[tuple[str, bool, str]] = []


def random_edges(rnd: random.Random, n: int, m: int, r: int, start: int = 0) -> list[Hyperedge]:
    out = []
    for i in range(m):
        k = rnd.randint(1, min(r, n))
        out.append(Hyperedge.of(start + i, rnd.sample(range(n), k)))
    return out


def brute_force_cover(membership: dict[int, frozenset]) -> int:
    """Minimum number of sets covering every element, by trying all subsets."""
    if not membership:
        return 0
    sets = sorted({s for ss in membership.values() for s in ss}, key=repr)
    bit = {s: 1 << i for i, s in enumerate(sets)}
    masks = np.array([sum(bit[s] for s in ss) for ss in membership.values()], dtype=np.int64)
    subsets = np.arange(1 << len(sets), dtype=np.int64)
    ok = np.all((subsets[:, None] & masks[None, :]) != 0, axis=1)
    sizes = np.array([bin(x).count("1") for x in range(1 << len(sets))])
    return int(sizes[ok].min())


def replay(engine, batches, each=None, one_per_delete=False):
    for i, b in enumerate(batches):
        if one_per_delete and b.kind is BatchKind.DELETE:
            for e in b.items:
                engine.delete_edges([e])
                if each:
                    each(i)
        else:
            engine.apply(b)
            if each:
                each(i)
    return engine


@pytest.fixture
def acceptance():
    def record(name: str, ok: bool, detail: str = "") -> bool:
        ACCEPTANCE.append((name, ok, detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
