"""Command-line driver.

Exit codes: 0 success, 1 usage error, 2 unreadable or invalid input,
3 invariant or oracle violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .core import BatchError, BatchKind, UpdateBatch
from .dynamic import DynamicMatching
from .leveled import Violation
from .parprims import PriorityAssignment, SeededRng, draw_priorities
from .setcover import DynamicSetCover, is_cover
from .static_mm import parallel_greedy_match, round_bound, sequential_greedy_match
from .streams import PATTERNS, ParseError, format_stream, generate, parse_priorities, parse_setcover, parse_stream

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_VIOLATION = 0, 1, 2, 3

# Oracle comparison of the static matchers in verify mode runs on every k-th batch.
SPOT_CHECK_EVERY = 16


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2, which is reserved for input errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def maximality_violation(engine: DynamicMatching) -> Violation | None:
    """Recheck the matching from the raw edge list, ignoring structure internals."""
    matched = engine.matched_edges()
    covered: dict[int, int] = {}
    for m in sorted(matched):
        for v in engine.edge(m).vertices:
            if v in covered:
                return Violation("matching validity", f"matches {covered[v]} and {m} share vertex {v}")
            covered[v] = m
    for h in engine.edges():
        if not any(v in covered for v in h.vertices):
            return Violation("maximality", f"edge {h.id} touches no matched edge")
    return None


def _spot_check(engine: DynamicMatching, batch: int, seed: int) -> str | None:
    edges = engine.edges()
    pri = draw_priorities((h.id for h in edges), SeededRng(seed).stream(batch, 0, "spot-check"))
    a = sequential_greedy_match(edges, pri)
    b = parallel_greedy_match(edges, pri, engine.workers)
    return a.first_difference(b)


def cmd_gen(args: argparse.Namespace) -> int:
    try:
        batches = generate(args.n, args.m, args.rank, args.batch_size, args.pattern, args.seed, args.ops)
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))
    _write(args.output, format_stream(batches))
    return EXIT_OK


def _stream_rank(batches: Sequence[UpdateBatch]) -> int:
    return max((len(h) for b in batches if b.kind is BatchKind.INSERT for h in b.items), default=1)  # type: ignore[arg-type]


def cmd_run(args: argparse.Namespace) -> int:
    try:
        batches = parse_stream(_read(args.stream))
    except (OSError, ParseError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    rank = args.rank or _stream_rank(batches)
    engine = DynamicMatching(rank, seed=args.seed, workers=args.workers, accounting=not args.no_accounting or args.mode == "bench")
    for i, batch in enumerate(batches):
        try:
            engine.apply(batch)
        except BatchError as exc:
            return _fail(EXIT_INPUT, f"batch {i}: {exc}")
        if args.mode == "verify":
            bad = engine.check_invariants() or maximality_violation(engine)
            if bad is not None:
                return _fail(EXIT_VIOLATION, f"after batch {i}: {bad}")
            if i % SPOT_CHECK_EVERY == 0:
                diff = _spot_check(engine, i, args.seed)
                if diff is not None:
                    return _fail(EXIT_VIOLATION, f"after batch {i}: static matchers disagree at {diff}")
    if args.mode == "bench":
        _write(args.csv, engine.ledger.csv_text())
        return EXIT_OK
    summary = {"stats": engine.stats(), "accounting": engine.ledger.report() if engine.ledger.enabled else None}
    if args.csv:
        _write(args.csv, engine.ledger.csv_text())
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_staticmatch(args: argparse.Namespace) -> int:
    try:
        batches = parse_stream(_read(args.stream))
        prefix = []
        for b in batches:
            if b.kind is not BatchKind.INSERT:
                break
            prefix.extend(b.items)
        if args.priorities:
            order = parse_priorities(_read(args.priorities))
            pri = PriorityAssignment.from_ranks(order)
            missing = [h.id for h in prefix if h.id not in pri]
            if missing:
                return _fail(EXIT_INPUT, f"priority file does not rank edge {missing[0]}")
        else:
            pri = draw_priorities((h.id for h in prefix), SeededRng(args.seed).stream(0, 0, "static"))
    except (OSError, ParseError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    ids = [h.id for h in prefix]
    if len(set(ids)) != len(ids):
        return _fail(EXIT_INPUT, "duplicate edge id in input")
    result = parallel_greedy_match(prefix, pri, args.workers)
    for m in pri.order(result.samples):
        print(f"{m} {len(result.samples[m])}")
    print(f"# matched {len(result.samples)} edges {len(prefix)} rounds {result.rounds} bound {round_bound(len(prefix))}")
    if args.oracle:
        diff = sequential_greedy_match(prefix, pri).first_difference(result)
        if diff is not None:
            return _fail(EXIT_VIOLATION, f"parallel and sequential matchers differ at {diff}")
        print("# oracle ok")
    return EXIT_OK


def cmd_setcover(args: argparse.Namespace) -> int:
    try:
        ops = parse_setcover(_read(args.instance))
    except (OSError, ParseError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    rank = args.rank or max((len(sets) for op in ops if op.kind is BatchKind.INSERT for _, sets in op.elements), default=1)
    sc = DynamicSetCover(rank, seed=args.seed, workers=args.workers)
    for i, op in enumerate(ops):
        try:
            if op.kind is BatchKind.INSERT:
                sc.insert_elements(op.elements)
            else:
                sc.delete_elements(op.elements)
        except BatchError as exc:
            return _fail(EXIT_INPUT, f"batch {i}: {exc}")
        if args.verify and not is_cover(sc.cover(), sc.membership):
            return _fail(EXIT_VIOLATION, f"after batch {i}: cover misses an element")
    cover = sorted(sc.cover(), key=repr)
    print(" ".join(map(str, cover)))
    print(f"# sets {len(cover)} elements {len(sc.membership)} rank {rank}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hypermatch", description="Batch-dynamic maximal hypergraph matching.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate an oblivious update stream")
    g.add_argument("--n", type=int, required=True, help="number of vertices")
    g.add_argument("--m", type=int, required=True, help="number of edges")
    g.add_argument("--rank", type=int, default=2)
    g.add_argument("--batch-size", type=int, default=100)
    g.add_argument("--pattern", choices=PATTERNS, default="insert-all-delete-all")
    g.add_argument("--ops", type=int, default=None, help="churn updates after growth (default m)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", default=None)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="apply an update stream")
    r.add_argument("stream")
    r.add_argument("--mode", choices=("fast", "verify", "bench"), default="fast")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--rank", type=int, default=None, help="rank bound (default: largest edge in the stream)")
    r.add_argument("--csv", default=None, help="write per-batch CSV here (bench mode defaults to stdout)")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--no-accounting", action="store_true")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("staticmatch", help="greedy-match the insert prefix of a stream")
    s.add_argument("stream")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--priorities", default=None, help="file of edge ids in processing order")
    s.add_argument("--oracle", action="store_true", help="compare against the sequential matcher")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_staticmatch)

    c = sub.add_parser("setcover", help="maintain a set cover over element batches")
    c.add_argument("instance")
    c.add_argument("--rank", type=int, default=None)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--verify", action="store_true")
    c.add_argument("--workers", type=int, default=1)
    c.set_defaults(func=cmd_setcover)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", 0) < 0 or getattr(args, "seed", 0) >= 1 << 64:
        return _fail(EXIT_USAGE, "--seed must be an unsigned 64-bit integer")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
