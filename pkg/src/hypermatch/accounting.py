"""Runtime ledger for epochs, delete payments, settle rounds and work.

An *epoch* is the lifetime of one match. It ends naturally when the user
deletes the matched edge, or is induced when a settle round steals or
finds it bloated.

Payments follow a pricing scheme: each match is priced at its sample
size. A user delete of a sampled, unmatched edge pays 1 towards its
owner's price. A delete of a matched edge pays whatever price remains.
Deletes of cross edges pay nothing.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Sequence

from .core import EdgeId, HypermatchError
from .static_mm import MatchResult


class AccountingError(HypermatchError):
    pass


class DoubleClose(AccountingError):
    def __init__(self, m: EdgeId) -> None:
        super().__init__(f"epoch of match {m} is not open")
        self.match = m


class RoundInequalityViolation(AccountingError):
    def __init__(self, stats: RoundStats) -> None:
        super().__init__(
            f"settle round {stats.round_index} of batch {stats.batch}: "
            f"added sample {stats.s_a} < 2 x deleted sample {stats.s_d}"
        )
        self.stats = stats


class DeathCause(enum.Enum):
    ALIVE = "alive"
    NATURAL = "natural"
    STOLEN = "stolen"
    BLOATED = "bloated"


class DeleteKind(enum.Enum):
    SAMPLED = "sampled"
    MATCHED = "matched"
    CROSS = "cross"


@dataclass
class EpochRecord:
    match: EdgeId
    level: int
    sample_size: int
    remaining_sample: int
    created_batch: int
    cause: DeathCause = DeathCause.ALIVE
    died_batch: int | None = None


@dataclass(frozen=True)
class Payment:
    edge: EdgeId
    amount: int
    early: bool
    batch: int = -1


@dataclass(frozen=True)
class RoundStats:
    batch: int
    round_index: int
    s_a: int
    s_d: int
    matches_created: int
    stolen_count: int
    bloated_count: int


@dataclass
class WorkCounters:
    """Structure-operation tallies; the unit of the amortized-work checks."""

    record_inserts: int = 0
    record_deletes: int = 0
    bag_touches: int = 0
    sample_conversions: int = 0
    greedy_visits: int = 0

    def total(self) -> int:
        return (
            self.record_inserts
            + self.record_deletes
            + self.bag_touches
            + self.sample_conversions
            + self.greedy_visits
        )

    def copy(self) -> WorkCounters:
        return WorkCounters(**asdict(self))

    def __sub__(self, other: WorkCounters) -> WorkCounters:
        return WorkCounters(**{f.name: getattr(self, f.name) - getattr(other, f.name) for f in fields(self)})


CSV_COLUMNS = (
    "batch",
    "kind",
    "size",
    "phi_sum",
    "epochs_opened",
    "closed_natural",
    "closed_stolen",
    "closed_bloated",
    "settle_rounds",
    "s_a",
    "s_d",
    "greedy_rounds",
    "work",
)


@dataclass
class BatchRow:
    batch: int
    kind: str
    size: int
    phi_sum: int = 0
    epochs_opened: int = 0
    closed_natural: int = 0
    closed_stolen: int = 0
    closed_bloated: int = 0
    settle_rounds: int = 0
    s_a: int = 0
    s_d: int = 0
    greedy_rounds: int = 0
    work: int = 0

    def values(self) -> list:
        return [getattr(self, c) for c in CSV_COLUMNS]


class Ledger:
    """Collects epochs, payments, settle rounds and per-batch rows.

    With ``enabled=False`` nothing but the work counters is kept and the
    round inequality is not checked. Recording never feeds back into the
    algorithm.
    """

    def __init__(self, enabled: bool = True) -> None:
        self.enabled = enabled
        self.work = WorkCounters()
        self.open: dict[EdgeId, EpochRecord] = {}
        self.closed: list[EpochRecord] = []
        self.payments: list[Payment] = []
        self.rounds: list[RoundStats] = []
        self.rows: list[BatchRow] = []
        self._row: BatchRow | None = None
        self._work_mark = WorkCounters()
        self.batch = -1

    # batches

    def begin_batch(self, batch: int, kind: str, size: int) -> None:
        self.batch = batch
        self._work_mark = self.work.copy()
        if self.enabled:
            self._row = BatchRow(batch, kind, size)

    def end_batch(self) -> BatchRow | None:
        row = self._row
        if row is not None:
            row.work = (self.work - self._work_mark).total()
            self.rows.append(row)
        self._row = None
        return row

    def note_greedy_rounds(self, rounds: int) -> None:
        if self._row is not None:
            self._row.greedy_rounds += rounds

    # epochs

    def open_epoch(self, m: EdgeId, level: int, sample_size: int) -> None:
        if not self.enabled:
            return
        if m in self.open:
            raise AccountingError(f"epoch of match {m} opened twice")
        self.open[m] = EpochRecord(m, level, sample_size, sample_size, self.batch)
        if self._row is not None:
            self._row.epochs_opened += 1

    def close_epoch(self, m: EdgeId, cause: DeathCause, remaining: int | None = None) -> EpochRecord | None:
        if not self.enabled:
            return None
        rec = self.open.pop(m, None)
        if rec is None:
            raise DoubleClose(m)
        if cause is DeathCause.ALIVE:
            raise ValueError("an epoch cannot close as alive")
        if remaining is not None:
            rec.remaining_sample = remaining
        rec.cause = cause
        rec.died_batch = self.batch
        self.closed.append(rec)
        if self._row is not None:
            attr = {DeathCause.NATURAL: "closed_natural", DeathCause.STOLEN: "closed_stolen", DeathCause.BLOATED: "closed_bloated"}[cause]
            setattr(self._row, attr, getattr(self._row, attr) + 1)
        return rec

    def sample_size(self, m: EdgeId) -> int:
        return self.open[m].sample_size

    # payments

    def record_user_delete(self, e: EdgeId, kind: DeleteKind, owner: EdgeId | None = None, remaining: int = 0) -> int:
        """Charge one user delete and return its payment.

        ``owner`` is the match whose sample holds ``e`` (for sampled
        deletes) and ``remaining`` the match's current sample size,
        including itself (for matched deletes). Call before the structure
        is modified; sampled deletes of a batch must be recorded before the
        matched ones so that they reduce the matched edges' remaining price.
        """
        if kind is DeleteKind.SAMPLED:
            amount = 1
        elif kind is DeleteKind.MATCHED:
            amount = remaining
        else:
            amount = 0
        if not self.enabled:
            return amount
        if kind is DeleteKind.SAMPLED and owner is not None and owner in self.open:
            self.open[owner].remaining_sample -= 1
        self.payments.append(Payment(e, amount, kind is not DeleteKind.CROSS, self.batch))
        if self._row is not None:
            self._row.phi_sum += amount
        return amount

    # settle rounds

    def record_round(self, stats: RoundStats) -> None:
        if not self.enabled:
            return
        self.rounds.append(stats)
        if self._row is not None:
            self._row.settle_rounds += 1
            self._row.s_a += stats.s_a
            self._row.s_d += stats.s_d
        if stats.s_a < 2 * stats.s_d:
            raise RoundInequalityViolation(stats)

    # summaries

    def natural_sample_total(self) -> int:
        return sum(r.sample_size for r in self.closed if r.cause is DeathCause.NATURAL)

    def payment_total(self) -> int:
        return sum(p.amount for p in self.payments)

    def report(self, updates: int | None = None) -> dict:
        """Cumulative summary of everything recorded so far."""
        n_del = len(self.payments)
        phi = self.payment_total()
        natural = self.natural_sample_total()
        by_cause = {c.value: 0 for c in DeathCause if c is not DeathCause.ALIVE}
        for r in self.closed:
            by_cause[r.cause.value] += 1
        if updates is None:
            updates = sum(row.size for row in self.rows)
        total_work = self.work.total()
        return {
            "user_deletes": n_del,
            "phi_total": phi,
            "phi_mean": phi / n_del if n_del else 0.0,
            "early_deletes": sum(1 for p in self.payments if p.early),
            "natural_sample_total": natural,
            "ledger_inequality_holds": natural <= phi,
            "epochs_open": len(self.open),
            "epochs_closed": by_cause,
            "settle_rounds": len(self.rounds),
            "round_violations": sum(1 for s in self.rounds if s.s_a < 2 * s.s_d),
            "updates": updates,
            "work": asdict(self.work),
            "work_total": total_work,
            "work_per_update": total_work / updates if updates else 0.0,
        }

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows:
            w.writerow(row.values())
        return buf.getvalue()


def static_payments(result: MatchResult, delete_order: Iterable[EdgeId]) -> list[Payment]:
    """Charge a full deletion sequence against a fixed static matching.

    Nothing is rematched: once a match is gone, later deletes of its
    sample are late and pay 0. Deleting every edge makes the early
    payments sum to the number of edges, and each match's early deletes
    sum to its sample size.
    """
    owner = result.owner_of()
    price = {m: len(s) for m, s in result.samples.items()}
    gone: set[EdgeId] = set()
    out: list[Payment] = []
    for t, d in enumerate(delete_order):
        m = owner[d]
        if m in gone:
            out.append(Payment(d, 0, False, t))
        elif d == m:
            out.append(Payment(d, price[m], True, t))
            gone.add(m)
        else:
            price[m] -= 1
            out.append(Payment(d, 1, True, t))
    return out


def mean_and_stderr(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    if n == 0:
        return 0.0, 0.0
    mu = sum(values) / n
    if n == 1:
        return mu, 0.0
    var = sum((x - mu) ** 2 for x in values) / (n - 1)
    return mu, math.sqrt(var / n)
