"""Boolean transaction databases: parsing, padding, partitioning, and exact
support / confidence statistics.

A transaction is a k-character '0'/'1' string, leftmost character = item 1.
All statistics in this module are exact rationals counted over the unpadded
rows; they are the ground truth every estimated quantity is judged against.
Padding rows (appended to reach a power-of-two row count) are all-zero, so
they can never contain a non-empty itemset and never touch a numerator; the
denominator is always the original row count.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

ItemSet = frozenset
"""An itemset is a frozenset of 1-based item indices."""


class ParseError(ValueError):
    """Malformed database text; ``line`` is the offending 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def itemset(items: Iterable[int]) -> ItemSet:
    """Build an itemset from any iterable of 1-based item indices."""
    z = frozenset(int(i) for i in items)
    if any(i < 1 for i in z):
        raise ValueError("item indices are 1-based")
    return z


def _check_row(row: str, k: int) -> None:
    if len(row) != k:
        raise ValueError(f"row {row!r} has {len(row)} bits, expected {k}")
    if set(row) - {"0", "1"}:
        raise ValueError(f"row {row!r} contains non-binary characters")


@dataclass(frozen=True)
class TransactionDatabase:
    """N transactions over k items, possibly padded with all-zero rows.

    ``original_count`` is the number of real (non-padding) rows; it is the
    denominator of every support value.
    """

    n_items: int
    rows: tuple[str, ...]
    original_count: int
    item_names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n_items < 1:
            raise ValueError("need at least one item")
        for row in self.rows:
            _check_row(row, self.n_items)
        if not 0 <= self.original_count <= len(self.rows):
            raise ValueError("original_count out of range")
        if not self.item_names:
            names = tuple(f"I{i}" for i in range(1, self.n_items + 1))
            object.__setattr__(self, "item_names", names)
        elif len(self.item_names) != self.n_items:
            raise ValueError("item_names length mismatch")

    @property
    def n_transactions(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class PartitionedView:
    """One party's half of a vertically partitioned database.

    Alice holds columns 1..l, Bob columns l+1..k. ``original_count`` rides
    along so estimates over the padded space can be rescaled back.
    """

    role: str
    split_point: int
    rows: tuple[str, ...]
    original_count: int

    def __post_init__(self):
        if self.role not in ("alice", "bob"):
            raise ValueError(f"unknown role {self.role!r}")
        if not self.rows:
            raise ValueError("view has no rows")
        width = len(self.rows[0])
        if width < 1:
            raise ValueError("view rows are empty")
        if any(len(r) != width or set(r) - {"0", "1"} for r in self.rows):
            raise ValueError("view rows malformed")
        if self.role == "alice" and width != self.split_point:
            raise ValueError("alice view width must equal the split point")

    @property
    def width(self) -> int:
        return len(self.rows[0])

    def item_part(self, z: ItemSet) -> tuple[ItemSet, int]:
        """Restrict an itemset to this party's columns.

        Returns (sub-itemset, offset); positions minus offset index this
        view's rows. The sub-itemset may be empty (vacuously satisfied).
        """
        l = self.split_point
        if self.role == "alice":
            return frozenset(i for i in z if i <= l), 0
        return frozenset(i for i in z if i > l), l


def parse_database(text: str) -> TransactionDatabase:
    """Parse CSV (header of item names, then 0/1 cells) or one bitstring per line.

    Raises ParseError naming the offending line for malformed rows,
    non-binary cells, or empty input.
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines or not any(line.strip() for line in lines):
        raise ParseError(1, "empty input")
    if "," in lines[0]:
        return _parse_csv(lines)
    return _parse_bitstrings(lines)


def _parse_csv(lines: list[str]) -> TransactionDatabase:
    names = tuple(cell.strip() for cell in lines[0].split(","))
    if any(not name for name in names):
        raise ParseError(1, "empty item name in header")
    k = len(names)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = [cell.strip() for cell in line.split(",")]
        if len(cells) != k:
            raise ParseError(lineno, f"expected {k} cells, got {len(cells)}")
        for cell in cells:
            if cell not in ("0", "1"):
                raise ParseError(lineno, f"non-binary cell {cell!r}")
        rows.append("".join(cells))
    if not rows:
        raise ParseError(2, "no data rows")
    return TransactionDatabase(k, tuple(rows), len(rows), names)


def _parse_bitstrings(lines: list[str]) -> TransactionDatabase:
    stripped = [line.strip() for line in lines]
    k = len(stripped[0])
    rows = []
    for lineno, row in enumerate(stripped, start=1):
        if len(row) != k:
            raise ParseError(lineno, f"expected {k} bits, got {len(row)}")
        if set(row) - {"0", "1"}:
            raise ParseError(lineno, "non-binary character")
        rows.append(row)
    return TransactionDatabase(k, tuple(rows), len(rows))


def pad_to_power_of_two(db: TransactionDatabase) -> TransactionDatabase:
    """Append all-zero rows until the row count is the next power of two."""
    n = db.n_transactions
    target = 1 << max(0, (n - 1).bit_length())
    if target == n:
        return db
    blank = "0" * db.n_items
    return dataclasses.replace(db, rows=db.rows + (blank,) * (target - n))


def vertical_partition(db: TransactionDatabase, l: int) -> tuple[PartitionedView, PartitionedView]:
    """Split columns 1..l to Alice and l+1..k to Bob, preserving row order."""
    if not 1 <= l < db.n_items:
        raise ValueError(f"split point {l} must satisfy 1 <= l < {db.n_items}")
    alice = PartitionedView("alice", l, tuple(r[:l] for r in db.rows), db.original_count)
    bob = PartitionedView("bob", l, tuple(r[l:] for r in db.rows), db.original_count)
    return alice, bob


def _check_items(db: TransactionDatabase, z: ItemSet, label: str = "Z") -> None:
    if not z:
        raise ValueError(f"{label} must be non-empty")
    if any(not 1 <= i <= db.n_items for i in z):
        raise ValueError(f"{label} contains indices outside 1..{db.n_items}")


def exact_support(db: TransactionDatabase, z: ItemSet) -> Fraction:
    """Exact fraction of (non-padding) transactions containing every item of z.

    Padding rows are all-zero and cannot contain a non-empty z, so counting
    over all rows is safe; the denominator is the original row count.
    """
    _check_items(db, z)
    if db.original_count < 1:
        raise ValueError("database has no real rows")
    hits = sum(1 for row in db.rows if all(row[i - 1] == "1" for i in z))
    return Fraction(hits, db.original_count)


def exact_confidence(db: TransactionDatabase, x: ItemSet, y: ItemSet) -> Fraction:
    """Exact conditional frequency of y given x: supp(x | y together) / supp(x)."""
    _check_items(db, x, "X")
    _check_items(db, y, "Y")
    if frozenset(x) & frozenset(y):
        raise ValueError("X and Y must be disjoint")
    supp_x = exact_support(db, x)
    if supp_x == 0:
        raise ValueError("antecedent has zero support")
    return exact_support(db, frozenset(x) | frozenset(y)) / supp_x


def membership_flag(x: str, zpart: ItemSet, offset: int = 0) -> int:
    """1 iff the bitstring x has a 1 at every position of zpart (shifted by offset).

    An empty zpart is vacuously contained, so the flag is 1 for any x.
    """
    for pos in zpart:
        q = pos - offset
        if not 1 <= q <= len(x):
            raise ValueError(f"position {pos} (offset {offset}) outside bitstring of length {len(x)}")
        if x[q - 1] != "1":
            return 0
    return 1
