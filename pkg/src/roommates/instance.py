"""Preference structures for stable roommates instances.

Persons and ranks are 1-based everywhere a caller can see them. Every
person's list has length ``n`` and ends with the person itself (the
self-sentinel), so being "engaged to yourself" means running out of
partners.

Two oracles answer ``get_data(x, i)`` queries:

* :class:`EagerOracle` reads from fully generated tables.
* :class:`LazyPreferences` discloses list entries only when they are first
  requested, storing them in per-person dictionaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .rng import SplitMix64

PHASE_ONE = 1
PHASE_TWO = 2


class InstanceFormatError(ValueError):
    """Malformed instance text; ``line`` and ``column`` are 1-based."""

    def __init__(self, message: str, line: int, column: int = 1) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def check_size(n: int) -> int:
    if isinstance(n, bool) or int(n) != n:
        raise ValueError(f"n must be an integer, got {n!r}")
    n = int(n)
    if n < 2 or n % 2:
        raise ValueError(f"n must be even and >= 2, got {n}")
    return n


@dataclass
class Counters:
    """Instrumentation for one oracle.

    ``phase1_reads``/``phase2_reads`` count ``get_data`` calls attributed to
    the solver phase that issued them; each call reads two table elements.
    ``peak_map_entries`` is the number of disclosed list positions (keys of
    the rank->person maps, sentinels included). Entries are never removed,
    so the peak equals the current size. Every created entry discloses two
    table elements, so ``2 * entries_created`` is the number of distinct
    elements the solver has read (sentinels aside).
    """

    getdata_calls: int = 0
    entries_created: int = 0
    phase1_reads: int = 0
    phase2_reads: int = 0
    peak_map_entries: int = 0
    phase1_entries_created: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "getdata_calls": self.getdata_calls,
            "entries_created": self.entries_created,
            "phase1_reads": self.phase1_reads,
            "phase2_reads": self.phase2_reads,
            "peak_map_entries": self.peak_map_entries,
            "phase1_entries_created": self.phase1_entries_created,
        }


class ExplicitPreferences:
    """Full preference tables.

    ``person[x, i]`` is the person at rank ``i`` in ``x``'s list and
    ``rank[x, y]`` the rank of ``y`` in ``x``'s list. Both arrays have shape
    ``(n + 1, n + 1)``; row and column 0 are padding so indices match the
    1-based convention.
    """

    def __init__(self, person: np.ndarray, rank: np.ndarray | None = None) -> None:
        person = np.asarray(person, dtype=np.int64)
        n = person.shape[0] - 1
        check_size(n)
        if person.shape != (n + 1, n + 1):
            raise ValueError("person table must have shape (n + 1, n + 1)")
        if rank is None:
            rank = np.zeros_like(person)
            idx = np.arange(1, n + 1)
            for x in range(1, n + 1):
                rank[x, person[x, 1:]] = idx
        self.n = n
        self.person = person
        self.rank = np.asarray(rank, dtype=np.int64)
        self.validate()

    @classmethod
    def from_lists(cls, lists: Sequence[Sequence[int]]) -> "ExplicitPreferences":
        """Build from ``lists[x-1]`` = x's list without self, best first."""
        n = len(lists)
        check_size(n)
        person = np.zeros((n + 1, n + 1), dtype=np.int64)
        for x, row in enumerate(lists, start=1):
            if len(row) != n - 1:
                raise ValueError(f"person {x}: expected {n - 1} entries, got {len(row)}")
            person[x, 1:n] = row
            person[x, n] = x
        return cls(person)

    def validate(self) -> None:
        n = self.n
        full = np.arange(1, n + 1)
        for x in range(1, n + 1):
            row = self.person[x, 1:]
            if row[-1] != x:
                raise ValueError(f"person {x}: last entry must be self")
            if not np.array_equal(np.sort(row), full):
                raise ValueError(f"person {x}: list is not a permutation of 1..{n}")
            if not np.array_equal(self.rank[x, row], full):
                raise ValueError(f"person {x}: rank table is not the inverse of the person table")

    def lists(self) -> list[list[int]]:
        """Preference lists without the trailing self entry."""
        return [self.person[x, 1 : self.n].tolist() for x in range(1, self.n + 1)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExplicitPreferences):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.person, other.person)

    def __repr__(self) -> str:
        return f"ExplicitPreferences(n={self.n}, lists={self.lists()})"


def shuffled_lists(n: int, rng: SplitMix64) -> np.ndarray:
    """Person table whose rows are independent uniform shuffles plus self.

    Row ``x`` starts as the other persons in ascending order and is shuffled
    by Fisher-Yates (``j = below(k + 1)`` for ``k`` from the top down).
    """
    person = np.zeros((n + 1, n + 1), dtype=np.int64)
    for x in range(1, n + 1):
        row = [y for y in range(1, n + 1) if y != x]
        for k in range(n - 2, 0, -1):
            j = rng.below(k + 1)
            row[k], row[j] = row[j], row[k]
        person[x, 1:n] = row
        person[x, n] = x
    return person


def new_explicit_random(n: int, seed: int) -> ExplicitPreferences:
    n = check_size(n)
    return ExplicitPreferences(shuffled_lists(n, SplitMix64(seed)))


class EagerOracle:
    """``get_data`` over explicit tables, with call counters."""

    def __init__(self, prefs: ExplicitPreferences) -> None:
        self.prefs = prefs
        self.n = prefs.n
        self.counters = Counters(peak_map_entries=prefs.n * prefs.n)
        self.phase = PHASE_ONE

    def get_data(self, x: int, i: int) -> tuple[int, int]:
        n = self.n
        if not (1 <= x <= n and 1 <= i <= n):
            raise IndexError(f"get_data({x}, {i}) out of range for n={n}")
        c = self.counters
        c.getdata_calls += 1
        if self.phase == PHASE_ONE:
            c.phase1_reads += 1
        else:
            c.phase2_reads += 1
        y = int(self.prefs.person[x, i])
        return y, int(self.prefs.rank[y, x])


@dataclass
class LazyPreferences:
    """Random instance whose list entries are generated on first request.

    ``person_maps[x]`` maps rank -> person and ``rank_maps[x]`` maps
    person -> rank for the disclosed part of x's list (index 0 unused).
    A new entry for ``(x, i)`` draws ``y`` uniformly until it is absent
    from x's list, then draws ``r`` uniformly until rank ``r`` is free in
    y's list, and records the pair in both lists.
    """

    n: int
    seed: int
    person_maps: list[dict[int, int]] = field(init=False, repr=False)
    rank_maps: list[dict[int, int]] = field(init=False, repr=False)
    counters: Counters = field(init=False)
    phase: int = field(init=False, default=PHASE_ONE)

    def __post_init__(self) -> None:
        self.n = check_size(self.n)
        self.rng = SplitMix64(self.seed)
        n = self.n
        self.person_maps = [{}] + [{n: x} for x in range(1, n + 1)]
        self.rank_maps = [{}] + [{x: n} for x in range(1, n + 1)]
        self.counters = Counters(peak_map_entries=n)

    def get_data(self, x: int, i: int) -> tuple[int, int]:
        n = self.n
        if not (1 <= x <= n and 1 <= i <= n):
            raise IndexError(f"get_data({x}, {i}) out of range for n={n}")
        c = self.counters
        c.getdata_calls += 1
        if self.phase == PHASE_ONE:
            c.phase1_reads += 1
        else:
            c.phase2_reads += 1
        px = self.person_maps[x]
        y = px.get(i)
        if y is not None:
            return y, self.rank_maps[y][x]
        rx = self.rank_maps[x]
        rng = self.rng
        y = rng.below(n) + 1
        while y in rx:
            y = rng.below(n) + 1
        py = self.person_maps[y]
        r = rng.below(n) + 1
        while r in py:
            r = rng.below(n) + 1
        px[i] = y
        rx[y] = i
        py[r] = x
        self.rank_maps[y][x] = r
        c.entries_created += 1
        if self.phase == PHASE_ONE:
            c.phase1_entries_created += 1
        c.peak_map_entries += 2
        return y, r

    def disclosed(self) -> int:
        return sum(len(m) for m in self.person_maps)


def new_lazy(n: int, seed: int) -> LazyPreferences:
    return LazyPreferences(n, seed)


def get_data(oracle: EagerOracle | LazyPreferences, x: int, i: int) -> tuple[int, int]:
    return oracle.get_data(x, i)


def materialize(
    oracle: LazyPreferences, order: Iterable[tuple[int, int]] | None = None
) -> ExplicitPreferences:
    """Disclose every list position and return the implied full tables.

    ``order`` fixes the sequence of ``(x, i)`` queries issued first; any
    positions it leaves out are then filled row by row.
    """
    n = oracle.n
    if order is not None:
        for x, i in order:
            oracle.get_data(x, i)
    for x in range(1, n + 1):
        for i in range(1, n + 1):
            oracle.get_data(x, i)
    person = np.zeros((n + 1, n + 1), dtype=np.int64)
    for x in range(1, n + 1):
        for i, y in oracle.person_maps[x].items():
            person[x, i] = y
    return ExplicitPreferences(person)


def all_positions(n: int) -> Iterator[tuple[int, int]]:
    for x in range(1, n + 1):
        for i in range(1, n + 1):
            yield x, i


def parse_instance(text: str) -> ExplicitPreferences:
    """Parse the text format: ``n`` on line 1, then x's list on line x + 1."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise InstanceFormatError("empty input", 1)
    header = lines[0].split()
    if len(header) != 1:
        raise InstanceFormatError("header must be a single integer n", 1)
    try:
        n = int(header[0])
    except ValueError:
        raise InstanceFormatError(f"header {header[0]!r} is not an integer", 1) from None
    if n < 2 or n % 2:
        raise InstanceFormatError(f"n must be even and >= 2, got {n}", 1)
    if len(lines) != n + 1:
        raise InstanceFormatError(
            f"expected {n} preference lines, got {len(lines) - 1}", min(len(lines), n + 1) + 1
        )
    lists = []
    for x in range(1, n + 1):
        lineno = x + 1
        line = lines[x]
        seen: set[int] = set()
        row = []
        col = 0
        for tok in line.split():
            col = line.index(tok, col) + 1
            try:
                y = int(tok)
            except ValueError:
                raise InstanceFormatError(f"{tok!r} is not an integer", lineno, col) from None
            if not 1 <= y <= n or y == x:
                raise InstanceFormatError(f"person {x} cannot list {y}", lineno, col)
            if y in seen:
                raise InstanceFormatError(f"duplicate entry {y}", lineno, col)
            seen.add(y)
            row.append(y)
            col += len(tok) - 1
        if len(row) != n - 1:
            raise InstanceFormatError(
                f"person {x} lists {len(row)} persons, expected {n - 1}", lineno, max(col, 1)
            )
        lists.append(row)
    return ExplicitPreferences.from_lists(lists)


def serialize_instance(prefs: ExplicitPreferences) -> str:
    out = [str(prefs.n)]
    out.extend(" ".join(map(str, row)) for row in prefs.lists())
    return "\n".join(out) + "\n"
