"""Irving's algorithm for the stable roommates problem.

Phase I sets up a semiengagement for everybody through proposals; phase II
eliminates all-or-nothing cycles until the semiengagements are symmetric
or somebody runs out of partners. Preferences are only touched through an
oracle's ``get_data(x, i)``, which returns the person ``y`` at rank ``i`` of
x's list together with x's rank in y's list.

The module also carries the stability checker and the brute-force
enumerator used as a correctness oracle for small ``n``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .instance import PHASE_ONE, PHASE_TWO, Counters, EagerOracle, ExplicitPreferences

TraceFn = Callable[..., None]


class Phase(enum.Enum):
    PHASE_I = "I"
    PHASE_II = "II"


@dataclass
class SolverState:
    """Proposal bookkeeping; arrays are indexed 1..n (slot 0 unused)."""

    n: int
    leftperson: list[int] = field(init=False)
    leftrank: list[int] = field(init=False)
    rightperson: list[int] = field(init=False)
    rightrank: list[int] = field(init=False)
    secondperson: list[int] = field(init=False)
    secondrank: list[int] = field(init=False)
    secondrightrank: list[int] = field(init=False)
    holds_proposal: list[bool] = field(init=False)
    in_cycle: list[bool] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        n = self.n
        self.leftperson = [0] * (n + 1)
        self.leftrank = [1] * (n + 1)
        self.rightperson = list(range(n + 1))
        self.rightrank = [n] * (n + 1)
        self.secondperson = [0] * (n + 1)
        self.secondrank = [0] * (n + 1)
        self.secondrightrank = [0] * (n + 1)
        self.holds_proposal = [False] * (n + 1)
        self.in_cycle = [False] * (n + 1)


@dataclass(frozen=True)
class Matching:
    """Perfect matching stored as ``partner[x]`` for x in 1..n (slot 0 unused)."""

    partner: tuple[int, ...]

    def __post_init__(self) -> None:
        p = self.partner
        n = len(p) - 1
        if n < 2 or n % 2:
            raise ValueError("matching needs an even number n >= 2 of persons")
        for x in range(1, n + 1):
            y = p[x]
            if not 1 <= y <= n or y == x or p[y] != x:
                raise ValueError(f"not a fixed-point-free involution at person {x}")

    @classmethod
    def from_pairs(cls, pairs: list[tuple[int, int]]) -> "Matching":
        n = 2 * len(pairs)
        partner = [0] * (n + 1)
        for x, y in pairs:
            partner[x] = y
            partner[y] = x
        return cls(tuple(partner))

    @property
    def n(self) -> int:
        return len(self.partner) - 1

    def pairs(self) -> list[tuple[int, int]]:
        return [(x, y) for x, y in enumerate(self.partner) if 0 < x < y]


@dataclass
class SolveOutcome:
    """Either a stable matching or the phase in which the search failed."""

    matching: Optional[Matching]
    failed_phase: Optional[Phase]
    counters: Counters

    @property
    def solved(self) -> bool:
        return self.matching is not None


def phase_one(oracle, state: SolverState, trace: TraceFn | None = None) -> bool:
    n = state.n
    leftrank = state.leftrank
    rightrank = state.rightrank
    rightperson = state.rightperson
    leftperson = state.leftperson
    holds = state.holds_proposal
    get_data = oracle.get_data
    for x in range(1, n + 1):
        proposer = x
        while True:
            nxt, rank = get_data(proposer, leftrank[proposer])
            while rank > rightrank[nxt]:
                leftrank[proposer] += 1
                nxt, rank = get_data(proposer, leftrank[proposer])
            previous = rightperson[nxt]
            rightrank[nxt] = rank
            rightperson[nxt] = proposer
            leftperson[proposer] = nxt
            if trace is not None:
                trace("propose", proposer=proposer, to=nxt, rank=leftrank[proposer], displaced=previous)
            proposer = previous
            if not holds[nxt]:
                break
        holds[nxt] = True
        if leftrank[proposer] == n:
            return False
    return True


def seek_cycle(oracle, state: SolverState) -> list[int]:
    """Locate an all-or-nothing cycle; the empty list means none is left."""
    n = state.n
    leftrank = state.leftrank
    rightrank = state.rightrank
    rightperson = state.rightperson
    for x in range(1, n + 1):
        if leftrank[x] < rightrank[x]:
            break
    if leftrank[x] >= rightrank[x]:
        return []
    mark = state.in_cycle
    walk: list[int] = []
    get_data = oracle.get_data
    while True:
        walk.append(x)
        mark[x] = True
        p = leftrank[x]
        while True:
            p += 1
            y, r = get_data(x, p)
            if r <= rightrank[y]:
                break
        state.secondrank[x] = p
        state.secondperson[x] = y
        state.secondrightrank[x] = r
        x = rightperson[y]
        if mark[x]:
            break
    for v in walk:
        mark[v] = False
    return walk[walk.index(x):]


def phase_two(oracle, state: SolverState, trace: TraceFn | None = None) -> bool:
    leftrank = state.leftrank
    leftperson = state.leftperson
    rightrank = state.rightrank
    rightperson = state.rightperson
    solution_possible = True
    solution_found = False
    while solution_possible and not solution_found:
        cycle = seek_cycle(oracle, state)
        if not cycle:
            solution_found = True
            continue
        if trace is not None:
            trace("rotate", cycle=list(cycle))
        for x in cycle:
            leftrank[x] = state.secondrank[x]
            leftperson[x] = state.secondperson[x]
            rightrank[leftperson[x]] = state.secondrightrank[x]
            rightperson[leftperson[x]] = x
        for x in cycle:
            if leftrank[x] > rightrank[x]:
                solution_possible = False
    return solution_found


def solve(oracle, trace: TraceFn | None = None) -> SolveOutcome:
    """Run both phases on ``oracle`` and report a matching or the failing phase."""
    state = SolverState(oracle.n)
    oracle.phase = PHASE_ONE
    if not phase_one(oracle, state, trace):
        return SolveOutcome(None, Phase.PHASE_I, oracle.counters)
    oracle.phase = PHASE_TWO
    if not phase_two(oracle, state, trace):
        return SolveOutcome(None, Phase.PHASE_II, oracle.counters)
    partner = tuple(state.leftperson)
    return SolveOutcome(Matching(partner), None, oracle.counters)


def find_blocking_pair(matching: Matching, prefs: ExplicitPreferences) -> tuple[int, int] | None:
    """Lexicographically smallest blocking pair, or None if ``matching`` is stable."""
    if matching.n != prefs.n:
        raise ValueError("matching and preferences disagree on n")
    rank = prefs.rank
    partner = matching.partner
    n = prefs.n
    for x in range(1, n + 1):
        rx = rank[x]
        cur = rx[partner[x]]
        for y in range(x + 1, n + 1):
            if rx[y] < cur and rank[y, x] < rank[y, partner[y]]:
                return x, y
    return None


def is_stable(matching: Matching, prefs: ExplicitPreferences) -> bool:
    return find_blocking_pair(matching, prefs) is None


ENUMERATION_CAP = 12


def _matchings(people: tuple[int, ...]):
    if not people:
        yield []
        return
    first, rest = people[0], people[1:]
    for k, other in enumerate(rest):
        remaining = rest[:k] + rest[k + 1 :]
        for tail in _matchings(remaining):
            yield [(first, other)] + tail


@lru_cache(maxsize=None)
def perfect_matchings(n: int) -> np.ndarray:
    """All (n-1)!! perfect matchings of 1..n as rows of partner arrays.

    The smallest unmatched person is paired with each candidate in turn, so
    every matching appears once and rows come out in lexicographic order.
    """
    rows = []
    for pairs in _matchings(tuple(range(1, n + 1))):
        partner = [0] * (n + 1)
        for x, y in pairs:
            partner[x] = y
            partner[y] = x
        rows.append(partner)
    out = np.array(rows, dtype=np.int64)
    out.setflags(write=False)
    return out


def enumerate_stable_matchings(
    prefs: ExplicitPreferences, cap: int = ENUMERATION_CAP
) -> list[Matching]:
    n = prefs.n
    if n > cap:
        raise ValueError(f"n={n} exceeds the enumeration cap {cap}")
    partners = perfect_matchings(n)
    rank = prefs.rank
    idx = np.arange(1, n + 1)
    # own[m, x]: rank x gives its partner in matching m
    own = rank[idx, partners[:, 1:]]
    sub = rank[1:, 1:]
    # prefers[m, x, y]: x ranks y above its partner in matching m
    prefers = sub[None, :, :] < own[:, :, None]
    blocked = (prefers & prefers.transpose(0, 2, 1)).any(axis=(1, 2))
    return [Matching(tuple(row.tolist())) for row in partners[~blocked]]


def exhaustive_census(n: int = 4) -> tuple[int, int]:
    """Solve every preference profile of size ``n``; return (solvable, total).

    There are ((n - 1)!)**n profiles, so only n <= 4 is practical.
    """
    if n > 4:
        raise ValueError("exhaustive census is only feasible for n <= 4")
    orders = [
        list(itertools.permutations([y for y in range(1, n + 1) if y != x])) for x in range(1, n + 1)
    ]
    solvable = 0
    total = 0
    for profile in itertools.product(*orders):
        prefs = ExplicitPreferences.from_lists(profile)
        solvable += solve(EagerOracle(prefs)).solved
        total += 1
    assert total == math.factorial(n - 1) ** n
    return solvable, total
