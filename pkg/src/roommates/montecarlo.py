"""Monte Carlo estimation of the solvability probability p_n.

Instance ``i`` of a batch is generated from
``derive_stream_seed(master_seed, i)``, so every result is a pure function
of ``(n, M, master_seed)``: the worker count only changes how the index
range is split, never which instances are solved.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from . import kernels
from .analysis import ci, harmonic
from .instance import EagerOracle, LazyPreferences, check_size, new_explicit_random
from .rng import derive_stream_seed
from .solver import solve

log = logging.getLogger(__name__)

CHUNK = 4096
ENGINES = ("compiled", "python")


class SimulationError(RuntimeError):
    """A batch could not be completed; no partial result is returned."""


@dataclass(frozen=True)
class SampleResult:
    n: int
    M: int
    successes: int
    p_hat: float
    sigma: float
    master_seed: int
    oracle: str = "lazy"

    @classmethod
    def from_counts(cls, n: int, M: int, successes: int, master_seed: int, oracle: str = "lazy"):
        p_hat = successes / M
        return cls(n, M, successes, p_hat, ci(p_hat, M), master_seed, oracle)

    def as_dict(self) -> dict:
        return asdict(self)


def _chunks(M: int, size: int = CHUNK) -> list[tuple[int, int]]:
    return [(lo, min(lo + size, M)) for lo in range(0, M, size)]


def _python_outcomes(n: int, master_seed: int, lo: int, hi: int, eager: bool) -> np.ndarray:
    out = np.empty(hi - lo, np.int8)
    for k in range(lo, hi):
        seed = derive_stream_seed(master_seed, k)
        oracle = EagerOracle(new_explicit_random(n, seed)) if eager else LazyPreferences(n, seed)
        res = solve(oracle)
        out[k - lo] = 0 if res.solved else (1 if res.failed_phase.value == "I" else 2)
    return out


def _map_chunks(fn: Callable[[int, int], object], M: int, workers: int) -> list:
    chunks = _chunks(M)
    try:
        if workers == 1 or len(chunks) == 1:
            return [fn(lo, hi) for lo, hi in chunks]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda c: fn(*c), chunks))
    except MemoryError as exc:
        raise SimulationError(f"out of memory while solving: {exc}") from exc


def _check(n: int, M: int, workers: int) -> int:
    n = check_size(n)
    if M < 1:
        raise ValueError("M must be at least 1")
    if workers < 1:
        raise ValueError("workers must be at least 1")
    return n


def outcomes(
    n: int, M: int, master_seed: int, workers: int = 1, eager: bool = False, engine: str = "compiled"
) -> np.ndarray:
    """Verdict code per instance: 0 solved, 1 failed in phase I, 2 in phase II."""
    n = _check(n, M, workers)
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}")
    master = np.uint64(master_seed & kernels.MASK64)
    if engine == "compiled":
        fn = lambda lo, hi: kernels.outcomes_range(n, master, lo, hi, eager)  # noqa: E731
    else:
        fn = lambda lo, hi: _python_outcomes(n, master_seed, lo, hi, eager)  # noqa: E731
    return np.concatenate(_map_chunks(fn, M, workers))


def estimate(
    n: int,
    M: int,
    master_seed: int,
    workers: int = 1,
    eager: bool = False,
    engine: str = "compiled",
) -> SampleResult:
    """Solve M random instances of size n and report the solvable fraction."""
    codes = outcomes(n, M, master_seed, workers, eager, engine)
    successes = int(np.count_nonzero(codes == kernels.SOLVED))
    return SampleResult.from_counts(n, M, successes, master_seed, "eager" if eager else "lazy")


@dataclass
class ScanGrid:
    """Sizes ``n0 * 2**k`` for ``k = 0..k_max`` with a sample count per size."""

    n0_list: list[int]
    k_max: int
    samples: Mapping[int, int] = field(default_factory=dict)

    def sizes(self) -> list[int]:
        return sorted({n0 * 2**k for n0 in self.n0_list for k in range(self.k_max + 1)})

    def validate(self) -> None:
        if self.k_max < 0:
            raise ValueError("k_max must be non-negative")
        for n in self.sizes():
            check_size(n)
            if self.samples.get(n, 0) < 1:
                raise ValueError(f"no sample count scheduled for n={n}")

    @classmethod
    def with_budget(
        cls, n0_list: Iterable[int], k_max: int, budget: float, m_min: int = 100, m_max: int = 10**7
    ) -> "ScanGrid":
        """Schedule ``M ~ budget / n^1.5`` (work per instance grows like n^1.5)."""
        grid = cls(list(n0_list), k_max)
        grid.samples = {
            n: int(min(m_max, max(m_min, round(budget / n**1.5)))) for n in grid.sizes()
        }
        return grid

    @classmethod
    def uniform(cls, n0_list: Iterable[int], k_max: int, M: int) -> "ScanGrid":
        grid = cls(list(n0_list), k_max)
        grid.samples = {n: M for n in grid.sizes()}
        return grid


@dataclass(frozen=True)
class ScanFailure:
    n: int
    M: int
    error: str


def scan(grid: ScanGrid, master_seed: int, workers: int = 1) -> list[SampleResult | ScanFailure]:
    """Estimate p_n at every grid size, in ascending n.

    Point ``j`` (by ascending n) uses master seed
    ``derive_stream_seed(master_seed, j)``. A failing point is reported as a
    :class:`ScanFailure` and the scan moves on.
    """
    grid.validate()
    results: list[SampleResult | ScanFailure] = []
    for ordinal, n in enumerate(grid.sizes()):
        M = grid.samples[n]
        try:
            results.append(estimate(n, M, derive_stream_seed(master_seed, ordinal), workers))
        except (SimulationError, MemoryError) as exc:
            log.error("scan point n=%d failed: %s", n, exc)
            results.append(ScanFailure(n, M, str(exc)))
    return results


COUNTER_FIELDS = (
    "getdata_calls",
    "entries_created",
    "phase1_reads",
    "phase2_reads",
    "peak_map_entries",
    "phase1_entries_created",
)


@dataclass(frozen=True)
class CounterStats:
    """Counter means and standard deviations over M lazy solves.

    ``elements_read`` counts distinct preference-table elements the solver
    touched (two per created list entry); ``phase1_elements_read`` is the
    part disclosed during phase I.
    """

    n: int
    M: int
    successes: int
    mean: dict[str, float]
    std: dict[str, float]

    @property
    def reads_per_n15(self) -> float:
        return self.mean["elements_read"] / self.n**1.5

    @property
    def phase1_reads_per_2nHn(self) -> float:
        return self.mean["phase1_elements_read"] / (2 * self.n * harmonic(self.n))

    @property
    def calls_per_n15(self) -> float:
        return self.mean["getdata_calls"] / self.n**1.5

    def as_dict(self) -> dict:
        out: dict = {"n": self.n, "M": self.M, "successes": self.successes}
        for k in self.mean:
            out[f"{k}_mean"] = self.mean[k]
            out[f"{k}_std"] = self.std[k]
        out["reads_per_n15"] = self.reads_per_n15
        out["phase1_reads_per_2nHn"] = self.phase1_reads_per_2nHn
        out["calls_per_n15"] = self.calls_per_n15
        return out


def probe(n: int, M: int, master_seed: int, workers: int = 1) -> CounterStats:
    """Instrumented lazy solves; aggregates per-instance counters."""
    n = _check(n, M, workers)
    master = np.uint64(master_seed & kernels.MASK64)
    parts = _map_chunks(lambda lo, hi: kernels.counters_range(n, master, lo, hi), M, workers)
    rows = np.concatenate([r for r, _ in parts]).astype(float)
    codes = np.concatenate([c for _, c in parts])
    table = {name: rows[:, j] for j, name in enumerate(COUNTER_FIELDS)}
    table["elements_read"] = 2.0 * table["entries_created"]
    table["phase1_elements_read"] = 2.0 * table["phase1_entries_created"]
    mean = {k: float(v.mean()) for k, v in table.items()}
    std = {k: float(v.std(ddof=1)) if M > 1 else 0.0 for k, v in table.items()}
    return CounterStats(n, M, int(np.count_nonzero(codes == kernels.SOLVED)), mean, std)


def combined_sigma(*sigmas: float) -> float:
    return math.sqrt(sum(s * s for s in sigmas))
