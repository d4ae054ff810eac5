"""Stable roommates solver with lazily generated random preferences."""

from .analysis import conjecture_p, exact_p, fit_power_law, harmonic, pittel_lower_bound, rank_distribution
from .instance import (
    EagerOracle,
    ExplicitPreferences,
    LazyPreferences,
    get_data,
    materialize,
    new_explicit_random,
    new_lazy,
    parse_instance,
    serialize_instance,
)
from .montecarlo import derive_stream_seed, estimate, probe, scan
from .solver import Matching, Phase, SolveOutcome, enumerate_stable_matchings, find_blocking_pair, solve

__all__ = [
    "EagerOracle",
    "ExplicitPreferences",
    "LazyPreferences",
    "Matching",
    "Phase",
    "SolveOutcome",
    "conjecture_p",
    "derive_stream_seed",
    "enumerate_stable_matchings",
    "estimate",
    "exact_p",
    "find_blocking_pair",
    "fit_power_law",
    "get_data",
    "harmonic",
    "materialize",
    "new_explicit_random",
    "new_lazy",
    "parse_instance",
    "pittel_lower_bound",
    "probe",
    "rank_distribution",
    "scan",
    "serialize_instance",
    "solve",
]
