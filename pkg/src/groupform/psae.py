"""Greedy extraction of maximum-utility groups (PSAE construction).

Each round removes from the remaining pool the subset of highest utility,
preferring larger subsets among ties. The brute-force version enumerates
every subset; the diameter fast path only looks at singletons and one
candidate per pair of agents.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import PreconditionError
from .geometry import CoverageKind
from .model import Game, Instance, Partition, UtilitySpec, game_for

log = logging.getLogger(__name__)

EXACT_CAP = 20


@dataclass
class Diagnostics:
    candidate_counts: list[int] = field(default_factory=list)
    tie_breaks: list[int] = field(default_factory=list)
    oracle_checked: bool = False
    discrepancies: list[tuple[int, float, float]] = field(default_factory=list)

    @property
    def agrees(self) -> bool:
        """No round where brute force found a strictly better group (vacuous without the oracle)."""
        return not self.discrepancies

    @property
    def first_group_agrees(self) -> bool:
        return not any(rnd == 0 for rnd, _, _ in self.discrepancies)


def _group_utility(game: Game, group: frozenset, placed: list[frozenset]) -> float:
    """Utility of ``group`` next to the groups extracted so far."""
    if game.spec.hedonic:
        return game.power(group)
    return game.utilities(placed + [group])[-1]


def _select(game: Game, scored: Iterable[tuple[float, frozenset]]) -> tuple[frozenset, float, bool]:
    """Argmax under epsilon ties, then most agents, then smallest sorted ids.

    The third element reports whether the last (arbitrary) rule was needed.
    """
    scored = list(scored)
    top = max(u for u, _ in scored)
    near = [(u, g) for u, g in scored if game.ge(u, top)]
    size = max(len(g) for _, g in near)
    biggest = [(u, g) for u, g in near if len(g) == size]
    u, g = min(biggest, key=lambda ug: sorted(ug[1]))
    return g, u, len(biggest) > 1


def _best_subset(game: Game, pool: frozenset, placed: list[frozenset]) -> tuple[frozenset, float, bool]:
    members = sorted(pool)
    scored = ((_group_utility(game, frozenset(c), placed), frozenset(c))
              for size in range(1, len(members) + 1)
              for c in itertools.combinations(members, size))
    return _select(game, scored)


def max_utility_group(instance: Instance, pool: Iterable[int], spec: UtilitySpec,
                      cap: int = EXACT_CAP) -> frozenset[int]:
    pool = frozenset(pool)
    if not pool:
        raise PreconditionError("pool must be nonempty")
    if len(pool) > cap:
        raise PreconditionError(
            f"pool of {len(pool)} agents exceeds the exact enumeration cap {cap}; "
            "use psae_diameter_fast for diameter coverage")
    return _best_subset(game_for(instance, spec), pool, [])[0]


def psae_bruteforce(instance: Instance, spec: UtilitySpec, cap: int = EXACT_CAP) -> Partition:
    if instance.n > cap:
        raise PreconditionError(f"n = {instance.n} exceeds the exact enumeration cap {cap}")
    game = game_for(instance, spec)
    pool = frozenset(instance.agents)
    placed: list[frozenset] = []
    while pool:
        group, _, tied = _best_subset(game, pool, placed)
        if tied:
            log.info("round %d: lexicographic tie-break among equal-size maxima", len(placed))
        placed.append(group)
        pool -= group
    return game.canonical(placed)


def _pair_candidate(game: Game, pool: frozenset, i: int, j: int) -> frozenset:
    """Largest diameter-preserving subset of the lens around the pair (i, j).

    Lens members are added nearest-to-midpoint first, skipping any that would
    push the diameter past d(i, j).
    """
    locs = game.instance.locations
    dij = math.dist(locs[i], locs[j])
    lim = dij + game.eps
    mid = tuple((a + b) / 2.0 for a, b in zip(locs[i], locs[j]))
    lens = [k for k in pool if k not in (i, j)
            and math.dist(locs[k], locs[i]) <= lim and math.dist(locs[k], locs[j]) <= lim]
    lens.sort(key=lambda k: (math.dist(locs[k], mid), k))
    chosen = [i, j]
    for k in lens:
        if all(math.dist(locs[k], locs[c]) <= lim for c in chosen):
            chosen.append(k)
    return frozenset(chosen)


def psae_diameter_fast(instance: Instance, spec: UtilitySpec,
                       oracle_check: bool = False,
                       cap: int = EXACT_CAP) -> tuple[Partition, Diagnostics]:
    """Polynomial candidate search for diameter coverage without penalties.

    With ``oracle_check`` each round (while the pool fits the exact cap) is
    compared to brute-force enumeration and utility gaps are recorded.
    """
    if spec.coverage is not CoverageKind.DIAMETER or not spec.hedonic:
        raise PreconditionError("the fast path needs diameter coverage and no penalty term")
    game = game_for(instance, spec)
    diag = Diagnostics(oracle_checked=oracle_check)
    pool = frozenset(instance.agents)
    placed: list[frozenset] = []
    while pool:
        members = sorted(pool)
        candidates = [frozenset([i]) for i in members]
        candidates += [_pair_candidate(game, pool, i, j)
                       for i, j in itertools.combinations(members, 2)]
        diag.candidate_counts.append(len(candidates))
        group, u, tied = _select(game, ((game.power(g), g) for g in candidates))
        if tied:
            diag.tie_breaks.append(len(placed))
        if oracle_check and len(pool) <= cap:
            _, best_u, _ = _best_subset(game, pool, [])
            if game.gt(best_u, u):
                diag.discrepancies.append((len(placed), u, best_u))
        placed.append(group)
        pool -= group
    return game.canonical(placed), diag
