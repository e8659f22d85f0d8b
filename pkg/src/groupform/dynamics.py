"""Asynchronous improvement updates by single agents or same-group subsets.

Every executed step strictly raises the sorted utility vector lexicographically,
which is what guarantees termination; the trace records that vector after each
step so monotonicity can be re-checked independently.
"""
from __future__ import annotations

import enum
import itertools
import logging
import random
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .model import (NEW_GROUP, Game, Instance, NewGroupType, Ordering, Partition,
                    UtilitySpec, game_for)

log = logging.getLogger(__name__)

Target = Union[int, NewGroupType]


class Mode(enum.Enum):
    AE = "ae"
    SAE = "sae"


class DeviationPolicy(enum.Enum):
    FIRST_FOUND = "first"
    BEST_POTENTIAL = "best"
    SEEDED_RANDOM = "random"


@dataclass(frozen=True)
class Deviation:
    """Movers ``S`` leave group ``from_group`` for ``to_group`` (indices in the pre-move partition)."""

    movers: frozenset[int]
    from_group: int
    to_group: Target
    utility_before: float
    utility_after: float
    target_utility: Optional[float] = None

    def describe(self) -> str:
        to = "a new group" if self.to_group is NEW_GROUP else f"group {self.to_group}"
        movers = ",".join(map(str, sorted(self.movers)))
        text = (f"agents {{{movers}}} move from group {self.from_group} to {to}: "
                f"utility {self.utility_before:.6g} -> {self.utility_after:.6g}")
        if self.target_utility is not None:
            text += f" (target group {self.target_utility:.6g} -> {self.utility_after:.6g})"
        return text


def deviation_groups(partition: Partition, movers: frozenset, k: int,
                     target: Target) -> list[frozenset]:
    """Groups after moving ``movers`` out of group ``k``; the moved-into group is last."""
    groups = partition.groups
    rest = groups[k] - movers
    if target is NEW_GROUP:
        kept = [g for i, g in enumerate(groups) if i != k]
        moved = movers
    else:
        kept = [g for i, g in enumerate(groups) if i not in (k, target)]
        moved = groups[target] | movers
    if rest:
        kept.append(rest)
    kept.append(moved)
    return kept


def evaluate_deviation(game: Game, partition: Partition, utils: list[float],
                       movers: frozenset, k: int, target: Target) -> Optional[Deviation]:
    """The deviation if it strictly improves the movers and the target accepts them."""
    if target is NEW_GROUP:
        if movers == partition.groups[k]:
            return None
    elif target == k:
        return None
    if game.spec.hedonic:
        moved = movers if target is NEW_GROUP else partition.groups[target] | movers
        u_after = game.power(moved)
    else:
        u_after = game.utilities(deviation_groups(partition, movers, k, target))[-1]
    u_before = utils[k]
    if not game.gt(u_after, u_before):
        return None
    if target is NEW_GROUP:
        return Deviation(movers, k, NEW_GROUP, u_before, u_after)
    if not game.ge(u_after, utils[target]):
        return None
    return Deviation(movers, k, target, u_before, u_after, utils[target])


def _targets(partition: Partition, k: int) -> Iterator[Target]:
    for t in range(len(partition.groups)):
        if t != k:
            yield t
    yield NEW_GROUP


def candidate_subsets(partition: Partition,
                      max_subset_size: Optional[int]) -> Iterator[tuple[int, frozenset]]:
    """Groups by index, then subsets by size, then lexicographically."""
    for k, group in enumerate(partition.groups):
        members = sorted(group)
        top = len(members) if max_subset_size is None else min(max_subset_size, len(members))
        for size in range(1, top + 1):
            for combo in itertools.combinations(members, size):
                yield k, frozenset(combo)


def iter_deviations(game: Game, partition: Partition,
                    max_subset_size: Optional[int]) -> Iterator[Deviation]:
    """All improving, accepted deviations in canonical scan order."""
    utils = game.utilities(partition.groups)
    for k, movers in candidate_subsets(partition, max_subset_size):
        for target in _targets(partition, k):
            dev = evaluate_deviation(game, partition, utils, movers, k, target)
            if dev is not None:
                yield dev


def improving_responses(instance: Instance, partition: Partition, S, spec: UtilitySpec) -> set[Target]:
    """Targets (group indices and/or NEW_GROUP) that strictly improve ``S`` and accept it.

    Empty when the members of ``S`` are not all in one group.
    """
    game = game_for(instance, spec)
    S = frozenset(S)
    if not S:
        return set()
    homes = {partition.group_of(i) for i in S}
    if len(homes) != 1:
        return set()
    k = homes.pop()
    utils = game.utilities(partition.groups)
    return {dev.to_group for target in _targets(partition, k)
            if (dev := evaluate_deviation(game, partition, utils, S, k, target)) is not None}


def apply_deviation(game: Game, partition: Partition, dev: Deviation) -> Partition:
    return game.canonical(deviation_groups(partition, dev.movers, dev.from_group, dev.to_group))


@dataclass
class Step:
    deviation: Deviation
    potential: tuple[float, ...]


@dataclass
class DynamicsTrace:
    initial_potential: tuple[float, ...]
    steps: list[Step] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    subset_cap: Optional[int] = None
    violations: list[int] = field(default_factory=list)

    @property
    def monotone(self) -> bool:
        return not self.violations

    @property
    def stability(self) -> str:
        """Human-readable claim the final state supports."""
        if not self.converged:
            return "not converged"
        if self.subset_cap is None:
            return "stable"
        return f"stable up to subset size {self.subset_cap}"


@dataclass
class DynamicsResult:
    partition: Partition
    trace: DynamicsTrace


def _choose(game: Game, partition: Partition, max_size: Optional[int],
            policy: DeviationPolicy, rng: random.Random) -> Optional[Deviation]:
    if policy is DeviationPolicy.FIRST_FOUND:
        return next(iter_deviations(game, partition, max_size), None)
    devs = list(iter_deviations(game, partition, max_size))
    if not devs:
        return None
    if policy is DeviationPolicy.SEEDED_RANDOM:
        return rng.choice(devs)
    best, best_psi = None, None
    for dev in devs:
        psi = game.potential(apply_deviation(game, partition, dev))
        if best is None or game.compare(psi, best_psi) is Ordering.SUCCEEDS:
            best, best_psi = dev, psi
    return best


def run_dynamics(instance: Instance, initial: Partition, spec: UtilitySpec,
                 mode: Mode = Mode.AE,
                 policy: DeviationPolicy = DeviationPolicy.FIRST_FOUND,
                 seed: int = 0,
                 max_subset_size: Optional[int] = None,
                 max_iterations: int = 100_000) -> DynamicsResult:
    """Apply improving deviations until none remains.

    AE mode moves single agents; SAE mode moves any subset of one group, capped
    at ``max_subset_size`` when given (the fixed point is then only stable
    against subsets up to that size).
    """
    mode = Mode(mode)
    policy = DeviationPolicy(policy)
    game = game_for(instance, spec)
    rng = random.Random(seed)
    partition = game.canonical(initial.groups)

    if mode is Mode.AE:
        max_size = 1
        cap = None
    else:
        max_size = max_subset_size
        cap = max_subset_size if max_subset_size is not None and max_subset_size < instance.n else None

    psi = game.potential(partition)
    trace = DynamicsTrace(initial_potential=psi, subset_cap=cap)
    for it in range(max_iterations):
        dev = _choose(game, partition, max_size, policy, rng)
        if dev is None:
            trace.converged = True
            trace.iterations = it
            if cap is not None and max(map(len, partition.groups)) <= cap:
                trace.subset_cap = None
            return DynamicsResult(partition, trace)
        partition = apply_deviation(game, partition, dev)
        new_psi = game.potential(partition)
        if game.compare(new_psi, psi) is not Ordering.SUCCEEDS:
            log.warning("step %d did not raise the potential: %s -> %s", it, psi, new_psi)
            trace.violations.append(it)
        trace.steps.append(Step(dev, new_psi))
        psi = new_psi
    trace.iterations = max_iterations
    log.warning("dynamics stopped after %d iterations without converging", max_iterations)
    return DynamicsResult(partition, trace)
