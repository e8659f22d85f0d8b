"""Instances, utility specifications, partitions and the lexicographic potential."""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from . import geometry
from .errors import ModelError
from .geometry import CoverageKind, Point

DEFAULT_EPSILON = 1e-9


# --- power functions f(R, D) -------------------------------------------------

class GForm(enum.Enum):
    LINEAR = "linear"
    POWER = "power"
    LOG_SCALED = "log_scaled"


@dataclass(frozen=True)
class Ratio:
    """f(R, D) = g(R) / (1 + D)."""

    g: GForm = GForm.LINEAR
    alpha: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "g", GForm(self.g))
        if self.g is GForm.POWER and not self.alpha > 0:
            raise ModelError("power exponent alpha must be > 0")

    def g_value(self, R: float) -> float:
        if self.g is GForm.LINEAR:
            return R
        if self.g is GForm.POWER:
            return R ** self.alpha
        return R * (1.0 + math.log1p(R))

    def log_g(self, R: float) -> float:
        if self.g is GForm.LINEAR:
            return math.log(R)
        if self.g is GForm.POWER:
            return self.alpha * math.log(R)
        return math.log(R) + math.log1p(math.log1p(R))

    @staticmethod
    def h(D: float) -> float:
        return 1.0 + D

    def __call__(self, R: float, D: float) -> float:
        return self.g_value(R) / self.h(D)


@dataclass(frozen=True)
class AffineTradeoff:
    """f(R, D) = a*R - b*D."""

    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ModelError("affine tradeoff needs a > 0 and b > 0")

    def __call__(self, R: float, D: float) -> float:
        return self.a * R - self.b * D


PowerForm = Union[Ratio, AffineTradeoff]


# --- penalty H ----------------------------------------------------------------

@dataclass(frozen=True)
class NoPenalty:
    def __call__(self, R: float, P: float) -> float:
        return 0.0


@dataclass(frozen=True)
class ResourceScaled:
    beta: float = 0.0

    def __post_init__(self):
        if self.beta < 0:
            raise ModelError("penalty beta must be >= 0")

    def __call__(self, R: float, P: float) -> float:
        return self.beta * R


@dataclass(frozen=True)
class PowerScaled:
    beta: float = 0.0

    def __post_init__(self):
        if self.beta < 0:
            raise ModelError("penalty beta must be >= 0")

    def __call__(self, R: float, P: float) -> float:
        return self.beta * P if P >= 0 else 0.0


PenaltyForm = Union[NoPenalty, ResourceScaled, PowerScaled]

_R_GRID = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0)
_D_GRID = (0.0, 0.1, 0.5, 1.0, 3.0, 10.0)


def _check_power_monotone(power) -> None:
    for D in _D_GRID:
        vals = [power(R, D) for R in _R_GRID]
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ModelError(f"power form {power!r} is not strictly increasing in R at D={D}")
    for R in _R_GRID:
        vals = [power(R, D) for D in _D_GRID]
        if any(b >= a for a, b in zip(vals, vals[1:])):
            raise ModelError(f"power form {power!r} is not strictly decreasing in D at R={R}")


@dataclass(frozen=True)
class UtilitySpec:
    coverage: CoverageKind = CoverageKind.DIAMETER
    power: PowerForm = field(default_factory=Ratio)
    penalty: PenaltyForm = field(default_factory=NoPenalty)
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        object.__setattr__(self, "coverage", CoverageKind(self.coverage))
        if not self.epsilon > 0:
            raise ModelError("epsilon must be positive")
        _check_power_monotone(self.power)

    @property
    def hedonic(self) -> bool:
        return isinstance(self.penalty, NoPenalty)


# --- instance -----------------------------------------------------------------

@dataclass(frozen=True)
class Instance:
    """Agents ``0..n-1`` with locations in R^d and positive resources."""

    locations: tuple[Point, ...]
    resources: tuple[float, ...]

    def __post_init__(self):
        locs = tuple(tuple(float(c) for c in x) for x in self.locations)
        res = tuple(float(r) for r in self.resources)
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "resources", res)
        if len(locs) < 2:
            raise ModelError("an instance needs at least 2 agents")
        if len(locs) != len(res):
            raise ModelError("locations and resources differ in length")
        d = len(locs[0])
        if d < 1 or any(len(x) != d for x in locs):
            raise ModelError("all locations must share one dimension >= 1")
        if not all(math.isfinite(c) for x in locs for c in x):
            raise ModelError("locations must be finite")
        for i, r in enumerate(res):
            if not (r > 0 and math.isfinite(r)):
                raise ModelError(f"agent {i}: resource must be positive (r_i > 0), got {r}")
        object.__setattr__(self, "_hash", hash((locs, res)))

    def __hash__(self):
        return self._hash

    @property
    def n(self) -> int:
        return len(self.resources)

    @property
    def dimension(self) -> int:
        return len(self.locations[0])

    @property
    def agents(self) -> range:
        return range(self.n)


# --- partitions -----------------------------------------------------------------

Group = frozenset


@dataclass(frozen=True)
class Partition:
    """Disjoint nonempty groups of agent ids.

    Partitions returned by game-aware operations are canonical: groups are in
    non-increasing utility order, exact ties broken by sorted member ids.
    """

    groups: tuple[frozenset[int], ...]

    def __post_init__(self):
        groups = tuple(frozenset(g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        seen: set[int] = set()
        for g in groups:
            if not g:
                raise ModelError("partition contains an empty group")
            if seen & g:
                raise ModelError(f"agents {sorted(seen & g)} appear in more than one group")
            seen |= g

    @classmethod
    def of(cls, groups: Iterable[Iterable[int]]) -> "Partition":
        return cls(tuple(frozenset(g) for g in groups))

    @property
    def assignment(self) -> dict[int, int]:
        return {i: k for k, g in enumerate(self.groups) for i in g}

    def group_of(self, agent: int) -> int:
        for k, g in enumerate(self.groups):
            if agent in g:
                return k
        raise KeyError(agent)

    def key(self) -> tuple[tuple[int, ...], ...]:
        """Order-independent identity of the partition."""
        return tuple(sorted(tuple(sorted(g)) for g in self.groups))

    def __len__(self) -> int:
        return len(self.groups)

    def __str__(self) -> str:
        return "{" + ", ".join("{" + ",".join(map(str, sorted(g))) + "}" for g in self.groups) + "}"


class NewGroupType:
    """Deviation target meaning "form a new group" (the empty group, U = -inf)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NewGroup"

    def __reduce__(self):
        return (NewGroupType, ())


NEW_GROUP = NewGroupType()


# --- evaluation -----------------------------------------------------------------

class Game:
    """Instance plus utility spec, with memoized group power.

    Every comparison uses the spec's epsilon: ``gt(x, y)`` is x > y + eps and
    ``ge(x, y)`` is x > y - eps.
    """

    def __init__(self, instance: Instance, spec: UtilitySpec):
        self.instance = instance
        self.spec = spec
        self.eps = spec.epsilon
        self._power: dict[frozenset, float] = {}
        self._coverage: dict[frozenset, float] = {}

    def gt(self, x: float, y: float) -> bool:
        return x > y + self.eps

    def ge(self, x: float, y: float) -> bool:
        return x > y - self.eps

    def resources_of(self, members: Iterable[int]) -> float:
        return math.fsum(self.instance.resources[i] for i in members)

    def coverage(self, members: frozenset) -> float:
        val = self._coverage.get(members)
        if val is None:
            pts = [self.instance.locations[i] for i in sorted(members)]
            val = geometry.coverage(pts, self.spec.coverage)
            self._coverage[members] = val
        return val

    def power(self, members: Iterable[int]) -> float:
        members = frozenset(members)
        val = self._power.get(members)
        if val is None:
            if not members:
                raise ModelError("group power is undefined for the empty group")
            bad = [i for i in members if not 0 <= i < self.instance.n]
            if bad:
                raise ModelError(f"unknown agent ids {sorted(bad)}")
            val = self.spec.power(self.resources_of(members), self.coverage(members))
            self._power[members] = val
        return val

    def penalty(self, members: frozenset) -> float:
        return self.spec.penalty(self.resources_of(members), self.power(members))

    def utilities(self, groups: Sequence[frozenset]) -> list[float]:
        """Utility of every group of a (possibly hypothetical) partition."""
        powers = [self.power(g) for g in groups]
        if self.spec.hedonic:
            return powers
        pens = [self.penalty(g) for g in groups]
        return [p - math.fsum(h for q, h in zip(powers, pens) if self.gt(q, p)) for p in powers]

    def canonical(self, groups: Iterable[Iterable[int]]) -> Partition:
        groups = [frozenset(g) for g in groups]
        covered = set().union(*groups) if groups else set()
        if covered != set(self.instance.agents) or sum(map(len, groups)) != self.instance.n:
            raise ModelError("groups must partition all agents exactly once")
        utils = self.utilities(groups)
        order = sorted(range(len(groups)), key=lambda k: (-utils[k], sorted(groups[k])))
        return Partition(tuple(groups[k] for k in order))

    def utility(self, partition: Partition, k: int) -> float:
        if self.spec.hedonic:
            return self.power(partition.groups[k])
        return self.utilities(partition.groups)[k]

    def potential(self, partition: Partition) -> tuple[float, ...]:
        utils = self.utilities(partition.groups)
        return tuple(sorted((u for u, g in zip(utils, partition.groups) for _ in g), reverse=True))

    def compare(self, a: Sequence[float], b: Sequence[float]) -> "Ordering":
        return compare_states(a, b, self.eps)


@functools.lru_cache(maxsize=32)
def game_for(instance: Instance, spec: UtilitySpec) -> Game:
    """Shared memoizing evaluator for an (instance, spec) pair."""
    return Game(instance, spec)


def group_power(instance: Instance, members: Iterable[int], spec: UtilitySpec) -> float:
    return game_for(instance, spec).power(members)


def group_utility(instance: Instance, partition: Partition, group_index: int,
                  spec: UtilitySpec) -> float:
    """Power minus the penalties of strictly more powerful groups."""
    return game_for(instance, spec).utility(partition, group_index)


def canonical_partition(instance: Instance, groups: Iterable[Iterable[int]],
                        spec: UtilitySpec) -> Partition:
    return game_for(instance, spec).canonical(groups)


# --- preference profiles ----------------------------------------------------------

@dataclass(frozen=True)
class Infeasible:
    """Profile is inconsistent: ``i`` wants ``j`` but ``j`` chose a different set."""

    i: int
    j: int


def validate_profile(preferences: Sequence[Iterable[int]] | Mapping[int, Iterable[int]]
                     ) -> Partition | Infeasible:
    """Induced partition of a feasible profile, else the first violating pair.

    Groups of the returned partition are ordered by smallest member id.
    """
    if isinstance(preferences, Mapping):
        prefs = {int(i): frozenset(a) for i, a in preferences.items()}
    else:
        prefs = {i: frozenset(a) for i, a in enumerate(preferences)}
    for i, a in prefs.items():
        if i not in a:
            raise ModelError(f"agent {i}'s chosen set must contain {i}")
    for i in sorted(prefs):
        for j in sorted(prefs[i]):
            if prefs.get(j) != prefs[i]:
                return Infeasible(i, j)
    groups = sorted(set(prefs.values()), key=min)
    return Partition(tuple(groups))


# --- potential ---------------------------------------------------------------------

class Ordering(enum.Enum):
    PRECEDES = -1
    EQUAL = 0
    SUCCEEDS = 1


def potential_vector(instance: Instance, partition: Partition, spec: UtilitySpec) -> tuple[float, ...]:
    """Agent utilities sorted non-increasingly."""
    return game_for(instance, spec).potential(partition)


def compare_states(a: Sequence[float], b: Sequence[float],
                   epsilon: float = DEFAULT_EPSILON) -> Ordering:
    """Lexicographic comparison with entries within ``epsilon`` treated as equal.

    SUCCEEDS means ``a`` ranks strictly higher than ``b``.
    """
    if len(a) != len(b):
        raise ModelError(f"potential vectors differ in length ({len(a)} vs {len(b)})")
    for x, y in zip(a, b):
        if x > y + epsilon:
            return Ordering.SUCCEEDS
        if x < y - epsilon:
            return Ordering.PRECEDES
    return Ordering.EQUAL
