"""Exhaustive equilibrium checks and brute-force enumeration of equilibria."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Optional

from .dynamics import Deviation, Mode, iter_deviations
from .errors import PreconditionError
from .model import Instance, Partition, UtilitySpec, game_for

MAX_ENUMERATION_AGENTS = 10


class Status(enum.Enum):
    IS_AE = "IsAE"
    NOT_AE = "NotAE"
    IS_SAE = "IsSAE"
    NOT_SAE = "NotSAE"
    SAE_UP_TO_SIZE = "SAEUpToSize"


@dataclass(frozen=True)
class Verdict:
    status: Status
    witness: Optional[Deviation] = None
    max_subset_size: Optional[int] = None

    @property
    def stable(self) -> bool:
        """No blocking deviation was found (possibly under a subset-size cap)."""
        return self.witness is None

    def __str__(self) -> str:
        if self.witness is not None:
            return f"{self.status.value}: {self.witness.describe()}"
        if self.status is Status.SAE_UP_TO_SIZE:
            return f"{self.status.value} {self.max_subset_size}"
        return self.status.value


def check_ae(instance: Instance, partition: Partition, spec: UtilitySpec) -> Verdict:
    game = game_for(instance, spec)
    partition = game.canonical(partition.groups)
    witness = next(iter_deviations(game, partition, 1), None)
    if witness is None:
        return Verdict(Status.IS_AE)
    return Verdict(Status.NOT_AE, witness)


def check_sae(instance: Instance, partition: Partition, spec: UtilitySpec,
              max_subset_size: Optional[int] = None) -> Verdict:
    """Check every same-group subset against every target.

    With ``max_subset_size`` below the largest group size the check is partial
    and a stable result is reported as SAE_UP_TO_SIZE.
    """
    game = game_for(instance, spec)
    partition = game.canonical(partition.groups)
    witness = next(iter_deviations(game, partition, max_subset_size), None)
    if witness is not None:
        return Verdict(Status.NOT_SAE, witness)
    largest = max(len(g) for g in partition.groups)
    if max_subset_size is not None and max_subset_size < largest:
        return Verdict(Status.SAE_UP_TO_SIZE, max_subset_size=max_subset_size)
    return Verdict(Status.IS_SAE)


def restricted_growth_strings(n: int) -> Iterator[tuple[int, ...]]:
    """All RGS of length n in lexicographic order (one per set partition)."""
    if n == 0:
        yield ()
        return
    a = [0] * n
    b = [1] * n  # b[i] = 1 + max(a[:i])

    while True:
        yield tuple(a)
        j = n - 1
        while j > 0 and a[j] == b[j]:
            j -= 1
        if j == 0:
            return
        a[j] += 1
        for i in range(j + 1, n):
            a[i] = 0
            b[i] = max(b[i - 1], a[i - 1] + 1)


def set_partitions(n: int) -> Iterator[list[frozenset[int]]]:
    for rgs in restricted_growth_strings(n):
        groups: dict[int, set[int]] = {}
        for i, label in enumerate(rgs):
            groups.setdefault(label, set()).add(i)
        yield [frozenset(groups[k]) for k in sorted(groups)]


def enumerate_equilibria(instance: Instance, spec: UtilitySpec, kind: Mode = Mode.SAE) -> list[Partition]:
    """Every partition passing the requested check, in restricted-growth-string order."""
    kind = Mode(kind)
    if instance.n > MAX_ENUMERATION_AGENTS:
        raise PreconditionError(
            f"enumeration limited to n <= {MAX_ENUMERATION_AGENTS} agents (got {instance.n})")
    game = game_for(instance, spec)
    max_size = 1 if kind is Mode.AE else None
    found = []
    for groups in set_partitions(instance.n):
        partition = game.canonical(groups)
        if next(iter_deviations(game, partition, max_size), None) is None:
            found.append(partition)
    return found
