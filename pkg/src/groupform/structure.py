"""Territories, pairwise overlap relations and the encroachment graph."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Optional

from . import geometry
from .errors import PreconditionError
from .geometry import DEFAULT_TOL, CoverageKind, Hull
from .model import Instance, Partition, Ratio, AffineTradeoff, UtilitySpec, game_for
from .verify import check_ae


class RelationKind(enum.Enum):
    NON_OVERLAPPING = "non-overlapping"
    ENCROACHES_ON = "encroaches-on"
    MUTUALLY_ENCROACHING = "mutually-encroaching"
    NESTED = "nested"
    # territories meet but neither group has a member inside the other's
    CROSSING = "crossing"


@dataclass(frozen=True)
class PairRelation:
    """Relation between two groups.

    For ENCROACHES_ON ``source`` encroaches on ``target``; for NESTED ``source``
    is the inner group and ``target`` the outer one. Symmetric kinds leave both
    as the lower and higher index of the pair.
    """

    kind: RelationKind
    source: int
    target: int

    def __str__(self):
        if self.kind is RelationKind.NESTED:
            return f"G{self.source} nested in G{self.target}"
        if self.kind is RelationKind.ENCROACHES_ON:
            return f"G{self.source} encroaches on G{self.target}"
        return f"G{self.source}, G{self.target}: {self.kind.value}"


def group_hull(instance: Instance, group) -> Hull:
    return geometry.convex_hull([instance.locations[i] for i in sorted(group)])


def territory_members(instance: Instance, partition: Partition, group_index: int,
                      tol: float = DEFAULT_TOL) -> frozenset[int]:
    """Every agent located in the closed territory of the group."""
    hull = group_hull(instance, partition.groups[group_index])
    return frozenset(i for i in instance.agents if geometry.contains(hull, instance.locations[i], tol))


def _relation(a: int, b: int, ga: frozenset, gb: frozenset, ta: frozenset, tb: frozenset,
              hulls_meet) -> PairRelation:
    a_on_b = bool(ga & tb)
    b_on_a = bool(gb & ta)
    if a_on_b and b_on_a:
        return PairRelation(RelationKind.MUTUALLY_ENCROACHING, a, b)
    if ga <= tb:
        return PairRelation(RelationKind.NESTED, a, b)
    if gb <= ta:
        return PairRelation(RelationKind.NESTED, b, a)
    if a_on_b:
        return PairRelation(RelationKind.ENCROACHES_ON, a, b)
    if b_on_a:
        return PairRelation(RelationKind.ENCROACHES_ON, b, a)
    if hulls_meet():
        return PairRelation(RelationKind.CROSSING, a, b)
    return PairRelation(RelationKind.NON_OVERLAPPING, a, b)


def classify_pair(instance: Instance, partition: Partition, g: int, h: int,
                  tol: float = DEFAULT_TOL) -> PairRelation:
    if g == h:
        raise PreconditionError("classify_pair needs two distinct groups")
    a, b = sorted((g, h))
    hull_a = group_hull(instance, partition.groups[a])
    hull_b = group_hull(instance, partition.groups[b])
    return _relation(a, b, partition.groups[a], partition.groups[b],
                     territory_members(instance, partition, a, tol),
                     territory_members(instance, partition, b, tol),
                     lambda: geometry.hulls_intersect(hull_a, hull_b, tol))


@dataclass
class EncroachmentGraph:
    groups: tuple[frozenset[int], ...]
    edges: frozenset[tuple[int, int]]
    labels: dict[tuple[int, int], PairRelation] = field(default_factory=dict)

    @property
    def nodes(self) -> range:
        return range(len(self.groups))

    def find_cycle(self) -> Optional[list[int]]:
        try:
            self.topological_order()
        except CycleError as err:
            return list(err.args[1])
        return None

    @property
    def acyclic(self) -> bool:
        return self.find_cycle() is None

    def topological_order(self) -> list[int]:
        """Groups ordered so that every edge points forward (raises CycleError)."""
        preds: dict[int, set[int]] = {v: set() for v in self.nodes}
        for u, v in self.edges:
            preds[v].add(u)
        return list(TopologicalSorter(preds).static_order())


def encroachment_graph(instance: Instance, partition: Partition,
                       tol: float = DEFAULT_TOL) -> EncroachmentGraph:
    """Edge g -> h iff some member of g lies in the territory of h."""
    groups = partition.groups
    hulls = [group_hull(instance, g) for g in groups]
    terr = [frozenset(i for i in instance.agents if geometry.contains(hull, instance.locations[i], tol))
            for hull in hulls]
    edges = set()
    labels = {}
    for a, b in itertools.combinations(range(len(groups)), 2):
        if groups[a] & terr[b]:
            edges.add((a, b))
        if groups[b] & terr[a]:
            edges.add((b, a))
        labels[(a, b)] = _relation(a, b, groups[a], groups[b], terr[a], terr[b],
                                   lambda a=a, b=b: geometry.hulls_intersect(hulls[a], hulls[b], tol))
    return EncroachmentGraph(groups, frozenset(edges), labels)


@dataclass
class StructureReport:
    mutual_pairs: list[tuple[int, int]]
    cycle: Optional[list[int]]
    edge_order_violations: list[tuple[int, int, float, float]]
    near_ties: list[tuple[int, int]]
    graph: EncroachmentGraph

    @property
    def passed(self) -> bool:
        return not self.mutual_pairs and self.cycle is None and not self.edge_order_violations

    def lines(self) -> list[str]:
        out = [
            f"no mutually encroaching pair: {'yes' if not self.mutual_pairs else self.mutual_pairs}",
            f"encroachment graph acyclic: {'yes' if self.cycle is None else 'no, cycle ' + str(self.cycle)}",
            "edges point from higher to lower utility: "
            + ("yes" if not self.edge_order_violations else str(self.edge_order_violations)),
        ]
        if self.near_ties:
            out.append(f"edges between near-tied groups: {self.near_ties}")
        return out


def _check_premises(instance: Instance, spec: UtilitySpec) -> None:
    if not spec.hedonic:
        raise PreconditionError("structure theorems need a hedonic spec (no penalty term)")
    if not isinstance(spec.power, (Ratio, AffineTradeoff)):
        raise PreconditionError("structure theorems need a power form f(R, D) monotone in R and D")
    if spec.coverage is not CoverageKind.DIAMETER and instance.dimension > 2:
        raise PreconditionError(f"coverage {spec.coverage.value} unsupported in dimension {instance.dimension}")


def assert_structure_theorems(instance: Instance, partition: Partition, spec: UtilitySpec,
                              tol: float = DEFAULT_TOL) -> StructureReport:
    """Check the encroachment properties every acceptance equilibrium must have.

    Raises PreconditionError when the partition is not an AE or the spec is
    outside the hedonic, territory-only coverage setting.
    """
    _check_premises(instance, spec)
    verdict = check_ae(instance, partition, spec)
    if not verdict.stable:
        raise PreconditionError(f"partition is not an acceptance equilibrium ({verdict})")
    game = game_for(instance, spec)
    partition = game.canonical(partition.groups)
    graph = encroachment_graph(instance, partition, tol)
    utils = game.utilities(partition.groups)
    mutual = sorted(pair for pair, rel in graph.labels.items()
                    if rel.kind is RelationKind.MUTUALLY_ENCROACHING)
    violations, ties = [], []
    for u, v in sorted(graph.edges):
        if not game.ge(utils[u], utils[v]):
            violations.append((u, v, utils[u], utils[v]))
        elif not game.gt(utils[u], utils[v]):
            ties.append((u, v))
    return StructureReport(mutual, graph.find_cycle(), violations, ties, graph)
