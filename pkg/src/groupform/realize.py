"""Build a planar instance whose acceptance equilibrium has a prescribed encroachment DAG.

Each DAG node becomes a group whose territory is a thin rectangle around a unit
segment; all segments cross near a common centre. An edge u -> v is realized by
placing one agent of u's group at the crossing of the two segments, inside v's
territory. Groups are then padded to strictly decreasing sizes and given
strictly decreasing per-agent resources large enough that no agent of a weaker
group is ever accepted by a stronger one.
"""
from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import geometry
from .errors import ConstructionError, PreconditionError
from .geometry import CoverageKind, Point
from .model import GForm, Instance, Partition, Ratio, AffineTradeoff, UtilitySpec, game_for
from .structure import encroachment_graph
from .verify import check_ae

log = logging.getLogger(__name__)

SEGMENT_LENGTH = 1.0
RESOURCE_MARGIN = 1.05
_OVERFLOW = 1e250


# --- DAG input ------------------------------------------------------------------

@dataclass(frozen=True)
class DagInput:
    node_count: int
    edges: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        edges = frozenset((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.node_count < 1:
            raise PreconditionError("a DAG needs at least one node")
        for u, v in edges:
            if u == v:
                raise PreconditionError(f"self-loop on node {u}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise PreconditionError(f"edge ({u}, {v}) references a node outside 0..{self.node_count - 1}")
        self.topological_order()

    def topological_order(self) -> list[int]:
        """Kahn's algorithm, smallest ready node first."""
        indeg = [0] * self.node_count
        succ: list[list[int]] = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            indeg[v] += 1
            succ[u].append(v)
        ready = [v for v in range(self.node_count) if indeg[v] == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            u = heapq.heappop(ready)
            order.append(u)
            for v in succ[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    heapq.heappush(ready, v)
        if len(order) != self.node_count:
            raise PreconditionError("graph has a cycle")
        return order


# --- growth condition ---------------------------------------------------------------

DEFAULT_R_GRID = tuple(10.0 ** k for k in range(1, 13))


@dataclass
class GrowthEvidence:
    holds: bool
    max_ratio: float
    ratios: list[tuple[float, float]]
    subexponential: Optional[bool] = None
    log_g_over_r: list[tuple[float, float]] = field(default_factory=list)


def check_growth_condition(power, r: float, D: float, delta: float,
                           R_grid: Optional[Sequence[float]] = None,
                           margin: float = 1e-9) -> GrowthEvidence:
    """Evaluate f(R, D) / f(R + r, D + delta) on a geometric grid of R.

    The default grid is 10^1..10^12 extended by r*10^1..r*10^16, so the tail
    always lies far beyond the step r however large r is.
    Holds when the ratio exceeds ``1 + margin`` somewhere on the grid. Forms
    written as g(R)/h(D) (anything exposing ``log_g`` and ``h``) are evaluated
    in log space and must also show log(g(R))/R vanishing along the grid.
    """
    if not (r > 0 and D > 0 and delta > 0):
        raise PreconditionError("r, D and delta must be positive")
    if R_grid is None:
        R_grid = sorted(set(DEFAULT_R_GRID) | {r * 10.0 ** k for k in range(1, 17)})
    ratios = []
    if hasattr(power, "log_g"):
        dh = math.log(power.h(D + delta)) - math.log(power.h(D))
        for R in R_grid:
            ratios.append((R, math.exp(power.log_g(R) - power.log_g(R + r) + dh)))
        tail = [(R, power.log_g(R) / R) for R in R_grid]
        subexp = tail[-1][1] < 1e-6
    else:
        for R in R_grid:
            num, den = power(R, D), power(R + r, D + delta)
            if num > 0 and den > 0:
                ratios.append((R, num / den))
        tail, subexp = [], None
    best = max((q for _, q in ratios), default=float("nan"))
    holds = bool(ratios) and best > 1.0 + margin and subexp is not False
    return GrowthEvidence(holds, best, ratios, subexp, tail)


# --- layout ---------------------------------------------------------------------------

@dataclass
class Layout:
    """Agent scaffolding per group, indexed by topological position."""

    epsilon: float
    segments: list[tuple[Point, Point]]
    agents: list[list[Point]]
    roles: list[list[str]]
    edges: frozenset[tuple[int, int]]

    @property
    def m(self) -> int:
        return len(self.segments)

    @property
    def sizes(self) -> list[int]:
        return [len(a) for a in self.agents]


def _line_intersection(p, u, q, w):
    """Parameters (s, t) with p + s*u == q + t*w."""
    det = u[0] * (-w[1]) - u[1] * (-w[0])
    dx, dy = q[0] - p[0], q[1] - p[1]
    s = (dx * (-w[1]) - dy * (-w[0])) / det
    t = (u[0] * dy - u[1] * dx) / det
    return s, t


def _crossings(centers, dirs):
    m = len(centers)
    out = {}
    for k in range(m):
        for l in range(k + 1, m):
            s, t = _line_intersection(centers[k], dirs[k], centers[l], dirs[l])
            p = (centers[k][0] + s * dirs[k][0], centers[k][1] + s * dirs[k][1])
            out[(k, l)] = (p, s, t)
    return out


def _separation(centers, dirs, crossings, edges, length):
    """Smallest distance from a used crossing point to any third segment."""
    best = math.inf
    half = length / 2
    for (k, l) in edges:
        p = crossings[(min(k, l), max(k, l))][0]
        for q in range(len(centers)):
            if q in (k, l):
                continue
            a = (centers[q][0] - half * dirs[q][0], centers[q][1] - half * dirs[q][1])
            b = (centers[q][0] + half * dirs[q][0], centers[q][1] + half * dirs[q][1])
            best = min(best, geometry.point_segment_distance(p, a, b))
    return best


def layout_segments(m: int, edges: Iterable[tuple[int, int]] = (), epsilon: float = 1e-3,
                    seed: int = 0, tries: int = 400) -> Layout:
    """Equal-length crossing segments with endpoint scaffolds and crossing agents.

    Segment k has direction k*pi/m and a seeded perpendicular offset; among
    ``tries`` offset draws the one keeping used crossings farthest from other
    segments is kept. ``edges`` are (earlier, later) pairs of topological
    positions; each gets one agent of the earlier group at the crossing.
    """
    edges = frozenset((int(a), int(b)) for a, b in edges)
    if m < 1:
        raise ConstructionError("layout", "need at least one segment")
    if any(not (0 <= a < b < m) for a, b in edges):
        raise ConstructionError("layout", "edges must go from an earlier to a later position")
    length = SEGMENT_LENGTH
    if not 0 < epsilon < 0.01 * length:
        raise ConstructionError("layout", f"epsilon {epsilon} out of range; try epsilon={1e-3 * length:g}")

    dirs = [(math.cos(k * math.pi / m), math.sin(k * math.pi / m)) for k in range(m)]
    normals = [(-s, c) for c, s in dirs]
    rng = np.random.default_rng(seed)
    rho = 0.15 * length * math.sin(math.pi / m) if m > 1 else 0.0

    best = None
    for _ in range(tries if m > 2 else 1):
        offs = rng.uniform(-rho, rho, size=m) if m > 1 else np.zeros(1)
        centers = [(o * nx, o * ny) for o, (nx, ny) in zip(offs.tolist(), normals)]
        cross = _crossings(centers, dirs)
        # crossings must sit in the middle 60% of both segments
        if any(abs(s) > 0.3 * length or abs(t) > 0.3 * length for _, s, t in cross.values()):
            continue
        sep = _separation(centers, dirs, cross, edges, length)
        if best is None or sep > best[0]:
            best = (sep, centers, cross)
    if best is None:
        raise ConstructionError("layout", "could not place crossings inside the segments")
    sep, centers, cross = best
    if sep < 3 * epsilon:
        raise ConstructionError(
            "layout", f"crossings only {sep:.3g} apart from other segments; try epsilon={sep / 4:.3g}")

    half = length / 2
    segments, agents, roles = [], [], []
    for k in range(m):
        c, u, nrm = centers[k], dirs[k], normals[k]
        ends = [(c[0] - half * u[0], c[1] - half * u[1]), (c[0] + half * u[0], c[1] + half * u[1])]
        segments.append((ends[0], ends[1]))
        pts = [(e[0] + sgn * epsilon * nrm[0], e[1] + sgn * epsilon * nrm[1])
               for e in ends for sgn in (-1.0, 1.0)]
        agents.append(pts)
        roles.append(["scaffold"] * len(pts))
    for a, b in sorted(edges):
        agents[a].append(cross[(a, b)][0])
        roles[a].append("crossing")
    return Layout(epsilon, segments, agents, roles, edges)


def _filler_point(seg: tuple[Point, Point], j: int, length: float) -> Point:
    """j-th interior filler on the centreline, alternating ends, 5-15% from the tip."""
    a, b = seg
    if j % 2:
        a, b = b, a
    frac = 0.05 + 0.1 * (1 - 1 / (2 + j // 2))
    return (a[0] + frac * (b[0] - a[0]), a[1] + frac * (b[1] - a[1]))


def pad_group_sizes(layout: Layout, min_size: int = 1) -> Layout:
    """Add interior fillers so sizes strictly decrease (and the last group has ``min_size``)."""
    m = layout.m
    target = [0] * m
    for k in reversed(range(m)):
        need = layout.sizes[k]
        if k == m - 1:
            need = max(need, min_size)
        else:
            need = max(need, target[k + 1] + 1)
        target[k] = need
    agents = [list(a) for a in layout.agents]
    roles = [list(r) for r in layout.roles]
    for k in range(m):
        for j in range(target[k] - len(agents[k])):
            agents[k].append(_filler_point(layout.segments[k], j, SEGMENT_LENGTH))
            roles[k].append("filler")
    return Layout(layout.epsilon, list(layout.segments), agents, roles, layout.edges)


def min_group_size(power, D: float) -> int:
    """Smallest group size at which no member prefers to stand alone (for r >= 1)."""
    if isinstance(power, Ratio):
        bound = 1.0 + D
        if power.g is GForm.POWER and power.alpha < 1:
            bound = bound ** (1.0 / power.alpha)
        return math.floor(bound) + 1
    if isinstance(power, AffineTradeoff):
        return math.floor(1.0 + power.b * D / power.a) + 1
    raise PreconditionError(f"unsupported power form {power!r}")


# --- resources -------------------------------------------------------------------------

@dataclass
class ResourceAssignment:
    resources: list[float]
    delta: float
    coverages: list[float]
    upward_refused: list[bool]
    downward_unattractive: dict[tuple[int, int], bool]
    downward_inside: dict[tuple[int, int], bool]
    growth: list[GrowthEvidence]

    @property
    def d_low(self) -> float:
        return min(self.coverages)

    @property
    def d_high(self) -> float:
        return max(self.coverages)


def _coverages(layout: Layout, kind: CoverageKind) -> tuple[list[float], float]:
    covs = [geometry.coverage(pts, kind) for pts in layout.agents]
    delta = math.inf
    for k in range(layout.m):
        for k2 in range(k + 1, layout.m):
            for p in layout.agents[k2]:
                delta = min(delta, geometry.coverage(layout.agents[k] + [p], kind) - covs[k])
    return covs, delta


def _check_spec(spec: UtilitySpec) -> None:
    if spec.coverage is not CoverageKind.HULL_PERIMETER:
        raise PreconditionError("realization needs hull_perimeter coverage (strictly increasing in the territory)")
    if not spec.hedonic:
        raise PreconditionError("realization needs a hedonic spec (no penalty term)")


def assign_resources(layout: Layout, spec: UtilitySpec) -> ResourceAssignment:
    """Per-agent resources r_1 > ... > r_m = 1 making weaker agents unacceptable upward."""
    _check_spec(spec)
    f = spec.power
    eps = spec.epsilon
    m = layout.m
    sizes = layout.sizes
    covs, delta = _coverages(layout, spec.coverage)
    if m == 1:
        return ResourceAssignment([1.0], math.inf, covs, [], {}, {}, [])
    if not delta > 0:
        raise ConstructionError("resources", f"delta = {delta:g} <= 0: a weaker group's agent lies in a stronger territory")
    d_lo, d_hi = min(covs), max(covs)

    def joins_refused(r, n, r_next):
        return f(r * n + r_next, d_lo + delta) < f(r * n, d_hi) - eps

    res = [0.0] * m
    res[m - 1] = 1.0
    growth = []
    for k in reversed(range(m - 1)):
        r_next, n = res[k + 1], sizes[k]
        growth.append(check_growth_condition(f, r_next, d_hi, delta))
        if isinstance(f, Ratio) and f.g is GForm.LINEAR and delta > d_hi - d_lo:
            r = max(r_next, r_next * (1 + d_hi) / (n * (delta - (d_hi - d_lo))))
        else:
            r = r_next
            while not joins_refused(r, n, r_next):
                r *= 2.0
                if r > _OVERFLOW:
                    raise ConstructionError("resources", "growth condition violated in practice")
        r = max(r, r_next) * RESOURCE_MARGIN
        while not joins_refused(r, n, r_next):
            r *= 2.0
            if r > _OVERFLOW:
                raise ConstructionError("resources", "growth condition violated in practice")
        res[k] = r
    growth.reverse()

    upward_refused = [f(res[k] * sizes[k] + res[k + 1], d_lo + delta) < f(res[k] * sizes[k], d_hi)
              for k in range(m - 1)]
    downward_unattractive = {}
    inside = {}
    for k in range(m):
        for k2 in range(k + 1, m):
            downward_unattractive[(k, k2)] = f(res[k2] * sizes[k2] + res[k], d_lo + delta) < f(res[k] * sizes[k], d_hi)
            inside[(k, k2)] = f(res[k2] * sizes[k2] + res[k], d_hi) < f(res[k] * sizes[k], d_lo)
    return ResourceAssignment(res, delta, covs, upward_refused, downward_unattractive, inside, growth)


# --- end to end ---------------------------------------------------------------------------

@dataclass
class RealizationCertificate:
    dag: DagInput
    instance: Instance
    partition: Partition
    node_of_group: list[int]
    resources: list[float]
    delta: float
    coverage: float
    epsilon: float
    sizes: list[int]
    upward_refused: list[bool]
    downward_unattractive: dict[tuple[int, int], bool]
    downward_inside: dict[tuple[int, int], bool]
    ae_verified: bool
    graph_matches: bool
    sizes_strictly_decreasing: bool
    growth_condition_holds: bool
    attempts: int = 1

    @property
    def checks(self) -> dict[str, bool]:
        return {
            "ae_verified": self.ae_verified,
            "graph_matches": self.graph_matches,
            "sizes_strictly_decreasing": self.sizes_strictly_decreasing,
            "growth_condition_holds": self.growth_condition_holds,
        }

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def summary(self) -> dict:
        return {
            "nodes": self.dag.node_count,
            "edges": sorted(map(list, self.dag.edges)),
            "node_of_group": self.node_of_group,
            "group_sizes": self.sizes,
            "resources_per_agent": self.resources,
            "delta": self.delta,
            "coverage": self.coverage,
            "epsilon": self.epsilon,
            "upward_refused": self.upward_refused,
            "downward_unattractive": all(self.downward_unattractive.values()),
            "checks": self.checks,
            "attempts": self.attempts,
        }


def _build_instance(layout: Layout, resources: list[float]) -> tuple[Instance, list[frozenset]]:
    locs, res, groups = [], [], []
    for k, pts in enumerate(layout.agents):
        start = len(locs)
        locs.extend(pts)
        res.extend([resources[k]] * len(pts))
        groups.append(frozenset(range(start, len(locs))))
    return Instance(tuple(locs), tuple(res)), groups


def realize_dag(dag: DagInput, spec: UtilitySpec, seed: int = 0, epsilon: float = 1e-3,
                retries: int = 10) -> RealizationCertificate:
    """Construct an instance and acceptance equilibrium whose encroachment graph is ``dag``.

    The equilibrium is verified exhaustively and the encroachment graph compared
    edge for edge; on a graph mismatch the scaffold width is halved and the
    layout rebuilt, up to ``retries`` times.
    """
    _check_spec(spec)
    order = dag.topological_order()
    pos = {v: k for k, v in enumerate(order)}
    pos_edges = frozenset((pos[u], pos[v]) for u, v in dag.edges)
    m = dag.node_count

    mismatch = None
    eps = epsilon
    for attempt in range(retries + 1):
        layout = layout_segments(m, pos_edges, eps, seed)
        base = geometry.coverage(layout.agents[0], spec.coverage)
        padded = pad_group_sizes(layout, min_group_size(spec.power, base))
        for k in range(m):
            before = geometry.coverage(layout.agents[k], spec.coverage)
            after = geometry.coverage(padded.agents[k], spec.coverage)
            if abs(after - before) > 1e-9:
                raise ConstructionError("pad", f"filler changed the territory of group {k}")
        assignment = assign_resources(padded, spec)
        instance, groups = _build_instance(padded, assignment.resources)
        game = game_for(instance, spec)
        partition = game.canonical(groups)
        if list(partition.groups) != groups:
            raise ConstructionError("verify", "group utilities are not strictly decreasing in topological order")

        graph = encroachment_graph(instance, partition)
        got = {(order[a], order[b]) for a, b in graph.edges}
        if got != set(dag.edges):
            mismatch = sorted(got ^ set(dag.edges))
            log.info("attempt %d: encroachment mismatch %s, halving epsilon", attempt, mismatch)
            eps /= 2
            continue

        verdict = check_ae(instance, partition, spec)
        sizes = padded.sizes
        cert = RealizationCertificate(
            dag=dag, instance=instance, partition=partition, node_of_group=order,
            resources=assignment.resources, delta=assignment.delta,
            coverage=assignment.d_high, epsilon=eps, sizes=sizes,
            upward_refused=assignment.upward_refused, downward_unattractive=assignment.downward_unattractive,
            downward_inside=assignment.downward_inside,
            ae_verified=verdict.stable,
            graph_matches=True,
            sizes_strictly_decreasing=all(a > b for a, b in zip(sizes, sizes[1:])),
            growth_condition_holds=all(g.holds for g in assignment.growth),
            attempts=attempt + 1,
        )
        if not verdict.stable:
            raise ConstructionError("verify", f"constructed partition is not an AE: {verdict}")
        if not cert.ok:
            failed = [name for name, ok in cert.checks.items() if not ok]
            raise ConstructionError("verify", f"certificate checks failed: {failed}")
        return cert
    raise ConstructionError("verify", f"encroachment graph differs from the DAG on edges {mismatch}")
