"""Slow, independent reference implementations used as test oracles.

Nothing here imports the package under test: utilities, stability checks and
partition enumeration are rebuilt from the definitions with plain loops.
"""
from __future__ import annotations

import itertools
import math


def diameter(points):
    return max((math.dist(p, q) for p, q in itertools.combinations(points, 2)), default=0.0)


def ratio_linear(R, D):
    return R / (1.0 + D)


def ratio_power(alpha):
    return lambda R, D: R ** alpha / (1.0 + D)


def group_power(locs, res, members, f=ratio_linear, cover=diameter):
    members = sorted(members)
    return f(math.fsum(res[i] for i in members), cover([locs[i] for i in members]))


def utilities(locs, res, groups, f=ratio_linear, cover=diameter, penalty=None, eps=1e-9):
    """Per-group utility: power minus penalties of every strictly stronger group."""
    powers = [group_power(locs, res, g, f, cover) for g in groups]
    if penalty is None:
        return powers
    pens = [penalty(math.fsum(res[i] for i in g), p) for g, p in zip(groups, powers)]
    return [p - math.fsum(h for q, h in zip(powers, pens) if q > p + eps) for p in powers]


def blocking_deviations(locs, res, groups, max_size=None, f=ratio_linear, cover=diameter,
                        penalty=None, eps=1e-9):
    """Every (movers, source, target) that strictly improves the movers and is accepted.

    ``target`` is a group index or None for a fresh group.
    """
    groups = [frozenset(g) for g in groups]
    base = utilities(locs, res, groups, f, cover, penalty, eps)
    out = []
    for k, g in enumerate(groups):
        cap = len(g) if max_size is None else min(max_size, len(g))
        for size in range(1, cap + 1):
            for S in itertools.combinations(sorted(g), size):
                S = frozenset(S)
                for t in list(range(len(groups))) + [None]:
                    if t == k or (t is None and S == g):
                        continue
                    new = [h for i, h in enumerate(groups) if i not in (k, t)]
                    if g - S:
                        new.append(g - S)
                    joined = S if t is None else groups[t] | S
                    new.append(joined)
                    u = utilities(locs, res, new, f, cover, penalty, eps)[-1]
                    if not u > base[k] + eps:
                        continue
                    if t is not None and not u > base[t] - eps:
                        continue
                    out.append((S, k, t))
    return out


def is_stable(locs, res, groups, max_size=None, **kw):
    return not blocking_deviations(locs, res, groups, max_size, **kw)


def all_partitions(items):
    """Set partitions by recursion on the first element (independent of RGS order)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in all_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def partition_key(groups):
    return tuple(sorted(tuple(sorted(g)) for g in groups))


def max_subset_utility(locs, res, f=ratio_linear, cover=diameter):
    """Maximum group power over all 2^n - 1 nonempty subsets, by bitmask."""
    n = len(res)
    best = -math.inf
    for mask in range(1, 1 << n):
        members = [i for i in range(n) if mask >> i & 1]
        best = max(best, group_power(locs, res, members, f, cover))
    return best


def potential(locs, res, groups, **kw):
    u = utilities(locs, res, groups, **kw)
    return sorted((u[k] for k, g in enumerate(groups) for _ in g), reverse=True)


def lex_succeeds(a, b, eps=1e-9):
    for x, y in zip(a, b):
        if x > y + eps:
            return True
        if y > x + eps:
            return False
    return False


def point_in_polygon(p, verts, tol=1e-9):
    """Closed containment for a convex polygon given counter-clockwise."""
    n = len(verts)
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        ex, ey = b[0] - a[0], b[1] - a[1]
        cross = ex * (p[1] - a[1]) - ey * (p[0] - a[0])
        if cross < -tol * max(1.0, math.hypot(ex, ey)):
            return False
    return True
