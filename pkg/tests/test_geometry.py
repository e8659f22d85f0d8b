import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from groupform import geometry
from groupform.errors import GeometryError
from groupform.geometry import CoverageKind

SQUARE = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]


def test_hull_on_a_line():
    hull = geometry.convex_hull([(0.0,), (0.6,), (1.2,)])
    assert set(hull.vertices) == {(0.0,), (1.2,)}
    assert hull.affine_rank == 1


def test_hull_single_point():
    hull = geometry.convex_hull([(5.0, 5.0)])
    assert hull.vertices == ((5.0, 5.0),)
    assert hull.affine_rank == 0


def test_hull_drops_interior_point():
    hull = geometry.convex_hull(SQUARE + [(0.5, 0.5)])
    assert set(hull.vertices) == set(SQUARE)
    assert hull.affine_rank == 2


def test_hull_drops_collinear_boundary_points():
    hull = geometry.convex_hull(SQUARE + [(0.5, 0.0), (1.0, 0.25)])
    assert set(hull.vertices) == set(SQUARE)


def test_hull_is_counterclockwise():
    v = geometry.convex_hull(SQUARE).vertices
    area2 = sum(v[i][0] * v[(i + 1) % 4][1] - v[(i + 1) % 4][0] * v[i][1] for i in range(4))
    assert area2 > 0


def test_collinear_points_in_plane_give_segment():
    hull = geometry.convex_hull([(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)])
    assert hull.affine_rank == 1
    assert set(hull.vertices) == {(0.0, 0.0), (2.0, 2.0)}


@pytest.mark.parametrize("pts", [[], [(0.0, 1.0), (1.0,)], [(math.nan, 0.0)]])
def test_bad_point_sets(pts):
    with pytest.raises(GeometryError):
        geometry.convex_hull(pts)


def test_diameter_examples():
    assert geometry.diameter([(0.0,), (0.6,), (1.2,)]) == pytest.approx(1.2)
    assert geometry.diameter([(3.0, 3.0)]) == 0.0
    assert geometry.diameter([(0.0, 0.0), (3.0, 4.0)]) == 5.0
    assert geometry.diameter([(0, 0, 0), (1, 2, 2)]) == 3.0


def test_measures_of_unit_square():
    hull = geometry.convex_hull(SQUARE)
    assert geometry.hull_measure(hull, CoverageKind.HULL_VOLUME) == 1.0
    assert geometry.hull_measure(hull, CoverageKind.HULL_PERIMETER) == 4.0
    assert geometry.hull_measure(hull, CoverageKind.DIAMETER) == pytest.approx(math.sqrt(2))


@pytest.mark.parametrize("kind", list(CoverageKind))
def test_rank_zero_measure_is_zero(kind):
    assert geometry.hull_measure(geometry.convex_hull([(2.0, 3.0), (2.0, 3.0)]), kind) == 0.0


def test_degenerate_measures():
    seg = geometry.convex_hull([(0.0, 0.0), (3.0, 4.0)])
    assert geometry.hull_measure(seg, CoverageKind.HULL_VOLUME) == 0.0
    assert geometry.hull_measure(seg, CoverageKind.HULL_PERIMETER) == 10.0
    line = geometry.convex_hull([(1.0,), (4.0,)])
    assert geometry.hull_measure(line, CoverageKind.HULL_VOLUME) == 3.0
    assert geometry.hull_measure(line, CoverageKind.HULL_PERIMETER) == 6.0


def test_hull_measures_unsupported_above_two_dimensions():
    hull = geometry.convex_hull([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])
    with pytest.raises(GeometryError, match="unsupported in dimension 3"):
        geometry.hull_measure(hull, CoverageKind.HULL_VOLUME)
    assert geometry.hull_measure(hull, CoverageKind.DIAMETER) == pytest.approx(math.sqrt(2))


def test_containment_examples():
    seg = geometry.convex_hull([(0.0,), (1.2,)])
    assert geometry.contains(seg, (0.6,))
    assert not geometry.contains(seg, (1.3,), tol=1e-9)
    square = geometry.convex_hull(SQUARE)
    assert geometry.contains(square, (0.5, 0.5))
    assert geometry.contains(square, (1.0, 0.5))
    assert not geometry.contains(square, (1.0 + 1e-6, 0.5))
    assert geometry.contains(square, (1.0 + 1e-10, 0.5))


def test_containment_dimension_mismatch():
    with pytest.raises(GeometryError):
        geometry.contains(geometry.convex_hull(SQUARE), (0.5,))


def test_containment_in_three_dimensions():
    tet = geometry.convex_hull([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (0.1, 0.1, 0.1)])
    assert len(tet.vertices) == 4
    assert geometry.contains(tet, (0.2, 0.2, 0.2))
    assert not geometry.contains(tet, (0.5, 0.5, 0.5))
    flat = geometry.convex_hull([(0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1)])
    assert flat.affine_rank == 2
    assert geometry.contains(flat, (0.5, 0.5, 1.0))
    assert not geometry.contains(flat, (0.5, 0.5, 1.1))


def test_hulls_intersect():
    a = geometry.convex_hull(SQUARE)
    b = geometry.convex_hull([(0.5, -1.0), (0.6, 3.0)])  # crosses without a vertex inside
    c = geometry.convex_hull([(5.0, 5.0), (6.0, 5.0), (5.0, 6.0)])
    assert geometry.hulls_intersect(a, b)
    assert not geometry.hulls_intersect(a, c)
    assert geometry.hulls_intersect(geometry.convex_hull([(0.0,), (2.0,)]),
                                    geometry.convex_hull([(2.0,), (3.0,)]))
    cube = geometry.convex_hull([(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)])
    far = geometry.convex_hull([(3, 3, 3), (4, 3, 3), (3, 4, 3)])
    stick = geometry.convex_hull([(0.5, 0.5, -1), (0.5, 0.5, 2)])
    assert not geometry.hulls_intersect(cube, far)
    assert geometry.hulls_intersect(cube, stick)


def test_point_segment_distance():
    assert geometry.point_segment_distance((0.0, 1.0), (-1.0, 0.0), (1.0, 0.0)) == 1.0
    assert geometry.point_segment_distance((3.0, 4.0), (0.0, 0.0), (0.0, 0.0)) == 5.0
    assert geometry.point_segment_distance((2.0, 1.0), (-1.0, 0.0), (1.0, 0.0)) == pytest.approx(math.sqrt(2))


pts2d = st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=3, max_size=25)


@settings(max_examples=300, deadline=None)
@given(pts2d)
def test_planar_hull_matches_qhull(raw):
    pts = [(float(x), float(y)) for x, y in raw]
    hull = geometry.convex_hull(pts)
    arr = np.unique(np.asarray(pts), axis=0)
    try:
        ref = ConvexHull(arr)
    except Exception:
        assert hull.affine_rank < 2
        return
    assert hull.affine_rank == 2
    # qhull may keep collinear boundary points; compare area and perimeter instead
    assert geometry.hull_measure(hull, CoverageKind.HULL_VOLUME) == pytest.approx(ref.volume)
    assert geometry.hull_measure(hull, CoverageKind.HULL_PERIMETER) == pytest.approx(ref.area)
    assert set(hull.vertices) <= {tuple(p) for p in arr[ref.vertices]}
