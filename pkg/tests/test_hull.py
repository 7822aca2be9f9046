import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial import ConvexHull

from stabgeom.hull import DegenerateInput, affine_hull, double_description, hull_facets


def _normalise(rows):
    out = set()
    for r in rows:
        r = np.array(r, dtype=float)
        out.add(tuple(np.round(r / np.linalg.norm(r[1:]), 9)))
    return out


def test_square_and_cube():
    square = [(0, 0), (1, 0), (0, 1), (1, 1)]
    assert len(hull_facets(square)) == 4
    cube = list(itertools.product((0, 1), repeat=3))
    fs = hull_facets(cube)
    assert len(fs) == 6
    assert all(min(f[0] + np.dot(f[1:], v) for v in cube) == 0 for f in fs)


def test_cross_polytope():
    pts = [tuple(s * (i == k) for i in range(4)) for k in range(4) for s in (1, -1)]
    fs = hull_facets(pts)
    assert len(fs) == 16
    assert all(abs(c) == 1 for f in fs for c in f)


def test_rational_points_and_interior_points():
    pts = [(Fraction(0), Fraction(0)), (Fraction(1, 3), Fraction(0)), (Fraction(0), Fraction(1, 2)),
           (Fraction(1, 12), Fraction(1, 12))]
    fs = hull_facets(pts)
    assert len(fs) == 3
    assert (0, 0, 1) in fs and (0, 1, 0) in fs


def test_lower_dimensional_input():
    # a triangle lying in the plane z = 1
    pts = [(0, 0, 1), (1, 0, 1), (0, 1, 1)]
    eqs = affine_hull(pts)
    assert len(eqs) == 1
    c = eqs[0]
    assert all(c[0] + np.dot(c[1:], p) == 0 for p in pts)
    assert len(hull_facets(pts)) == 3


def test_degenerate_cone_raises():
    with pytest.raises(DegenerateInput):
        double_description([(1, 0, 0), (1, 1, 0)])


def test_zero_sets_are_tight_sets():
    pts = list(itertools.product((0, 1), repeat=3))
    rows = [(1,) + p for p in pts]
    for ray, zeros in double_description(rows):
        tight = {i for i, r in enumerate(rows) if np.dot(ray, r) == 0}
        assert tight == {i for i in range(len(rows)) if zeros >> i & 1}


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 4))
def test_matches_qhull_on_random_points(seed, dim):
    g = np.random.default_rng(seed)
    pts = g.integers(-6, 7, size=(dim + 6, dim))
    if np.linalg.matrix_rank(pts[1:] - pts[0]) < dim:
        return
    ours = hull_facets([tuple(int(x) for x in p) for p in pts])
    qh = ConvexHull(pts)
    # qhull splits facets into simplices; merge by normalised equation
    ref = _normalise([np.r_[-e[-1], -e[:-1]] for e in qh.equations])
    assert _normalise(ours) == ref
