import numpy as np
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from stabgeom.simplex import LPStatus, solve_lp


def test_small_optimum():
    # min -x - y, x + y + s = 1
    res = solve_lp([-1, -2, 0], [[1, 1, 1]], [1])
    assert res.status == LPStatus.OPTIMAL
    assert np.isclose(res.objective, -2)
    assert np.allclose(res.x, [0, 1, 0])


def test_infeasible_and_unbounded():
    assert solve_lp([1, 1], [[1, 1]], [-1]).status == LPStatus.INFEASIBLE
    assert solve_lp([-1, 0], [[1, -1]], [0]).status == LPStatus.UNBOUNDED


def test_redundant_rows():
    A = [[1, 1, 0], [2, 2, 0], [0, 1, 1]]
    res = solve_lp([1, 2, 3], A, [1, 2, 1])
    assert res.status == LPStatus.OPTIMAL
    assert np.isclose(res.objective, linprog([1, 2, 3], A_eq=A, b_eq=[1, 2, 1]).fun)


def test_degenerate_problem_terminates():
    # many ties in both the ratio test and the pricing step
    A = np.array([[1, 1, 1, 0, 0], [1, 1, 0, 1, 0], [1, 1, 0, 0, 1]], dtype=float)
    res = solve_lp([-1, -1, 0, 0, 0], A, [0, 0, 0])
    assert res.status == LPStatus.OPTIMAL and np.isclose(res.objective, 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 8), st.integers(1, 12))
def test_matches_highs(seed, m, extra):
    g = np.random.default_rng(seed)
    n = m + extra
    A = g.integers(-3, 4, size=(m, n)).astype(float)
    x0 = g.uniform(0, 1, n) * (g.uniform(size=n) < 0.6)
    b = A @ x0
    c = g.integers(0, 5, size=n).astype(float)
    res = solve_lp(c, A, b)
    ref = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    assert res.status == LPStatus.OPTIMAL
    assert np.isclose(res.objective, ref.fun, atol=1e-7)
    assert np.abs(A @ res.x - b).max() < 1e-8
    # dual feasibility and strong duality
    assert (c - A.T @ res.dual).min() > -1e-7
    assert np.isclose(b @ res.dual, res.objective, atol=1e-7)
