"""Dense two-phase revised simplex for small standard-form LPs.

    minimize c.x  subject to  A x = b,  x >= 0

Sizes here are at most a few hundred rows by a few thousand columns, so the
basis inverse is kept as a dense matrix with rank-one updates and periodic
refactorisation.  Pricing is Dantzig's rule; after a run of degenerate pivots
it falls back to Bland's rule, which cannot cycle.
"""
import enum
from dataclasses import dataclass

import numpy as np


class LPStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration-limit"


@dataclass
class LPResult:
    status: LPStatus
    x: np.ndarray
    objective: float
    dual: np.ndarray
    iterations: int
    basis: np.ndarray


class _Tableau:
    def __init__(self, A, b, basis, tol):
        self.A = A
        self.b = b
        self.basis = np.array(basis)
        self.tol = tol
        self.refactor()

    def refactor(self):
        Bm = self.A[:, self.basis]
        self.Binv = np.linalg.inv(Bm)
        self.xB = self.Binv @ self.b
        self.updates = 0

    def pivot(self, row, col, u):
        piv = u[row]
        self.Binv[row] /= piv
        others = np.arange(len(u)) != row
        self.Binv[others] -= np.outer(u[others], self.Binv[row])
        theta = self.xB[row] / piv
        self.xB[others] -= theta * u[others]
        self.xB[row] = theta
        self.basis[row] = col
        self.updates += 1
        if self.updates >= 50:
            self.refactor()


def _run(tab, c, allowed, max_iter, bland_after=30):
    """Iterate until optimal for cost ``c`` over columns flagged in ``allowed``."""
    tol = tab.tol
    it = 0
    degenerate = 0
    while it < max_iter:
        it += 1
        y = c[tab.basis] @ tab.Binv
        red = c - y @ tab.A
        red[~allowed] = np.inf
        red[tab.basis] = np.inf
        if degenerate >= bland_after:
            cand = np.flatnonzero(red < -tol)
            if cand.size == 0:
                return LPStatus.OPTIMAL, it, y
            q = int(cand[0])
        else:
            q = int(np.argmin(red))
            if red[q] >= -tol:
                return LPStatus.OPTIMAL, it, y
        u = tab.Binv @ tab.A[:, q]
        pos = u > tol
        if not pos.any():
            return LPStatus.UNBOUNDED, it, y
        ratios = np.full(u.shape, np.inf)
        ratios[pos] = np.maximum(tab.xB[pos], 0) / u[pos]
        rmin = ratios.min()
        ties = np.flatnonzero(ratios <= rmin + tol * max(1.0, rmin))
        # Bland: among ties leave the smallest basic variable index
        row = int(ties[np.argmin(tab.basis[ties])])
        degenerate = degenerate + 1 if rmin <= tol else 0
        tab.pivot(row, q, u)
    return LPStatus.ITERATION_LIMIT, it, c[tab.basis] @ tab.Binv


def solve_lp(c, A, b, tol=1e-9, max_iter=50000):
    """Solve ``min c.x, A x = b, x >= 0``.

    Returns an :class:`LPResult`; ``dual`` holds the equality multipliers y
    with ``c - A^T y >= 0`` at optimality.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    A = A * sign[:, None]
    b = b * sign
    scale = max(1.0, np.abs(A).max())
    Aa = np.hstack([A, np.eye(m)])
    tab = _Tableau(Aa, b, np.arange(n, n + m), tol)

    allowed = np.ones(n + m, dtype=bool)
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    status, it1, _ = _run(tab, c1, allowed, max_iter)
    tab.refactor()
    infeas = tab.xB[tab.basis >= n].sum() if (tab.basis >= n).any() else 0.0
    if status != LPStatus.OPTIMAL or infeas > 1e-7 * scale * max(1.0, np.abs(b).max()):
        st = LPStatus.INFEASIBLE if status == LPStatus.OPTIMAL else status
        return LPResult(st, np.zeros(n), np.inf, np.zeros(m), it1, tab.basis.copy())

    # drive zero-level artificials out of the basis where possible
    allowed[n:] = False
    for row in np.flatnonzero(tab.basis >= n):
        r = tab.Binv[row] @ A
        cand = np.flatnonzero(np.abs(r) > 1e-9)
        cand = cand[~np.isin(cand, tab.basis)]
        if cand.size:
            q = int(cand[np.argmax(np.abs(r[cand]))])
            tab.pivot(row, q, tab.Binv @ Aa[:, q])
    tab.refactor()

    c2 = np.concatenate([c, np.zeros(m)])
    status, it2, y = _run(tab, c2, allowed, max_iter - it1)
    tab.refactor()
    x = np.zeros(n + m)
    x[tab.basis] = np.maximum(tab.xB, 0)
    y = c2[tab.basis] @ tab.Binv
    return LPResult(status, x[:n], float(c @ x[:n]), y * sign, it1 + it2, tab.basis.copy())
