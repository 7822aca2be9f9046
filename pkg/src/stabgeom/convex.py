"""Certified convex optimisation over the stabilizer polytope.

``ntd_minimize`` computes the trace distance from a state to the convex hull of
a finite set of pure states.  It uses the minimax identity

    min_p 1/2 ||rho - sigma(p)||_1 = max_{0 <= E <= I} Tr(E rho) - max_S <S|E|S>

and follows the log-barrier central path of the right-hand side, which has
only d^2 + 1 real variables.  Barrier multipliers of the vertex constraints
are the mixture weights p.  Every answer carries a certificate: the primal
value is recomputed exactly from p, the dual value exactly from E, and their
difference bounds the error.

``rom_minimize`` solves the robustness-of-magic linear program with the dense
simplex method in :mod:`stabgeom.simplex`.  ``depolarizing_gauge`` (how far
one can go from I/d towards a state before leaving the polytope) is a
throughput-bound LP solved many times per experiment, so it uses HiGHS with
column generation instead.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog

from .cliffstab import StabilizerVertexSet
from .qmat import as_density, dag, trace_norm
from .simplex import solve_lp, LPStatus

NTD_TOL = 1e-6
LP_TOL = 1e-8
PRUNE = 1e-12
_CENTRE_TOL = 1e-10
_TAU_STEP = 8.0
_ACTIVE0 = 2


class SolverError(RuntimeError):
    pass


class _BoundaryHit(ArithmeticError):
    """The barrier iterate reached a vertex constraint exactly."""


@dataclass(frozen=True)
class SolverCertificate:
    primal: float
    dual: float
    iterations: int
    status: str

    @property
    def gap(self):
        return self.primal - self.dual


@dataclass(frozen=True)
class NTDResult:
    weights: np.ndarray
    value: float
    certificate: SolverCertificate

    def __iter__(self):
        return iter((self.weights, self.value, self.certificate))


@dataclass(frozen=True)
class RoMResult:
    weights: np.ndarray
    value: float
    certificate: SolverCertificate
    residual: float

    def __iter__(self):
        return iter((self.weights, self.value, self.certificate))


@lru_cache(maxsize=None)
def hermitian_basis(d):
    """Hilbert-Schmidt orthonormal basis of d x d Hermitian matrices, shape (d*d, d, d)."""
    out = []
    for j in range(d):
        m = np.zeros((d, d), dtype=complex)
        m[j, j] = 1
        out.append(m)
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1 / np.sqrt(2)
            out.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1j / np.sqrt(2)
            m[k, j] = 1j / np.sqrt(2)
            out.append(m)
    B = np.array(out)
    B.setflags(write=False)
    return B


class _VertexData:
    """Per-vertex-set arrays reused by every solve."""

    def __init__(self, vectors):
        self.vectors = np.asarray(vectors)
        self.m, self.d = self.vectors.shape
        self.B = hermitian_basis(self.d)
        # <S|B_k|S> for all vertices S and basis elements k
        self.M = _vector_coords(self.vectors)
        self.proj = np.einsum("si,sj->sij", self.vectors, self.vectors.conj())


_CACHE = {}


def _vertex_data(vs):
    vectors = vs.vertices if isinstance(vs, StabilizerVertexSet) else np.asarray(vs)
    key = id(vectors)
    hit = _CACHE.get(key)
    if hit is None or hit[0] is not vectors:
        hit = (vectors, _VertexData(vectors))
        _CACHE[key] = hit
    return hit[1]


def mixture(weights, vs):
    data = _vertex_data(vs)
    return np.einsum("s,sij->ij", weights, data.proj)


def _from_coords(e, B):
    return np.einsum("k,kij->ij", e, B)


def _certificate(rho, data, p, e, iterations, tol):
    p = np.where(p > PRUNE, p, 0.0)
    p = p / p.sum()
    sigma = np.einsum("s,sij->ij", p, data.proj)
    primal = 0.5 * trace_norm(rho - sigma)
    E = _from_coords(e, data.B)
    w, v = np.linalg.eigh((E + dag(E)) / 2)
    E = (v * np.clip(w, 0, 1)) @ dag(v)  # project into [0, I] so the bound stays valid
    vals = np.real(np.einsum("si,ij,sj->s", data.vectors.conj(), E, data.vectors))
    dual = float(np.real(np.trace(E @ rho)) - vals.max())
    status = "converged" if primal - dual <= tol else "running"
    return p, primal, max(dual, 0.0), status


def ntd_minimize(rho, vs, tol=NTD_TOL, max_iter=3000):
    """Minimum trace distance from ``rho`` to the convex hull of the vertices.

    Returns an :class:`NTDResult` (iterable as ``weights, value, certificate``)
    whose ``value`` equals 1/2 ||rho - sum_S p_S |S><S| ||_1 for the returned
    weights and whose certificate satisfies dual <= optimum <= primal.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rho = as_density(rho)
    data = _vertex_data(vs)
    if rho.shape[0] != data.d:
        raise ValueError(f"state dimension {rho.shape[0]} does not match vertices ({data.d})")

    # a vertex is its own nearest point
    overlaps = np.real(np.einsum("si,ij,sj->s", data.vectors.conj(), rho, data.vectors))
    top = int(np.argmax(overlaps))
    if overlaps[top] >= 1 - 1e-14:
        p = np.zeros(data.m)
        p[top] = 1.0
        primal = 0.5 * trace_norm(rho - data.proj[top])
        return NTDResult(p, primal, SolverCertificate(primal, 0.0, 0, "converged"))

    # cutting planes: solve on a subset of vertices, certify against all of
    # them, and add the vertices that the current dual operator E favours
    k = min(data.m, int(_ACTIVE0 * data.d * data.d))
    active = np.sort(np.argsort(-overlaps, kind="stable")[:k])
    iters = 0
    best = None
    while True:
        sub_tol = tol / 4 if active.size < data.m else tol
        try:
            q, E, used = _barrier_solve(rho, data.vectors[active], sub_tol, max_iter - iters)
        except _BoundaryHit:
            # only happens for states on or inside the polytope; settle it exactly
            return _inside_result(rho, data, tol, iters)
        iters += used
        p = np.zeros(data.m)
        p[active] = q
        e = _matrix_coords(E)
        p_cert, primal, dual, _ = _certificate(rho, data, p, e, iters, tol)
        if best is None or primal - dual < best[1] - best[2]:
            best = (p_cert, primal, dual)
        if best[1] - best[2] <= tol or active.size == data.m or iters >= max_iter:
            break
        vals = np.real(np.einsum("si,ij,sj->s", data.vectors.conj(), E, data.vectors))
        inside = np.zeros(data.m, dtype=bool)
        inside[active] = True
        cut = vals[active].max()
        order = np.argsort(-vals, kind="stable")
        new = [i for i in order[: 4 * k] if not inside[i] and vals[i] > cut - 1e-3]
        if not new:
            new = [i for i in order if not inside[i]][:k]
        active = np.sort(np.concatenate([active, new[: max(k // 2, 8)]]))
    p, primal, dual = best
    status = "converged" if primal - dual <= tol else "budget-exhausted"
    return NTDResult(p, primal, SolverCertificate(primal, dual, iters, status))


def _inside_result(rho, data, tol, iters):
    """Zero-distance answer certified by an exact convex decomposition."""
    A = data.M.T
    b = np.real(np.einsum("kij,ji->k", data.B, rho))
    res = linprog(np.zeros(data.m), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if res.status != 0:
        raise SolverError("barrier reached the boundary but the state is not in the polytope")
    p, primal, _, _ = _certificate(rho, data, res.x, np.zeros(data.d * data.d), iters, tol)
    status = "converged" if primal <= tol else "budget-exhausted"
    return NTDResult(p, primal, SolverCertificate(primal, 0.0, iters, status))


def _barrier_solve(rho, vectors, tol, max_iter):
    """Log-barrier path following for the vertex set ``vectors``.

    Returns (weights, E, iterations) for the best certificate found.
    """
    m, d = vectors.shape
    data = _SubData(vectors)
    nu = m + 2 * d
    E = np.eye(d) / 2
    t = 1.5
    tau = 1.0
    iters = 0
    best = None
    while iters < max_iter:
        centred = False
        for _ in range(60):
            iters += 1
            step = _newton_step(E, t, tau, rho, data)
            if step is None:
                break
            dE, dt, dec, lam, lin = step
            if dec / 2 <= _CENTRE_TOL:
                centred = True
                break
            alpha = _line_search(lam, lin)
            if alpha <= 0:
                break
            E = E + alpha * dE
            E = (E + dag(E)) / 2
            t = t + alpha * dt
        s = t - np.real(np.einsum("si,ij,sj->s", vectors.conj(), E, vectors))
        if not s.min() > 0:
            raise _BoundaryHit
        p = 1.0 / (tau * s)
        _, primal, dual, _ = _certificate(rho, data, p, _matrix_coords(E), iters, tol)
        if best is None or primal - dual < best[0]:
            best = (primal - dual, p / p.sum(), E)
        if best[0] <= tol or nu / tau < 1e-13:
            break
        if centred or iters < 5:
            tau *= _TAU_STEP
    return best[1], best[2], iters


class _SubData:
    def __init__(self, vectors):
        self.vectors = vectors
        self.m, self.d = vectors.shape
        self.B = hermitian_basis(self.d)
        self.proj = np.einsum("si,sj->sij", vectors, vectors.conj())


def _newton_step(E, t, tau, rho, data):
    """Newton direction of the barrier, computed in the eigenbasis of E.

    In that basis the two log-det Hessians are diagonal, so a Jacobi scaling
    removes the ill-conditioning that appears as E approaches the boundary.
    Returns (dE, dt, decrement, lam, lin) where along E + a dE the barrier is
    a*lin - sum log(1 + a*lam) up to a constant.
    """
    d = data.d
    w, V = np.linalg.eigh(E)
    if w[0] <= 0 or w[-1] >= 1:
        return None
    psi = data.vectors @ V.conj()  # rows are (V^dag S)^T
    Mr = _vector_coords(psi)
    rr = _matrix_coords(dag(V) @ rho @ V)
    s = t - np.real(np.einsum("si,i,si->s", psi.conj(), w, psi))
    if s.min() <= 0:
        return None
    u = 1 - w
    # per-basis-element weights of Tr(X b_k X b_k) for diagonal X
    jj, kk = _basis_pairs(d)
    h = 1 / (w[jj] * w[kk]) + 1 / (u[jj] * u[kk])
    diag = jj == kk
    g_logdet = np.zeros(len(jj))
    g_logdet[diag] = -1 / w[jj[diag]] + 1 / u[jj[diag]]
    inv_s = 1.0 / s
    ge = -tau * rr + Mr.T @ inv_s + g_logdet
    gt = tau - inv_s.sum()
    grad = np.append(ge, gt)
    A = np.hstack([-Mr, np.ones((len(s), 1))]) * inv_s[:, None]
    H = A.T @ A
    H[np.arange(len(h)), np.arange(len(h))] += h
    sc = 1 / np.sqrt(np.diag(H))
    Hs = H * sc[:, None] * sc[None, :]
    try:
        y = -np.linalg.solve(Hs, grad * sc)
    except np.linalg.LinAlgError:
        y = -np.linalg.lstsq(Hs, grad * sc, rcond=None)[0]
    step = y * sc
    dec = float(-grad @ step)
    de, dt = step[:-1], step[-1]
    dEr = _coords_matrix(de, d)
    sw, su = 1 / np.sqrt(w), 1 / np.sqrt(u)
    mu = np.linalg.eigvalsh(dEr * sw[:, None] * sw[None, :])
    nu = np.linalg.eigvalsh(-dEr * su[:, None] * su[None, :])
    q = (Mr @ de - dt) * inv_s
    lam = np.concatenate([-q, mu, nu])
    lin = tau * (dt - rr @ de)
    return V @ dEr @ dag(V), dt, dec, lam, lin


@lru_cache(maxsize=None)
def _basis_pairs(d):
    """Row/column index pair (j, k) behind each element of hermitian_basis(d)."""
    jj = list(range(d))
    kk = list(range(d))
    for j in range(d):
        for k in range(j + 1, d):
            jj += [j, j]
            kk += [k, k]
    return np.array(jj), np.array(kk)


@lru_cache(maxsize=None)
def _upper(d):
    return np.triu_indices(d, 1)


def _vector_coords(psi):
    """hermitian_basis coordinates of |psi><psi| for each row of ``psi``."""
    d = psi.shape[1]
    ju, ku = _upper(d)
    c = psi.conj()[:, ju] * psi[:, ku] * np.sqrt(2)
    out = np.empty((psi.shape[0], d * d))
    out[:, :d] = np.abs(psi) ** 2
    out[:, d::2] = c.real
    out[:, d + 1::2] = c.imag
    return out


def _matrix_coords(a):
    """hermitian_basis coordinates of a Hermitian matrix."""
    d = a.shape[0]
    ju, ku = _upper(d)
    c = a[ku, ju] * np.sqrt(2)
    out = np.empty(d * d)
    out[:d] = np.real(np.diag(a))
    out[d::2] = c.real
    out[d + 1::2] = c.imag
    return out


def _coords_matrix(x, d):
    """Inverse of ``_matrix_coords``."""
    ju, ku = _upper(d)
    a = np.zeros((d, d), dtype=complex)
    a[np.arange(d), np.arange(d)] = x[:d]
    z = (x[d::2] - 1j * x[d + 1::2]) / np.sqrt(2)
    a[ju, ku] = z
    a[ku, ju] = z.conj()
    return a


def _line_search(lam, lin):
    """Exact minimiser over a >= 0 of a*lin - sum log(1 + a*lam).

    Working with the fixed ratios lam avoids the cancellation that plagues
    direct barrier evaluations once tau is large.
    """
    neg = lam < 0
    amax = np.min(-1.0 / lam[neg]) if neg.any() else np.inf
    hi = min(0.99 * amax, 4.0)

    def dphi(a):
        return lin - np.sum(lam / (1 + a * lam))

    if dphi(hi) <= 0:
        return hi
    lo = 0.0
    a = min(1.0, hi)
    for _ in range(60):
        g = dphi(a)
        if g > 0:
            hi = a
        else:
            lo = a
        if abs(g) <= 1e-12 * (1 + abs(lin)) or hi - lo <= 1e-14 * max(1.0, hi):
            break
        h = np.sum((lam / (1 + a * lam)) ** 2)
        a_new = a - g / h if h > 0 else 0.5 * (lo + hi)
        a = a_new if lo < a_new < hi else 0.5 * (lo + hi)
    return a


def polytope_membership(rho, vs, tol=1e-5, method="lp"):
    """True when ``rho`` lies in the convex hull (NTD <= tol).

    ``method="lp"`` decides membership by an exact feasibility LP on the
    Pauli/Weyl coordinates and is much cheaper than ``"ntd"``, which runs the
    certified trace-distance solver.
    """
    if method == "ntd":
        return ntd_minimize(rho, vs, tol=min(tol, NTD_TOL) / 2).value <= tol
    rho = as_density(rho)
    A, b = _affine_system(rho, vs)
    res = solve_lp(np.zeros(A.shape[1]), A, b)
    return res.status == LPStatus.OPTIMAL


def _affine_system(rho, vs):
    data = _vertex_data(vs)
    # rows: Hermitian-basis coordinates (the identity direction enforces sum = 1)
    A = data.M.T.copy()
    b = np.real(np.einsum("kij,ji->k", data.B, rho))
    return A, b


def rom_minimize(rho, vs, tol=LP_TOL):
    """Robustness of magic: min ||x||_1 subject to sum_S x_S |S><S| = rho."""
    rho = as_density(rho)
    data = _vertex_data(vs)
    if rho.shape[0] != data.d:
        raise ValueError("state dimension does not match vertices")
    A, b = _affine_system(rho, vs)
    m = data.m
    Asplit = np.hstack([A, -A])
    c = np.ones(2 * m)
    res = solve_lp(c, Asplit, b, tol=tol)
    if res.status != LPStatus.OPTIMAL:
        raise SolverError(f"RoM LP failed with status {res.status}")
    x = res.x[:m] - res.x[m:]
    value = float(np.abs(x).sum())
    # rescale the dual so |a_j . y| <= 1 holds exactly: a valid lower bound
    y = res.dual
    scale = max(1.0, float(np.abs(A.T @ y).max()))
    dual = float(b @ y) / scale
    residual = float(np.abs(A @ x - b).max())
    status = "converged" if value - dual <= max(tol, 1e-12) * max(1.0, value) else "gap"
    return RoMResult(x, value, SolverCertificate(value, dual, res.iterations, status), residual)


_GAUGE_CAP = 1e3


def depolarizing_gauge(rho, vs, k=128):
    """Largest t with I/d + t (rho - I/d) in the polytope (capped at 1e3).

    The global critical depolarization of rho is max(0, 1 - t).  The LP
    max t s.t. sum_S x_S |S><S| = I/d + t (rho - I/d), x >= 0 starts from the
    computational basis (which contains I/d) plus the k vertices with the
    largest overlap along rho - I/d, and adds vertices with negative reduced
    cost until none are left, so the optimum is that of the full LP.
    """
    rho = as_density(rho)
    data = _vertex_data(vs)
    d = data.d
    if rho.shape[0] != d:
        raise ValueError("state dimension does not match vertices")
    A = data.M.T
    b0 = _affine_system(np.eye(d) / d, vs)[1]
    direction = _affine_system(rho, vs)[1] - b0
    if np.abs(direction).max() < 1e-14:
        return _GAUGE_CAP
    basis = np.flatnonzero((np.abs(data.vectors) > 1e-12).sum(axis=1) == 1)
    ov = A.T @ direction
    active = list(dict.fromkeys(list(basis) + list(np.argsort(-ov, kind="stable")[:k])))
    while True:
        Aa = np.hstack([A[:, active], -direction[:, None]])
        c = np.zeros(Aa.shape[1])
        c[-1] = -1
        bounds = [(0, None)] * len(active) + [(0, _GAUGE_CAP)]
        res = linprog(c, A_eq=Aa, b_eq=b0, bounds=bounds, method="highs")
        if res.status != 0:
            raise SolverError(f"gauge LP failed: {res.message}")
        red = -(A.T @ res.eqlin.marginals)
        red[active] = 0
        new = np.flatnonzero(red < -1e-9)
        if new.size == 0:
            return float(res.x[-1])
        active += list(new[np.argsort(red[new], kind="stable")[:64]])
