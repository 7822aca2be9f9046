"""Dense complex linear algebra for small quantum systems (dimension <= 16).

States are plain numpy arrays: a pure state is a 1-D complex vector, a density
matrix a 2-D Hermitian array.  ``as_pure`` and ``as_density`` validate and
normalise them.
"""
from functools import reduce

import numpy as np

HERM_TOL = 1e-10
NEG_EIG_TOL = 1e-10
PHASE_TOL = 1e-9


class StateError(ValueError):
    """Raised when an array does not represent a valid quantum state."""


def tensor(*ops):
    """Kronecker product of any number of vectors or matrices."""
    if len(ops) == 1 and isinstance(ops[0], (list, tuple)):
        ops = ops[0]
    return reduce(np.kron, [np.asarray(o) for o in ops])


def dag(a):
    return np.conj(np.swapaxes(a, -1, -2))


def is_hermitian(h, tol=HERM_TOL):
    h = np.asarray(h)
    return h.ndim == 2 and h.shape[0] == h.shape[1] and np.abs(h - dag(h)).max() <= tol


def as_pure(psi, tol=1e-12):
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size < 1 or not np.all(np.isfinite(psi)):
        raise StateError("state vector must be finite and non-empty")
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1) > tol:
        raise StateError(f"state vector has norm {nrm}, expected 1")
    return psi


def normalize(psi):
    psi = np.asarray(psi, dtype=complex).ravel()
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise StateError("cannot normalize the zero vector")
    return psi / nrm


def ket_to_dm(psi):
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def as_density(rho, tol=1e-12):
    """Validate a density matrix.

    Pure-state vectors are promoted to projectors.  Eigenvalues in
    ``[-1e-10, 0)`` are clamped to zero and the matrix renormalised; anything
    more negative is rejected.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        return ket_to_dm(as_pure(rho, tol=max(tol, 1e-10)))
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise StateError("density matrix must be square")
    if not np.all(np.isfinite(rho)):
        raise StateError("density matrix has non-finite entries")
    if np.abs(rho - dag(rho)).max() > max(tol, 1e-12) * 100:
        raise StateError("density matrix is not Hermitian")
    rho = (rho + dag(rho)) / 2
    tr = np.trace(rho).real
    if abs(tr - 1) > 1e-10:
        raise StateError(f"density matrix has trace {tr}")
    w, v = np.linalg.eigh(rho)
    if w.min() < -NEG_EIG_TOL:
        raise StateError(f"density matrix has eigenvalue {w.min()}")
    if w.min() < 0:
        w = np.clip(w, 0, None)
        w /= w.sum()
        rho = (v * w) @ dag(v)
    return rho


def partial_trace(rho, dims, keep):
    """Reduced state on the subsystems listed in ``keep``.

    ``dims`` are the local dimensions in tensor order; ``keep`` is an
    iterable of subsystem indices (order is normalised to ascending).
    """
    rho = np.asarray(rho)
    if rho.ndim == 1:
        rho = ket_to_dm(rho)
    dims = [int(x) for x in dims]
    n = len(dims)
    if int(np.prod(dims)) != rho.shape[0]:
        raise ValueError(f"dims {dims} inconsistent with matrix size {rho.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"subsystem index out of range in {keep}")
    t = rho.reshape(dims + dims)
    # traced subsystems share their row/column label
    row = list(range(n))
    col = [i + n if i in keep else i for i in range(n)]
    out = list(keep) + [i + n for i in keep]
    red = np.einsum(t, row + col, out)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return red.reshape(dk, dk)


def eigh(h):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending."""
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h, tol=HERM_TOL * max(1.0, np.abs(h).max())):
        raise ValueError("eigh requires a Hermitian matrix")
    w, v = np.linalg.eigh((h + dag(h)) / 2)
    return w[::-1], v[:, ::-1]


def trace_norm(a):
    a = np.asarray(a, dtype=complex)
    if a.shape[0] != a.shape[1]:
        raise ValueError("trace norm requires a square matrix")
    if np.abs(a - dag(a)).max() <= 1e-13 * max(1.0, np.abs(a).max()):
        return float(np.abs(np.linalg.eigvalsh((a + dag(a)) / 2)).sum())
    return float(np.linalg.svd(a, compute_uv=False).sum())


def trace_distance(rho, sigma):
    rho = np.asarray(rho)
    sigma = np.asarray(sigma)
    if rho.ndim == 1:
        rho = ket_to_dm(rho)
    if sigma.ndim == 1:
        sigma = ket_to_dm(sigma)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch {rho.shape} vs {sigma.shape}")
    return min(1.0, 0.5 * trace_norm(rho - sigma))


def fidelity_pure(psi, phi):
    psi = np.asarray(psi).ravel()
    phi = np.asarray(phi).ravel()
    if psi.shape != phi.shape:
        raise ValueError("dimension mismatch")
    return float(min(1.0, abs(np.vdot(psi, phi)) ** 2))


def entropy_of(probs, cutoff=1e-12):
    p = np.asarray(probs, dtype=float)
    p = p[p > cutoff]
    return float(max(0.0, -(p * np.log2(p)).sum()))


def von_neumann_entropy(rho):
    """Base-2 von Neumann entropy; eigenvalues below 1e-12 contribute 0."""
    rho = np.asarray(rho)
    if rho.ndim == 1:
        return 0.0
    return entropy_of(np.linalg.eigvalsh((rho + dag(rho)) / 2))


def states_equal_up_to_phase(psi, phi, tol=PHASE_TOL):
    return abs(np.vdot(np.ravel(psi), np.ravel(phi))) >= 1 - tol


def canonical_phase(psi, tol=PHASE_TOL):
    """Rotate the global phase so the first non-negligible amplitude is real positive."""
    psi = np.asarray(psi, dtype=complex).ravel()
    idx = np.flatnonzero(np.abs(psi) > 1e-6)
    if idx.size == 0:
        return psi
    f = psi[idx[0]]
    return psi * (abs(f) / f)


def phase_key(psi, decimals=8):
    """Hashable key identifying a state (or matrix) up to global phase."""
    v = canonical_phase(np.ravel(psi))
    # adding 0.0 turns -0.0 into 0.0 so equal states hash equal
    re = np.round(v.real, decimals) + 0.0
    im = np.round(v.imag, decimals) + 0.0
    return np.concatenate([re, im]).tobytes()
