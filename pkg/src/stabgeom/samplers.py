"""Random and structured state generators and depolarizing noise.

Randomness comes from :class:`SeededRng`, a thin wrapper around numpy's
counter-based Philox generator keyed by (seed, stream), so any sample can be
regenerated on its own: experiments draw sample i from stream i.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .cliffstab import CX01, I2
from .convex import depolarizing_gauge, polytope_membership
from .measures import vertices_for
from .qmat import as_density, as_pure, ket_to_dm, tensor

BISECT_STEPS = 20
MEMBERSHIP_TOL = 1e-5


class SeededRng:
    """Reproducible random stream identified by (seed, stream)."""

    def __init__(self, seed, stream=0):
        if not 0 <= int(seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = int(seed)
        self.stream = int(stream)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        self.gen = np.random.Generator(np.random.Philox(ss))

    def child(self, stream):
        return SeededRng(self.seed, stream)

    def normal(self, size=None):
        return self.gen.standard_normal(size)

    def complex_normal(self, size):
        return (self.gen.standard_normal(size) + 1j * self.gen.standard_normal(size)) / math.sqrt(2)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.gen.uniform(low, high, size)


def _check_dim(dim):
    if int(dim) < 2:
        raise ValueError("dimension must be at least 2")
    return int(dim)


def haar_pure(dim, rng):
    """Haar-random unit vector (normalised complex Gaussian)."""
    z = rng.complex_normal(_check_dim(dim))
    return z / np.linalg.norm(z)


def hs_mixed(dim, rng):
    """Hilbert-Schmidt random density matrix G G^dag / Tr(G G^dag)."""
    dim = _check_dim(dim)
    G = rng.complex_normal((dim, dim))
    rho = G @ G.conj().T
    return rho / np.real(np.trace(rho))


# ------------------------------------------------------------------ biased circuits

def ry(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta):
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def _on(n, ops):
    """Tensor product with ops[k] on qubit k (identity where missing)."""
    return tensor(*[ops.get(k, I2) for k in range(n)])


def _cnot(n, c, t):
    """CNOT with control c and target t on n qubits (qubit 0 most significant)."""
    D = 2**n
    U = np.zeros((D, D), dtype=complex)
    for i in range(D):
        bits = [(i >> (n - 1 - k)) & 1 for k in range(n)]
        if bits[c]:
            bits[t] ^= 1
        j = sum(b << (n - 1 - k) for k, b in enumerate(bits))
        U[j, i] = 1
    return U


# Gate layout of the biased generator.  Each entry is ("ryrz", qubit),
# ("ry", qubit) or ("cx", control, target); "ryrz" applies R_Z then R_Y.
CIRCUIT_LAYOUT = {
    2: (("ryrz", 0), ("ryrz", 1), ("cx", 0, 1), ("ry", 0), ("ry", 1)),
    3: (("ryrz", 0), ("ryrz", 1), ("ryrz", 2), ("cx", 0, 1), ("cx", 1, 2),
        ("ry", 0), ("ry", 1), ("ry", 2), ("cx", 0, 2),
        ("ryrz", 0), ("ryrz", 1), ("ry", 2)),
}
CIRCUIT_ANGLES = {2: 6, 3: 14}


def circuit_state(n, angles):
    """Apply the fixed rotation/CNOT layout with the given angles to |0...0>."""
    if n not in CIRCUIT_LAYOUT:
        raise ValueError(f"biased circuits exist for 2 or 3 qubits, not {n}")
    angles = list(angles)
    if len(angles) != CIRCUIT_ANGLES[n]:
        raise ValueError(f"{n}-qubit circuit takes {CIRCUIT_ANGLES[n]} angles, got {len(angles)}")
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1
    it = iter(angles)
    for gate in CIRCUIT_LAYOUT[n]:
        if gate[0] == "cx":
            psi = (CX01 if n == 2 and gate[1:] == (0, 1) else _cnot(n, *gate[1:])) @ psi
        elif gate[0] == "ry":
            psi = _on(n, {gate[1]: ry(next(it))}) @ psi
        else:
            z = next(it)
            y = next(it)
            psi = _on(n, {gate[1]: ry(y) @ rz(z)}) @ psi
    return psi / np.linalg.norm(psi)


def biased_circuit_state(n, rng):
    """Circuit state with all angles uniform on [0, 2 pi)."""
    if n not in CIRCUIT_ANGLES:
        raise ValueError(f"biased circuits exist for 2 or 3 qubits, not {n}")
    return circuit_state(n, rng.uniform(0, 2 * math.pi, CIRCUIT_ANGLES[n]))


# ------------------------------------------------------------------ walks

@dataclass(frozen=True)
class WalkSpec:
    start: np.ndarray
    end: np.ndarray
    step: float = 0.001

    def __post_init__(self):
        if not 0 < self.step <= 1:
            raise ValueError("step must lie in (0, 1]")
        as_pure(self.start)
        as_pure(self.end)
        if np.shape(self.start) != np.shape(self.end):
            raise ValueError("walk endpoints differ in dimension")


@dataclass
class Walk:
    eps: np.ndarray
    states: np.ndarray
    skipped: list  # eps values where the interpolant vanished


def walk(spec, zero_tol=1e-12):
    """Normalised states along eps * start + (1 - eps) * end, eps = 0, step, ..., 1."""
    steps = int(round(1 / spec.step))
    grid = np.linspace(0.0, 1.0, steps + 1)
    start = np.asarray(spec.start, dtype=complex)
    end = np.asarray(spec.end, dtype=complex)
    eps, states, skipped = [], [], []
    for e in grid:
        v = e * start + (1 - e) * end
        nrm = np.linalg.norm(v)
        if nrm < zero_tol:
            skipped.append(float(e))
            continue
        eps.append(e)
        states.append(v / nrm)
    return Walk(np.array(eps), np.array(states), skipped)


# ------------------------------------------------------------------ noise

def depolarize_global(rho, p):
    """(1 - p) rho + p I/d."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    rho = _dm(rho)
    d = rho.shape[0]
    return (1 - p) * rho + p * np.eye(d) / d


def depolarize_local(rho, p, dims=None):
    """Single-subsystem depolarizing channel with the same p on every subsystem."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    rho = _dm(rho)
    if dims is None:
        n = int(round(math.log2(rho.shape[0])))
        if 2**n != rho.shape[0]:
            raise ValueError("give dims for non-qubit systems")
        dims = [2] * n
    n = len(dims)
    t = rho.reshape(list(dims) * 2)
    for k, dk in enumerate(dims):
        red = np.trace(t, axis1=k, axis2=n + k)
        mixed = np.multiply.outer(red, np.eye(dk) / dk)
        mixed = np.moveaxis(mixed, [2 * n - 2, 2 * n - 1], [k, n + k])
        t = (1 - p) * t + p * mixed
    D = rho.shape[0]
    return t.reshape(D, D)


def _dm(state):
    state = np.asarray(state)
    return ket_to_dm(as_pure(state)) if state.ndim == 1 else as_density(state)


_CHANNELS = {"global": depolarize_global, "local": depolarize_local}


def critical_depolarization(psi, mode="global", tol=MEMBERSHIP_TOL, method="gauge", vs=None):
    """Smallest depolarization p that brings the state into the stabilizer polytope.

    ``method="bisect"`` runs a fixed 20-step bisection on LP membership and
    returns the upper end of the final bracket.  ``method="gauge"`` is exact
    for global noise (one LP) and, for local noise, finds the root of
    gauge(p) = 1 along the noise path.  Both assume that once the noisy state
    is inside, more noise keeps it inside.
    """
    if mode not in _CHANNELS:
        raise ValueError(f"mode must be 'global' or 'local', not {mode!r}")
    rho = _dm(psi)
    if vs is None:
        vs = vertices_for(rho.shape[0])
    channel = _CHANNELS[mode]
    if method == "bisect":
        if polytope_membership(rho, vs, tol):
            return 0.0
        lo, hi = 0.0, 1.0
        for _ in range(BISECT_STEPS):
            mid = (lo + hi) / 2
            if polytope_membership(channel(rho, mid), vs, tol):
                hi = mid
            else:
                lo = mid
        return hi
    if method != "gauge":
        raise ValueError(f"unknown method {method!r}")
    t0 = depolarizing_gauge(rho, vs)
    if t0 >= 1:
        return 0.0
    if mode == "global":
        return 1 - t0
    seen = {0.0: t0 - 1}

    def g(p):
        if p not in seen:
            seen[p] = depolarizing_gauge(channel(rho, p), vs) - 1
        return seen[p]

    # start the bracket at the global threshold and widen it if needed
    hi = 1 - t0
    while g(hi) < 0:
        hi = min(1.0, hi + 0.1)
    return brentq(g, 0.0, hi, xtol=tol)
