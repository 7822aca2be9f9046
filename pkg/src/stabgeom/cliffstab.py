"""Displacement operators, Clifford groups and stabilizer states.

Supported systems are one qudit of prime dimension, two qubits (Clifford group
built from the four gate-word classes) and, for the stabilizer states only,
three qubits (breadth-first closure under H, S and CNOT).
"""
import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .qmat import canonical_phase, dag, phase_key, tensor

SUPPORTED_GROUPS = {(2, 1), (3, 1), (2, 2)}
SUPPORTED_STATES = {(2, 1), (3, 1), (2, 2), (2, 3)}

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j]).astype(complex)
V = (H @ S) @ (H @ S)
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


class UnsupportedSystem(ValueError):
    pass


def is_prime(d):
    return d >= 2 and all(d % k for k in range(2, int(d**0.5) + 1))


def vertex_count(d, n):
    """Number of pure stabilizer states, d^n * prod_{i=1..n} (d^i + 1)."""
    out = d**n
    for i in range(1, n + 1):
        out *= d**i + 1
    return out


@dataclass(frozen=True)
class DisplacementIndex:
    d: int
    a: tuple
    b: tuple

    def __post_init__(self):
        a = tuple(int(x) for x in np.atleast_1d(self.a))
        b = tuple(int(x) for x in np.atleast_1d(self.b))
        if len(a) != len(b):
            raise ValueError("a and b must have equal length")
        if any(not 0 <= x < self.d for x in a + b):
            raise ValueError(f"components must lie in [0, {self.d})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self):
        return len(self.a)


def shift_clock(d):
    w = np.exp(2j * np.pi / d)
    clock = np.diag(w ** np.arange(d))
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)  # X|j> = |j+1>
    return shift, clock


def displacement(d, a, b=None):
    """Heisenberg-Weyl operator D_{a,b} = phase * Z^a X^b.

    ``a`` holds the clock (Z) exponents and ``b`` the shift (X) exponents.
    The phase is omega^{-2^{-1} a.b} (i^{-a.b} for qubits), which makes
    D_{a,b}^dagger = D_{-a,-b}; for qubits D_{1,0} = Z, D_{0,1} = X and
    D_{1,1} = Y exactly.  A ``DisplacementIndex`` may be passed instead of
    ``(d, a, b)``.
    """
    if isinstance(d, DisplacementIndex):
        idx = d
    else:
        idx = DisplacementIndex(d, a, b)
    d = idx.d
    if not is_prime(d):
        raise ValueError(f"dimension {d} is not prime")
    shift, clock = shift_clock(d)
    ops = [np.linalg.matrix_power(clock, ai) @ np.linalg.matrix_power(shift, bi)
           for ai, bi in zip(idx.a, idx.b)]
    ab = sum(x * y for x, y in zip(idx.a, idx.b))
    if d == 2:
        phase = (-1j) ** ab
    else:
        phase = np.exp(2j * np.pi / d) ** ((-pow(2, -1, d) * ab) % d)
    return phase * tensor(ops)


@dataclass(frozen=True)
class SymplecticLabel:
    """SL(2, Z_p) matrix [[a, b], [c, d]] plus displacement vector xi = (xi_z, xi_x)."""

    p: int
    a: int
    b: int
    c: int
    d: int
    xi: tuple = (0, 0)

    def __post_init__(self):
        if (self.a * self.d - self.b * self.c) % self.p != 1:
            raise ValueError(f"det F != 1 mod {self.p}")


@dataclass(frozen=True, eq=False)
class CliffordElement:
    unitary: np.ndarray
    label: object = None

    def conjugate(self, op):
        return self.unitary @ op @ dag(self.unitary)


def _half_phase(p):
    """omega^{2^{-1} x}; for p = 2 this is i^x with x taken as an integer."""
    if p == 2:
        return lambda x: 1j ** (x % 4)
    w = np.exp(2j * np.pi / p)
    inv2 = pow(2, -1, p)
    return lambda x: w ** ((inv2 * x) % p)


def symplectic_unitary(p, a, b, c, d):
    """Metaplectic unitary V_F for F = [[a, b], [c, d]] in SL(2, Z_p)."""
    ph = _half_phase(p)
    U = np.zeros((p, p), dtype=complex)
    if b % p:
        binv = pow(b, -1, p)
        for j in range(p):
            for k in range(p):
                U[j, k] = ph(binv * (a * k * k - 2 * j * k + d * j * j))
        return U / np.sqrt(p)
    for k in range(p):
        U[(a * k) % p, k] = ph(a * c * k * k)
    return U


def clifford_1qudit(label):
    if not is_prime(label.p):
        raise ValueError(f"dimension {label.p} is not prime")
    U = displacement(label.p, [label.xi[0]], [label.xi[1]]) @ symplectic_unitary(
        label.p, label.a, label.b, label.c, label.d)
    return CliffordElement(U, label)


def sl2(p):
    return [(a, b, c, d) for a, b, c, d in itertools.product(range(p), repeat=4)
            if (a * d - b * c) % p == 1]


def _dedup(elements):
    seen = {}
    for el in elements:
        seen.setdefault(phase_key(el.unitary), el)
    return list(seen.values())


CX01 = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
SWAP = np.eye(4, dtype=complex)[[0, 2, 1, 3]]
CX10 = SWAP @ CX01 @ SWAP


def two_qubit_clifford_classes():
    """The four gate-word classes (single-qubit, CNOT, iSWAP, SWAP) as dicts name -> list."""
    hs = {"I": I2, "H": H}
    vs = {"I": I2, "V": V, "VV": V @ V}
    ps = PAULIS
    middles = {
        "single": (np.eye(4, dtype=complex), False),
        "cnot": (CX01, True),
        "iswap": (CX01 @ CX10, True),
        "swap": (CX01 @ CX10 @ CX01, False),
    }
    out = {}
    for cname, (mid, vprime) in middles.items():
        elems = []
        for (h0, h1, v0, v1, p0, p1) in itertools.product(hs, hs, vs, vs, ps, ps):
            left = np.kron(hs[h0], hs[h1]) @ np.kron(vs[v0], vs[v1])
            right = np.kron(ps[p0], ps[p1])
            inner = list(itertools.product(vs, vs)) if vprime else [None]
            for w in inner:
                U = left @ mid
                word = [h0 + h1, v0 + "." + v1, cname]
                if w is not None:
                    U = U @ np.kron(vs[w[0]], vs[w[1]])
                    word.append(w[0] + "." + w[1])
                U = U @ right
                word.append(p0 + p1)
                elems.append(CliffordElement(U, tuple(word)))
        out[cname] = elems
    return out


@lru_cache(maxsize=None)
def _enumerate(d, n):
    if (d, n) not in SUPPORTED_GROUPS:
        raise UnsupportedSystem(f"Clifford enumeration not supported for (d, n) = ({d}, {n})")
    if n == 1:
        els = [clifford_1qudit(SymplecticLabel(d, *F, xi=(x, z)))
               for F in sl2(d) for x in range(d) for z in range(d)]
    else:
        els = [el for cls in two_qubit_clifford_classes().values() for el in cls]
    return tuple(_dedup(els))


def enumerate_clifford(d, n):
    """All Clifford elements modulo global phase: 24, 216 or 11520 of them."""
    return list(_enumerate(d, n))


@dataclass(frozen=True, eq=False)
class StabilizerVertexSet:
    d: int
    n: int
    vertices: np.ndarray  # (m, d**n) complex, rows are states
    index: dict = field(repr=False, default_factory=dict)

    def __len__(self):
        return len(self.vertices)

    @property
    def dim(self):
        return self.d**self.n

    def index_of(self, psi):
        """Row index of ``psi`` (up to phase), or -1 if it is not a vertex."""
        return self.index.get(phase_key(psi), -1)

    def projectors(self):
        v = self.vertices
        return np.einsum("si,sj->sij", v, v.conj())

    def to_json(self):
        return json.dumps({
            "d": self.d, "n": self.n,
            "vertices": [[[float(z.real), float(z.imag)] for z in v] for v in self.vertices],
        })

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        vs = np.array([[complex(re, im) for re, im in v] for v in obj["vertices"]])
        return _make_vertex_set(obj["d"], obj["n"], vs)


def _make_vertex_set(d, n, vectors):
    index = {}
    rows = []
    for v in vectors:
        key = phase_key(v)
        if key not in index:
            index[key] = len(rows)
            rows.append(v)
    vs = np.array(rows)
    vs.setflags(write=False)
    return StabilizerVertexSet(d, n, vs, index)


def _gate_set(n):
    gates = []
    for q in range(n):
        for g in (H, S):
            ops = [I2] * n
            ops[q] = g
            gates.append(tensor(ops))
    for c, t in itertools.permutations(range(n), 2):
        gates.append(cnot(n, c, t))
    return gates


def cnot(n, control, target):
    dim = 2**n
    U = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        bits = [(i >> (n - 1 - q)) & 1 for q in range(n)]
        if bits[control]:
            bits[target] ^= 1
        j = sum(b << (n - 1 - q) for q, b in enumerate(bits))
        U[j, i] = 1
    return U


def _closure(start, gates):
    keys = {phase_key(start)}
    order = [start]
    queue = deque([start])
    while queue:
        psi = queue.popleft()
        for g in gates:
            phi = g @ psi
            k = phase_key(phi)
            if k not in keys:
                keys.add(k)
                order.append(phi)
                queue.append(phi)
    return order


@lru_cache(maxsize=None)
def stabilizer_vertices(d, n):
    """Pure stabilizer states of n qudits as a deduplicated vertex set."""
    if (d, n) not in SUPPORTED_STATES:
        raise UnsupportedSystem(f"stabilizer states not supported for (d, n) = ({d}, {n})")
    zero = np.zeros(d**n, dtype=complex)
    zero[0] = 1
    if (d, n) in SUPPORTED_GROUPS:
        states = [el.unitary @ zero for el in _enumerate(d, n)]
    else:
        states = _closure(zero, _gate_set(n))
    vs = _make_vertex_set(d, n, [_clean(s) for s in states])
    expected = vertex_count(d, n)
    if len(vs) != expected:
        raise RuntimeError(f"found {len(vs)} stabilizer states, expected {expected}")
    return vs


def _clean(psi):
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return canonical_phase(psi)


def conjugate_state(c, psi):
    """Apply a Clifford element to a state vector (normalised output)."""
    U = c.unitary if isinstance(c, CliffordElement) else np.asarray(c)
    out = U @ np.asarray(psi, dtype=complex)
    return out / np.linalg.norm(out)


# ---------------------------------------------------------------- Pauli words

def pauli_labels(n, include_identity=True):
    labels = ["".join(w) for w in itertools.product("IXYZ", repeat=n)]
    return labels if include_identity else labels[1:]


def pauli_word(label):
    return tensor([PAULIS[c] for c in label])


@lru_cache(maxsize=None)
def pauli_basis(n):
    """Array (4^n, 2^n, 2^n) of Pauli words in lexicographic IXYZ order."""
    mats = np.array([pauli_word(w) for w in pauli_labels(n)])
    mats.setflags(write=False)
    return mats


def pauli_expectations(rho, n=None):
    """<P> for every Pauli word (IXYZ lexicographic order), real."""
    rho = np.asarray(rho)
    if rho.ndim == 1:
        psi = rho
        n = n or int(round(np.log2(psi.size)))
        P = pauli_basis(n)
        return np.real(np.einsum("i,pij,j->p", psi.conj(), P, psi))
    n = n or int(round(np.log2(rho.shape[0])))
    P = pauli_basis(n)
    return np.real(np.einsum("pij,ji->p", P, rho))


def pauli_action(U, n):
    """Signed permutation matrix M with U P_p U^dag = sum_q M[p, q] P_q."""
    P = pauli_basis(n)
    conj = np.einsum("ij,pjk,lk->pil", U, P, U.conj())
    M = np.real(np.einsum("pij,qji->pq", conj, P)) / 2**n
    Mi = np.rint(M)
    if np.abs(M - Mi).max() > 1e-8:
        raise ValueError("unitary does not map Pauli words to signed Pauli words")
    return Mi.astype(np.int64)
