"""Scalar non-stabilizerness, entanglement and witness quantities.

All logarithms are base 2.  States may be given as kets or density matrices
unless a function says otherwise; the stabilizer vertex set is picked from
the Hilbert-space dimension (2, 3, 4 or 8).
"""
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from . import facets as F
from .cliffstab import PAULIS, displacement, enumerate_clifford, pauli_expectations, stabilizer_vertices
from .convex import NTD_TOL, ntd_minimize, rom_minimize
from .qmat import as_density, as_pure, ket_to_dm, normalize, partial_trace, tensor, von_neumann_entropy

SYSTEMS = {2: (2, 1), 3: (3, 1), 4: (2, 2), 8: (2, 3)}

# piecewise fit for the second qutrit class, valid on [-QUTRIT_I1, 0]
QUTRIT_I0 = 0.4554
QUTRIT_I1 = 0.618
QUTRIT_FIT = (3.43, 2.19, 0.49)


def system_of(dim):
    """(d, n) for a supported Hilbert-space dimension."""
    try:
        return SYSTEMS[int(dim)]
    except KeyError:
        raise ValueError(f"no stabilizer polytope available for dimension {dim}") from None


def vertices_for(dim):
    return stabilizer_vertices(*system_of(dim))


def _rho(state):
    state = np.asarray(state)
    return ket_to_dm(as_pure(state)) if state.ndim == 1 else as_density(state)


# ------------------------------------------------------------------ distances

def ntd_result(state, tol=NTD_TOL):
    """Certified solver output (weights, value, certificate) for the NTD."""
    rho = _rho(state)
    return ntd_minimize(rho, vertices_for(rho.shape[0]), tol=tol)


def ntd(state, tol=NTD_TOL):
    """Trace distance from the state to the stabilizer polytope."""
    return ntd_result(state, tol).value


def rom_result(state):
    rho = _rho(state)
    return rom_minimize(rho, vertices_for(rho.shape[0]))


def rom(state):
    """Robustness of magic."""
    return rom_result(state).value


def ntd_lb_qubit(state):
    """Closed-form single-qubit NTD from the most violated facet.

    Exact whenever the projection of the state onto that facet's hyperplane
    lands inside the facet, and a lower bound otherwise.
    """
    rho = _rho(state)
    if rho.shape != (2, 2):
        raise ValueError("ntd_lb_qubit needs a single-qubit state")
    worst = min(F.evaluate(f, rho) for f in _qubit_facets())
    return -math.sqrt(3) / 3 * min(0.0, worst)


@lru_cache(maxsize=None)
def _qubit_facets():
    return tuple(F.one_qudit_facets(2))


@lru_cache(maxsize=None)
def qutrit_facet_classes():
    """The 81 qutrit facets grouped as (class-1 operators, class-2 operators)."""
    A1, A2 = F.qutrit_class_operators()
    c1 = np.array([f.operator for f in F.clifford_orbit(A1)])
    c2 = np.array([f.operator for f in F.clifford_orbit(A2)])
    c1.setflags(write=False)
    c2.setflags(write=False)
    return c1, c2


def qutrit_bound_class1(value):
    return max(0.0, -0.5 * value)


def qutrit_bound_class2(value):
    """Piecewise NTD fit as a function of the class-2 witness value."""
    if value >= 0:
        return 0.0
    if value >= -QUTRIT_I0:
        return -value / math.sqrt(5)
    a, b, c = QUTRIT_FIT
    return a * value * value + b * value + c


def qutrit_witness_values(state):
    """Witness values Tr(rho A) over every facet of each qutrit class."""
    rho = _rho(state)
    if rho.shape != (3, 3):
        raise ValueError("qutrit witnesses need a qutrit state")
    c1, c2 = qutrit_facet_classes()
    v1 = np.real(np.einsum("kij,ji->k", c1, rho))
    v2 = np.real(np.einsum("kij,ji->k", c2, rho))
    return v1, v2


def ntd_lb_qutrit(state):
    """Largest of the per-facet NTD bounds over both qutrit classes.

    The class-2 branch is a fitted curve, so this can exceed the exact NTD
    by up to about 0.013.
    """
    v1, v2 = qutrit_witness_values(state)
    return float(max([0.0] + [qutrit_bound_class1(v) for v in v1] + [qutrit_bound_class2(v) for v in v2]))


def qutrit_witnesses(state):
    """(I1, I2) for the two class representatives."""
    rho = _rho(state)
    A1, A2 = F.qutrit_class_operators()
    return F.evaluate(A1, rho), F.evaluate(A2, rho)


def violated_facets(state, tol=F.VIOLATION_TOL):
    """Number of violated two-qubit facets."""
    rho = _rho(state)
    if rho.shape != (4, 4):
        raise ValueError("facet counts are available for two qubits only")
    M, _ = F.two_qubit_facets()
    return F.count_violations(rho, M, tol)


@lru_cache(maxsize=None)
def _image_weights():
    """Clifford images per distinct facet, for each facet class."""
    _, cls = F.two_qubit_facets()
    return len(enumerate_clifford(2, 2)) / np.bincount(cls)


def violated_facet_images(state, tol=F.VIOLATION_TOL):
    """Violated inequalities among all Clifford images of the eight class representatives.

    Every group element applied to every representative counts once, so a
    facet with a nontrivial stabilizer subgroup is counted that many times.
    """
    rho = _rho(state)
    if rho.shape != (4, 4):
        raise ValueError("facet counts are available for two qubits only")
    M, cls = F.two_qubit_facets()
    bad = M @ pauli_expectations(rho, 2) < -tol
    return float(np.bincount(cls[bad], minlength=len(F.CLASS_REPRESENTATIVES)) @ _image_weights())


def violated_classes(state, tol=F.VIOLATION_TOL):
    """Boolean per facet class: does the state violate some facet of it."""
    rho = _rho(state)
    M, cls = F.two_qubit_facets()
    bad = M @ pauli_expectations(rho, 2) < -tol
    return np.array([bad[cls == r].any() for r in range(len(F.CLASS_REPRESENTATIVES))])


# ------------------------------------------------------------------ SRE

def sre(psi, alpha=2):
    """Stabilizer Renyi entropy of a pure state.

    M_a = log2(sum_P Xi_P^a) / (1 - a) - log2(D), with Xi_P = |<P>|^2 / D over
    the D^2 Weyl/Pauli operators.
    """
    psi = np.asarray(psi)
    if psi.ndim != 1:
        raise ValueError("SRE is defined here for pure states (kets) only")
    psi = as_pure(psi)
    if alpha == 1:
        raise ValueError("alpha = 1 is not supported")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    D = psi.size
    xi = _pauli_spectrum(psi) ** 2 / D
    xi = xi[xi > 1e-300]
    val = math.log2(float(np.sum(xi**alpha))) / (1 - alpha) - math.log2(D)
    return max(val, 0.0) if val > -1e-10 else val


def _pauli_spectrum(psi):
    D = psi.size
    d, n = system_of(D)
    if d == 2:
        return np.abs(pauli_expectations(psi, n))
    return np.array([abs(np.vdot(psi, displacement(d, a, b) @ psi))
                     for a in range(d) for b in range(d)])


# ------------------------------------------------------------------ entanglement

def ent_entropy(psi, keep=(0,), dims=None):
    """Entropy of the reduced state on ``keep`` (qubits unless ``dims`` is given)."""
    psi = as_pure(np.asarray(psi))
    if dims is None:
        n = int(round(math.log2(psi.size)))
        if 2**n != psi.size:
            raise ValueError("give dims for non-qubit systems")
        dims = [2] * n
    return von_neumann_entropy(partial_trace(ket_to_dm(psi), dims, keep))


def marginal_entropies(psi):
    psi = as_pure(np.asarray(psi))
    n = int(round(math.log2(psi.size)))
    return [ent_entropy(psi, (k,)) for k in range(n)]


def mean_entropy(psi):
    """Average single-qubit marginal entropy."""
    return float(np.mean(marginal_entropies(psi)))


_THREE_QUBIT_CLASSES = {
    (0, 0, 0): "product",
    (1, 1, 0): "bisep-AB|C",
    (1, 0, 1): "bisep-AC|B",
    (0, 1, 1): "bisep-BC|A",
    (1, 1, 1): "ghz",
}


def lu_class(psi, tol=1e-9):
    """Entanglement class of a two- or three-qubit stabilizer state."""
    ent = marginal_entropies(psi)
    pattern = []
    for s in ent:
        k = round(s)
        if abs(s - k) > tol or k not in (0, 1):
            raise ValueError(f"marginal entropy {s} is not 0 or 1: not a stabilizer state")
        pattern.append(int(k))
    if len(pattern) == 2:
        return "product" if pattern == [0, 0] else "bell"
    if len(pattern) == 3:
        if tuple(pattern) not in _THREE_QUBIT_CLASSES:
            raise ValueError(f"impossible entropy pattern {pattern}")
        return _THREE_QUBIT_CLASSES[tuple(pattern)]
    raise ValueError("lu_class handles two or three qubits")


# ------------------------------------------------------------------ witnesses

def _expect(rho, words):
    rho = _rho(rho)
    return {w: float(np.real(np.trace(rho @ tensor(*[PAULIS[c] for c in w])))) for w in words}


def chsh_dd(state):
    """<XX> + <XY> + <YX> - <YY>; at most 2 on the stabilizer polytope."""
    e = _expect(state, ["XX", "XY", "YX", "YY"])
    return e["XX"] + e["XY"] + e["YX"] - e["YY"]


def dd_two_term(state):
    """The pair (<XX> + <XY>, <YX> - <YY>), each at most 1 on the polytope."""
    e = _expect(state, ["XX", "XY", "YX", "YY"])
    return e["XX"] + e["XY"], e["YX"] - e["YY"]


def mermin3(state):
    """<XXX> - <XYY> - <YXY> - <YYX>."""
    e = _expect(state, ["XXX", "XYY", "YXY", "YYX"])
    return e["XXX"] - e["XYY"] - e["YXY"] - e["YYX"]


def three_body_values(state):
    """Dot products of the two printed three-body vectors with the correlators."""
    rho = _rho(state)
    labels = F.three_body_labels()
    e = _expect(rho, labels)
    P3 = np.array([e[w] for w in labels])
    return {"W": float(np.dot(F.THREE_BODY_W, P3)), "Hoggar": float(np.dot(F.THREE_BODY_HOGGAR, P3))}


def chsh3q(state):
    """Two-body X/Y witness value; at most 4 on the polytope."""
    e = _expect(state, list(F.CHSH3Q_TERMS))
    return float(sum(c * e[w] for w, c in F.CHSH3Q_TERMS.items()))


# ------------------------------------------------------------------ entropy bounds

def binary_entropy(x):
    if x <= 0 or x >= 1:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def fannes_error(t, D):
    """t log2(D - 1) + h(t), the Fannes-Audenaert continuity bound."""
    if not 0 <= t <= 1:
        raise ValueError("t must lie in [0, 1]")
    if D < 2:
        raise ValueError("dimension must be at least 2")
    return t * math.log2(D - 1) + binary_entropy(t)


def binary_entropy_inverse(y, tol=1e-13):
    """The x in [1/2, 1] with h(x) = y."""
    if not 0 <= y <= 1:
        raise ValueError("y must lie in [0, 1]")
    if y == 1:
        return 0.5
    if y == 0:
        return 1.0
    return brentq(lambda x: binary_entropy(x) - y, 0.5, 1.0, xtol=tol, rtol=4 * np.finfo(float).eps)


def epsilon_star(D):
    """Largest eps with f(eps, D) <= 1 (f increases up to 1 - 1/D)."""
    return brentq(lambda t: fannes_error(t, D) - 1, 0.0, 1 - 1 / D, xtol=1e-14)


def concentration_delta(eps, D):
    """Trace-distance radius eps + 2 sqrt(1 - h^-1(f(eps, D))) around some vertex."""
    f = fannes_error(eps, D)
    if f > 1:
        raise ValueError(f"eps = {eps} exceeds the range where the bound applies")
    return eps + 2 * math.sqrt(max(0.0, 1 - binary_entropy_inverse(f)))


def corollary_bound(eps, D):
    """Entropy-difference bound f(delta, D) for reduced states near a vertex."""
    delta = concentration_delta(eps, D)
    return fannes_error(min(delta, 1 - 1 / D), D)


def nearest_vertex(psi):
    """(index, trace distance) of the closest vertex to a pure state."""
    psi = as_pure(np.asarray(psi))
    vs = vertices_for(psi.size)
    ov = np.abs(vs.vertices.conj() @ psi) ** 2
    j = int(np.argmax(ov))
    return j, float(math.sqrt(max(0.0, 1 - ov[j])))


# ------------------------------------------------------------------ records

@dataclass
class MeasureRecord:
    ntd: float
    ntd_gap: float
    ntd_status: str
    rom: float = float("nan")
    rom_residual: float = float("nan")
    ntd_lb: float = float("nan")
    sre2: float = float("nan")
    entropy: float = float("nan")
    violated_facets: int = -1

    def as_dict(self):
        return dict(self.__dict__)


def measure_record(state, tol=NTD_TOL, with_rom=True):
    """All applicable measures of one state."""
    state = np.asarray(state)
    rho = _rho(state)
    D = rho.shape[0]
    r = ntd_result(rho, tol)
    rec = MeasureRecord(r.value, r.certificate.gap, r.certificate.status)
    if with_rom:
        rr = rom_result(rho)
        rec.rom, rec.rom_residual = rr.value, rr.residual
    if D == 2:
        rec.ntd_lb = ntd_lb_qubit(rho)
    elif D == 3:
        rec.ntd_lb = ntd_lb_qutrit(rho)
    elif D == 4:
        rec.violated_facets = violated_facets(rho)
    if state.ndim == 1:
        rec.sre2 = sre(state, 2)
        if D in (4, 8):
            rec.entropy = ent_entropy(state) if D == 4 else mean_entropy(state)
    return rec


# ------------------------------------------------------------------ catalog

@dataclass
class StateCatalogEntry:
    name: str
    state: np.ndarray
    expected: dict = field(default_factory=dict)  # measure -> (value, tolerance)
    note: str = ""


def _ket(*amps):
    return normalize(np.array(amps, dtype=complex))


def t_state():
    """Single-qubit pure state with Bloch vector (1, 1, 1)/sqrt(3)."""
    r = np.ones(3) / math.sqrt(3)
    rho = 0.5 * (np.eye(2) + r[0] * PAULIS["X"] + r[1] * PAULIS["Y"] + r[2] * PAULIS["Z"])
    w, v = np.linalg.eigh(rho)
    return normalize(v[:, -1])


def strange_state():
    return _ket(0, 1, -1)


def norrell_state():
    return _ket(-1, 2, -1)


def hoggar_state():
    return _ket(1 + 1j, 0, -1, 1, -1j, 1, 0, 0)


def w_state():
    return _ket(0, 1, 1, 0, 1, 0, 0, 0)


def ghz_state():
    return _ket(1, 0, 0, 0, 0, 0, 0, 1)


def snap_to_ground(psi, A, tol=1e-9):
    """Project psi onto the lowest eigenspace of A and renormalise.

    Printed maximal violators are rounded; this recovers the exact optimiser
    closest to them.  Returns (state, overlap of the input with that space).
    """
    psi = normalize(psi)
    w, V = np.linalg.eigh((A + A.conj().T) / 2)
    G = V[:, w < w[0] + tol]
    out = G @ (G.conj().T @ psi)
    return normalize(out), float(np.linalg.norm(out))


# printed amplitudes (|00>, |01>, |10>, |11>) of the maximal violators of the eight facet classes
MAX_VIOLATOR_AMPLITUDES = (
    (0.628, -0.23 + 0.23j, -0.23 - 0.23j, 0.628j),
    (0.773, -0.394 + 0.273j, -0.083 + 0.241j, -0.255 + 0.248j),
    (0.817, -0.299 - 0.299j, -0.335 - 0.09j, -0.09 - 0.156j),
    (0.648, 0.185 - 0.535j, -0.262 + 0.108j, 0.381 - 0.185j),
    (0.765, -0.383 + 0.247j, 0.068 + 0.315j, -0.315 + 0.068j),
    (0.459, 0.579 - 0.164j, -0.256j, -0.579 + 0.164j),
    (0.544, -0.272 - 0.035j, -0.391 + 0.119j, -0.663 + 0.153j),
    (0.372, -0.715 - 0.399j, -0.113 + 0.203j, -0.195 - 0.316j),
)
MAX_VIOLATOR_MIN_I = (-1.4641, -1.2361, -1.6397, -1.6171, -1.2915, -1.8042, -1.746, -1.4875)
MAX_VIOLATOR_NTD = (0.2113, 0.3577, 0.3376, 0.2998, 0.3475, 0.3304, 0.2334, 0.3304)

S2_AMPLITUDES = (0.17 - 0.07j, -(0.67 + 0.18j), 0.69)


def _facet_value(name):
    r = int(name[len("I22_"):]) - 1
    f = F.table1_facets()[r]
    return lambda rho: f.value(_rho(rho))


MEASURES = {
    "ntd": ntd,
    "rom": rom,
    "ntd_lb_qubit": ntd_lb_qubit,
    "ntd_lb_qutrit": ntd_lb_qutrit,
    "I3_1": lambda s: qutrit_witnesses(s)[0],
    "I3_2": lambda s: qutrit_witnesses(s)[1],
    "mermin3": mermin3,
    "chsh_dd": chsh_dd,
    "chsh3q": chsh3q,
    "three_body_W": lambda s: three_body_values(s)["W"],
    "three_body_Hoggar": lambda s: three_body_values(s)["Hoggar"],
    "mean_entropy": mean_entropy,
    "sre2": lambda s: sre(s, 2),
}
for _r in range(1, 9):
    MEASURES[f"I22_{_r}"] = _facet_value(f"I22_{_r}")


@lru_cache(maxsize=None)
def catalog():
    """Named states with their reported values as (value, tolerance) pairs."""
    T = t_state()
    A1, A2 = F.qutrit_class_operators()
    s2, s2_overlap = snap_to_ground(np.array(S2_AMPLITUDES), A2.operator)
    out = [
        StateCatalogEntry("T", T, {"ntd": (0.2113, 2e-3), "ntd_lb_qubit": (0.2113, 2e-3)}),
        StateCatalogEntry("strange", strange_state(),
                          {"ntd": (0.5, 2e-3), "I3_1": (-1.0, 1e-9), "ntd_lb_qutrit": (0.5, 2e-3)}),
        StateCatalogEntry("S2", s2, {"ntd": (0.447, 2e-3), "I3_2": (0.5 - math.sqrt(5) / 2, 1e-6)},
                          f"printed amplitudes snapped to the I3_2 ground state (overlap {s2_overlap:.4f})"),
        StateCatalogEntry("norrell", norrell_state(),
                          {"ntd": (1 / 3, 2e-3), "I3_1": (-0.5, 1e-9), "I3_2": (-0.5, 1e-9)}),
        StateCatalogEntry("T2", tensor(T, T), {"ntd": (0.378, 2e-3)}),
        StateCatalogEntry("T3", tensor(T, T, T), {"ntd": (0.509, 2e-3)}),
        StateCatalogEntry("hoggar", hoggar_state(),
                          {"ntd": (0.583, 2e-3), "three_body_Hoggar": (-1518.66, 1e-2),
                           "chsh3q": (4.66, 1e-2)}),
        StateCatalogEntry("W", w_state(),
                          {"three_body_W": (-714.66, 1e-2), "chsh3q": (5.33, 1e-2)}),
        StateCatalogEntry("GHZ", ghz_state(), {"mermin3": (4.0, 1e-2), "mean_entropy": (1.0, 1e-9)}),
    ]
    for r, f in enumerate(F.table1_facets()):
        psi, ov = snap_to_ground(np.array(MAX_VIOLATOR_AMPLITUDES[r]), f.operator)
        out.append(StateCatalogEntry(
            f"psi22_{r + 1}", psi,
            {f"I22_{r + 1}": (MAX_VIOLATOR_MIN_I[r], 2e-3), "ntd": (MAX_VIOLATOR_NTD[r], 2e-3)},
            f"printed amplitudes snapped to the I22_{r + 1} ground space (overlap {ov:.4f})"))
    return tuple(out)


def catalog_entry(name):
    for e in catalog():
        if e.name == name:
            return e
    raise KeyError(name)


def evaluate_entry(entry):
    """Rows (measure, expected, computed, tolerance, ok) for one catalog entry."""
    rows = []
    for m, (want, tol) in entry.expected.items():
        got = float(MEASURES[m](entry.state))
        rows.append((m, want, got, tol, bool(abs(got - want) <= tol)))
    return rows


def catalog_json(entries=None):
    entries = catalog() if entries is None else entries
    doc = []
    for e in entries:
        doc.append({
            "name": e.name,
            "amplitudes": [[float(a.real), float(a.imag)] for a in e.state],
            "expected": {k: {"value": v, "tol": t} for k, (v, t) in e.expected.items()},
            "note": e.note,
        })
    return json.dumps(doc, indent=2)
