"""Facet inequalities of stabilizer polytopes.

A :class:`FacetInequality` is a linear witness on density matrices, oriented
so that stabilizer states give a value ``>= 0``.  Qubit facets carry an exact
integer coefficient form over Pauli words,

    const + sum_i coeffs[i] * <labels[i]>  >=  0,

together with the Hermitian operator ``scale * (const * I + sum coeffs * P)``.
Qutrit facets only have the operator form.
"""
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .cliffstab import (CliffordElement, displacement, enumerate_clifford, pauli_action,
                        pauli_basis, pauli_labels, pauli_word, stabilizer_vertices)
from .hull import hull_facets
from .qmat import dag
from .simplex import LPStatus, solve_lp

VIOLATION_TOL = 1e-10
TIGHT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FacetInequality:
    d: int
    n: int
    operator: np.ndarray
    labels: tuple = None
    coeffs: tuple = None
    const: int = None
    scale: Fraction = Fraction(1)
    name: str = ""

    @property
    def has_integer_form(self):
        return self.coeffs is not None

    def key(self):
        """Exact hashable identity (integer form when available)."""
        if self.has_integer_form:
            return (self.labels, self.const, self.coeffs)
        return _matrix_key(self.operator)

    def value(self, rho):
        """Coefficient-form value const + sum coeffs * <P> (qubits only)."""
        if not self.has_integer_form:
            raise ValueError("facet has no coefficient form")
        ev = _expectations(rho, self.labels)
        return float(self.const + np.dot(self.coeffs, ev))

    def lhs(self, rho):
        """sum coeffs * <P> without the constant."""
        return self.value(rho) - self.const

    def __repr__(self):
        if self.has_integer_form:
            return f"FacetInequality({self.const}, {self.coeffs}, labels={self.labels})"
        return f"FacetInequality(d={self.d}, n={self.n}, name={self.name!r})"


def _expectations(rho, labels):
    rho = np.asarray(rho)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    P = np.array([pauli_word(w) for w in labels])
    return np.real(np.einsum("pij,ji->p", P, rho))


def canonical(const, coeffs):
    """Divide (const, coeffs) by the gcd of all entries; orientation is kept."""
    vals = [int(const)] + [int(c) for c in coeffs]
    g = 0
    for v in vals:
        g = math.gcd(g, v)
    if g == 0:
        raise ValueError("zero inequality")
    return vals[0] // g, tuple(v // g for v in vals[1:])


def from_coefficients(const, coeffs, labels, scale=1, name=""):
    """Integer-form facet ``const + sum coeffs <labels> >= 0``."""
    labels = tuple(labels)
    if len(labels) != len(coeffs):
        raise ValueError("labels and coefficients differ in length")
    n = len(labels[0])
    if any(len(w) != n or set(w) - set("IXYZ") for w in labels):
        raise ValueError(f"invalid Pauli labels {labels}")
    if "I" * n in labels:
        raise ValueError("put the identity coefficient in const")
    c0, cs = canonical(const, coeffs)
    scale = Fraction(scale)
    if scale <= 0:
        raise ValueError("positive scale required")
    return FacetInequality(2, n, float(scale) * _operator(c0, cs, labels), labels, cs, c0, scale, name)


def from_full_vector(alpha, n, name=""):
    """Facet from a coefficient vector over all 4^n Pauli words (IXYZ order)."""
    labels = pauli_labels(n)
    alpha = [int(a) for a in alpha]
    return from_coefficients(alpha[0], alpha[1:], labels[1:], name=name)


def full_vector(f):
    """Integer vector over all 4^n Pauli words with the constant first."""
    labels = pauli_labels(f.n)
    pos = {w: i for i, w in enumerate(labels)}
    out = np.zeros(len(labels), dtype=np.int64)
    out[0] = f.const
    for c, w in zip(f.coeffs, f.labels):
        out[pos[w]] += c
    return out


def evaluate(f, rho):
    """Tr(rho A) for the facet operator A."""
    rho = np.asarray(rho)
    if rho.ndim == 1:
        return float(np.real(np.vdot(rho, f.operator @ rho)))
    if rho.shape != f.operator.shape:
        raise ValueError(f"state of shape {rho.shape} does not match facet {f.operator.shape}")
    return float(np.real(np.trace(rho @ f.operator)))


def count_violations(rho, facets, tol=VIOLATION_TOL):
    """Number of facets with evaluate(f, rho) < -tol.

    ``facets`` is a list of :class:`FacetInequality` or an integer array of
    full Pauli vectors (rows, constant first) as returned by
    :func:`facet_matrix`.
    """
    if isinstance(facets, np.ndarray):
        ev = _expectations(rho, pauli_labels(int(round(np.log(facets.shape[1]) / np.log(4)))))
        return int((facets @ ev < -tol).sum())
    return sum(evaluate(f, rho) < -tol for f in facets)


def facet_matrix(facets):
    return np.array([full_vector(f) for f in facets])


# ---------------------------------------------------------------- one qudit

def _eigprojectors(D, d):
    """Projector onto the omega^q eigenspace of D for q = 0..d-1."""
    w = np.exp(2j * np.pi / d)
    vals, vecs = np.linalg.eig(D)
    out = []
    for q in range(d):
        j = int(np.argmin(np.abs(vals - w**q)))
        if abs(vals[j] - w**q) > 1e-9:
            raise ValueError("unexpected spectrum")
        v = vecs[:, j] / np.linalg.norm(vecs[:, j])
        out.append(np.outer(v, v.conj()))
    return out


def qudit_axes(d):
    """The d + 1 displacement operators whose eigenbases are the stabilizer bases.

    Order: Z, X, then Z^a X for a = 1..d-1 (qubits: Z, X, Y).
    """
    return [displacement(d, 1, 0), displacement(d, 0, 1)] + [displacement(d, a, 1) for a in range(1, d)]


def one_qudit_facets(d):
    """All d^(d+1) facets A^q = -I + sum_j Pi_j^{q_j} of the one-qudit polytope."""
    if d not in (2, 3):
        raise ValueError("only d = 2 and d = 3 are supported")
    projs = [_eigprojectors(D, d) for D in qudit_axes(d)]
    out = []
    for q in itertools.product(range(d), repeat=d + 1):
        A = -np.eye(d, dtype=complex) + sum(projs[j][qj] for j, qj in enumerate(q))
        name = "A" + "".join(map(str, q))
        if d == 2:
            # A = (I + s_z Z + s_x X + s_y Y) / 2 with s = (-1)^q
            s = [(-1) ** qj for qj in q]
            f = from_coefficients(1, [s[1], s[2], s[0]], ["X", "Y", "Z"], scale=Fraction(1, 2), name=name)
            out.append(f)
        else:
            out.append(FacetInequality(d, 1, A, name=name))
    return out


def qutrit_class_operators():
    """Representatives of the two qutrit facet classes, (A1, A2).

    A = (1/3) sum_{a,b} c_ab D_ab^dag with c = 1 everywhere for A1; A2 carries
    omega on D_{2,1} and omega^* on D_{1,2} (indices (clock, shift)).
    """
    w = np.exp(2j * np.pi / 3)
    A1 = np.zeros((3, 3), dtype=complex)
    A2 = np.zeros((3, 3), dtype=complex)
    for a, b in itertools.product(range(3), repeat=2):
        Dd = dag(displacement(3, a, b))
        A1 += Dd
        c = w if (a, b) == (2, 1) else w.conjugate() if (a, b) == (1, 2) else 1
        A2 += c * Dd
    return (FacetInequality(3, 1, A1 / 3, name="I3_1"), FacetInequality(3, 1, A2 / 3, name="I3_2"))


# ---------------------------------------------------------------- two qubits

CLASS_REPRESENTATIVES = (
    (1, 1, 0, 0, 0, 0, -1, 1, 1, 1, 0, 0, 0, 0, -1, -1),
    (1, 1, -1, 0, 0, 0, 0, 1, 0, 0, 0, -1, 0, 0, 0, -1),
    (2, 1, 1, 1, 1, 0, 0, 2, 0, 1, -1, 1, -2, -1, -1, -1),
    (2, 0, 2, 0, 0, 0, 0, 2, -1, 1, -1, 1, -1, -1, -1, -1),
    (2, 0, 0, -1, -1, 1, -1, 2, 0, 2, 0, -1, 0, 0, -2, -1),
    (2, 0, 1, 0, 1, 1, 0, -1, -1, 1, 0, 1, -1, -1, 0, -1),
    (3, -1, 0, -2, -2, 2, -1, 3, 0, 2, 1, -1, 1, 1, -2, -2),
    (4, 3, 1, 3, 2, 1, -1, 3, 2, 3, -1, 1, -3, -2, -2, -2),
)


def table1_facets():
    """The eight two-qubit class representatives I_1 ... I_8."""
    return [from_full_vector(row, 2, name=f"I22_{r + 1}") for r, row in enumerate(CLASS_REPRESENTATIVES)]


@lru_cache(maxsize=None)
def _signed_perms(d, n):
    return np.array([pauli_action(el.unitary, n) for el in enumerate_clifford(d, n)])


def clifford_orbit(f, group=None):
    """Orbit {C f C^dag} of a facet under a list of Clifford elements.

    Returns a list of distinct facets (exact integer dedup for qubits,
    rounded-operator dedup for qutrits) in first-seen order.
    """
    if f.has_integer_form:
        if group is None:
            perms = _signed_perms(f.d, f.n)
        else:
            if any(_unitary(g).shape != f.operator.shape for g in group):
                raise ValueError("group and facet dimensions differ")
            perms = np.array([pauli_action(_unitary(g), f.n) for g in group])
        rows = _orbit_rows(full_vector(f), perms)
        return [_from_row(r, f) for r in rows]
    if group is None:
        group = enumerate_clifford(f.d, f.n)
    seen = {}
    for g in group:
        U = _unitary(g)
        if U.shape != f.operator.shape:
            raise ValueError("group and facet dimensions differ")
        A = U @ f.operator @ dag(U)
        seen.setdefault(_matrix_key(A), A)
    return [FacetInequality(f.d, f.n, A, name=f.name) for A in seen.values()]


def _matrix_key(A):
    # adding 0.0 maps -0.0 to 0.0 so equal matrices give equal bytes
    return (np.round(A.real, 8) + 0.0).tobytes() + (np.round(A.imag, 8) + 0.0).tobytes()


def _unitary(g):
    return g.unitary if isinstance(g, CliffordElement) else np.asarray(g)


def _orbit_rows(alpha, perms):
    # a facet alpha.<P> >= 0 maps to alpha.<C^dag P C> = (M^T alpha).<P>
    images = np.einsum("p,gpq->gq", alpha, perms)
    _, first = np.unique(images, axis=0, return_index=True)
    return images[np.sort(first)]


def _from_row(row, template):
    labels = pauli_labels(template.n)
    return from_coefficients(row[0], row[1:], labels[1:], template.scale, template.name)


@lru_cache(maxsize=None)
def two_qubit_facets():
    """All facets of the two-qubit polytope as (matrix, class_ids).

    ``matrix`` has one integer row per facet over the 16 Pauli words
    (constant first); ``class_ids[i]`` is the class representative (0-based) whose
    orbit contains facet i.
    """
    perms = _signed_perms(2, 2)
    rows, ids, seen = [], [], set()
    for r, alpha in enumerate(CLASS_REPRESENTATIVES):
        for row in _orbit_rows(np.array(alpha), perms):
            t = tuple(row)
            if t not in seen:
                seen.add(t)
                rows.append(row)
                ids.append(r)
    m = np.array(rows)
    m.setflags(write=False)
    ids = np.array(ids)
    ids.setflags(write=False)
    return m, ids


def orbit_classes(facets, group=None):
    """Partition facets into Clifford classes; returns a list of lists of indices."""
    remaining = {f.key(): i for i, f in enumerate(facets)}
    classes = []
    for i, f in enumerate(facets):
        if f.key() not in remaining:
            continue
        cls = []
        for g in clifford_orbit(f, group):
            j = remaining.pop(g.key(), None)
            if j is not None:
                cls.append(j)
        classes.append(sorted(cls))
    return classes


# ------------------------------------------------------------ three qubits

THREE_BODY_W = (-141, -103, -153, -359, -141, -71, -10, -72, -146, -79, 141, 67, 101, -99,
                17, 78, -292, 366, -157, -95, 151, -225, -45, -89, -170, 232, 288)
THREE_BODY_W_BOUND = -608
THREE_BODY_HOGGAR = (278, -348, -500, -330, -116, 42, -204, 406, -60, 317, 15, 143, 687, -241,
                     399, 567, -229, 303, -27, -419, 339, -181, 507, -433, -271, 609, 89)
THREE_BODY_HOGGAR_BOUND = -1236


def three_body_labels():
    return ["".join(w) for w in itertools.product("XYZ", repeat=3)]


def two_body_xy_labels():
    """The 12 two-body X/Y correlators on three qubits (pair order 12, 13, 23)."""
    out = []
    for i, j in ((0, 1), (0, 2), (1, 2)):
        for a, b in itertools.product("XY", repeat=2):
            w = ["I"] * 3
            w[i], w[j] = a, b
            out.append("".join(w))
    return out


def three_body_facets():
    """The two printed three-body inequalities, stored verbatim as expr >= bound."""
    labels = three_body_labels()
    w = FacetInequality(2, 3, _operator(-THREE_BODY_W_BOUND, THREE_BODY_W, labels), tuple(labels),
                        THREE_BODY_W, -THREE_BODY_W_BOUND, Fraction(1), "three-body-W")
    h = FacetInequality(2, 3, _operator(-THREE_BODY_HOGGAR_BOUND, THREE_BODY_HOGGAR, labels),
                        tuple(labels), THREE_BODY_HOGGAR, -THREE_BODY_HOGGAR_BOUND, Fraction(1),
                        "three-body-Hoggar")
    return w, h


def _operator(const, coeffs, labels):
    n = len(labels[0])
    op = const * np.eye(2**n, dtype=complex)
    for c, w in zip(coeffs, labels):
        op = op + c * pauli_word(w)
    return op


# Two-body witness, written as 4 - sum c <P> >= 0 for the "<= 4" form.
CHSH3Q_TERMS = {"XIX": 2, "XXI": -1, "IXX": 3, "XYI": -3, "YXI": 1, "XIY": -2, "IXY": -3,
                "IYX": 1, "YYI": 3, "YIY": 2, "IYY": -1}
CHSH3Q_BOUND = 4


def chsh3q_facet():
    labels = two_body_xy_labels()
    coeffs = tuple(-CHSH3Q_TERMS.get(w, 0) for w in labels)
    return FacetInequality(2, 3, _operator(CHSH3Q_BOUND, coeffs, labels), tuple(labels), coeffs,
                           CHSH3Q_BOUND, Fraction(1), "chsh3q")


# ------------------------------------------------------------- projections

@dataclass(frozen=True, eq=False)
class ProjectedPolytope:
    """Distinct nonzero projections of stabilizer vertices.

    The origin (image of the maximally mixed state, always inside) is not
    listed.  Not every point need be extreme; see :meth:`extreme_points`.
    """
    labels: tuple
    points: tuple  # tuples of Fraction, sorted
    provenance: tuple  # per point, the vertex indices that project onto it

    def __len__(self):
        return len(self.points)

    @property
    def dim(self):
        return len(self.labels)

    def as_array(self):
        return np.array([[float(x) for x in p] for p in self.points])

    def extreme_points(self):
        """The points that are vertices of the projected polytope."""
        if not hasattr(self, "_extreme"):
            mask = _extreme_mask(self.as_array()) if self.points else []
            object.__setattr__(self, "_extreme", tuple(p for p, e in zip(self.points, mask) if e))
        return self._extreme


def project_vertices(vs, labels):
    """Exact projection of stabilizer vertices onto Pauli-correlator coordinates."""
    labels = tuple(labels)
    n = vs.n
    if vs.d != 2:
        raise ValueError("projections are defined for qubits")
    for w in labels:
        if len(w) != n or set(w) - set("IXYZ") or w == "I" * n:
            raise ValueError(f"invalid Pauli label {w!r}")
    ev = _expectations_of_vectors(vs.vertices, labels)
    exact = np.rint(ev)
    if np.abs(ev - exact).max() > 1e-9:
        raise ValueError("stabilizer correlators are not integral")
    prov = {}
    for i, row in enumerate(exact.astype(int)):
        if row.any():
            prov.setdefault(tuple(Fraction(int(x)) for x in row), []).append(i)
    keys = sorted(prov)
    return ProjectedPolytope(labels, tuple(keys), tuple(tuple(prov[k]) for k in keys))


def _extreme_mask(P):
    """True for rows of P that are not convex combinations of the other rows.

    Rows of maximal Euclidean norm are always extreme; the others are
    checked with a feasibility LP.
    """
    norms = np.einsum("ij,ij->i", P, P)
    mask = np.ones(len(P), dtype=bool)
    for i in np.flatnonzero(norms < norms.max() - 1e-9):
        others = np.delete(P, i, axis=0)
        A = np.vstack([others.T, np.ones(len(others))])
        b = np.append(P[i], 1.0)
        res = solve_lp(np.zeros(len(others)), A, b)
        mask[i] = res.status != LPStatus.OPTIMAL
    return mask


def _expectations_of_vectors(vectors, labels):
    P = np.array([pauli_word(w) for w in labels])
    return np.real(np.einsum("si,pij,sj->sp", vectors.conj(), P, vectors))


def octahedron():
    return project_vertices(stabilizer_vertices(2, 1), ("X", "Y", "Z"))


def chsh_projection():
    return project_vertices(stabilizer_vertices(2, 2), ("XX", "XY", "YX", "YY"))


def two_body_projection():
    return project_vertices(stabilizer_vertices(2, 3), two_body_xy_labels())


def three_body_projection():
    return project_vertices(stabilizer_vertices(2, 3), three_body_labels())


# ------------------------------------------------------------- facet files

def polytope_facets(pp, name=""):
    """Facets of a projected polytope by exact double description."""
    if len(pp.points) == 0:
        raise ValueError("empty polytope")
    return [from_coefficients(row[0], row[1:], pp.labels, name=name)
            for row in hull_facets(pp.points)]


def export_facets(facets, labels=None):
    """Text facet file: a header naming the word order, then one integer row per facet."""
    if labels is None:
        labels = facets[0].labels
    labels = tuple(labels)
    lines = ["# const " + " ".join(labels)]
    for f in facets:
        pos = {w: c for w, c in zip(f.labels, f.coeffs)}
        if set(pos) - set(labels):
            raise ValueError("facet uses words outside the header")
        lines.append(" ".join(str(v) for v in [f.const] + [pos.get(w, 0) for w in labels]))
    return "\n".join(lines) + "\n"


def import_facets(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("# const"):
        raise ValueError("missing facet file header")
    labels = tuple(lines[0].split()[2:])
    out = []
    for ln in lines[1:]:
        vals = [int(v) for v in ln.split()]
        if len(vals) != len(labels) + 1:
            raise ValueError(f"row has {len(vals)} entries, expected {len(labels) + 1}")
        n = len(labels[0])
        out.append(FacetInequality(2, n, _operator(vals[0], vals[1:], labels), labels,
                                   tuple(vals[1:]), vals[0]))
    return out


def tight_rank(f, vs):
    """Affine rank of the vertices on which f is tight, and the minimum slack."""
    vals = np.array([evaluate(f, v) for v in vs.vertices])
    tight = np.abs(vals) < TIGHT_TOL
    P = pauli_basis(vs.n)
    coords = np.real(np.einsum("si,pij,sj->sp", vs.vertices[tight].conj(), P, vs.vertices[tight]))
    return int(np.linalg.matrix_rank(coords, tol=1e-8)), float(vals.min())
