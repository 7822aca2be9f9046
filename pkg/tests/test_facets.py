import math
from fractions import Fraction

import numpy as np
import pytest

from stabgeom import facets as F
from stabgeom.cliffstab import enumerate_clifford, stabilizer_vertices

from conftest import random_mixed


def test_one_qubit_facets_are_the_octahedron():
    fs = F.one_qudit_facets(2)
    assert len(fs) == 8
    vs = stabilizer_vertices(2, 1)
    for f in fs:
        vals = [F.evaluate(f, v) for v in vs.vertices]
        assert min(vals) > -1e-12
        assert sum(abs(v) < 1e-9 for v in vals) == 3


def test_qutrit_facets_split_into_two_classes():
    fs = F.one_qudit_facets(3)
    assert len(fs) == 81
    A1, A2 = F.qutrit_class_operators()
    o1, o2 = F.clifford_orbit(A1), F.clifford_orbit(A2)
    assert (len(o1), len(o2)) == (9, 72)
    keys = {f.key() for f in o1} | {f.key() for f in o2}
    assert keys == {f.key() for f in fs}
    vs = stabilizer_vertices(3, 1)
    for f in o1[:3] + o2[:10]:
        vals = np.array([F.evaluate(f, v) for v in vs.vertices])
        assert vals.min() > -1e-12
        # facet: tight on 8 affinely independent vertices of the 8-dim polytope
        assert tight_count(vals) >= 8


def tight_count(vals):
    return int(np.sum(np.abs(vals) < 1e-9))


def test_qutrit_class_spectra():
    A1, A2 = F.qutrit_class_operators()
    assert np.isclose(np.linalg.eigvalsh(A1.operator).min(), -1)
    assert np.isclose(np.linalg.eigvalsh(A2.operator).min(), 0.5 - math.sqrt(5) / 2)


def test_class_representatives_are_facets():
    vs = stabilizer_vertices(2, 2)
    for f in F.table1_facets():
        rank, slack = F.tight_rank(f, vs)
        assert slack > -1e-9
        # tight vertices span a hyperplane of the 15-dim polytope (identity included)
        assert rank == 15


def test_two_qubit_facet_orbits():
    M, cls = F.two_qubit_facets()
    assert M.shape == (22320, 16)
    assert np.bincount(cls).tolist() == [240, 192, 3840, 5760, 1920, 2304, 5760, 2304]
    assert len({tuple(r) for r in M}) == 22320


def test_two_qubit_facets_valid_on_vertices():
    from stabgeom.cliffstab import pauli_expectations
    M, _ = F.two_qubit_facets()
    V = np.array([pauli_expectations(v, 2) for v in stabilizer_vertices(2, 2).vertices])
    vals = V @ M.T
    assert vals.min() > -1e-9


def test_orbit_classes_partition():
    fs = F.clifford_orbit(F.table1_facets()[0]) + F.clifford_orbit(F.table1_facets()[1])
    classes = F.orbit_classes(fs)
    assert sorted(len(c) for c in classes) == [192, 240]
    assert sorted(i for c in classes for i in c) == list(range(len(fs)))


def test_orbit_with_explicit_group():
    f = F.one_qudit_facets(2)[0]
    assert len(F.clifford_orbit(f, enumerate_clifford(2, 1))) == 8
    with pytest.raises(ValueError):
        F.clifford_orbit(f, enumerate_clifford(3, 1))


def test_canonical_form_idempotent():
    c0, cs = F.canonical(4, (2, -6, 0))
    assert (c0, cs) == (2, (1, -3, 0))
    assert F.canonical(c0, cs) == (c0, cs)
    with pytest.raises(ValueError):
        F.canonical(0, (0, 0))


def test_coefficient_form_matches_operator():
    f = F.table1_facets()[2]
    rho = random_mixed(4, 5)
    assert np.isclose(F.evaluate(f, rho), f.value(rho))
    assert np.isclose(f.lhs(rho), f.value(rho) - f.const)
    assert np.array_equal(F.full_vector(f)[:1], [f.const])


def test_invalid_labels():
    with pytest.raises(ValueError):
        F.from_coefficients(1, [1], ["XQ"])
    with pytest.raises(ValueError):
        F.from_coefficients(1, [1, 1], ["II", "XX"])
    with pytest.raises(ValueError):
        F.project_vertices(stabilizer_vertices(2, 2), ["XXX"])


def test_count_violations():
    M, _ = F.two_qubit_facets()
    assert F.count_violations(np.eye(4) / 4, M) == 0
    for v in stabilizer_vertices(2, 2).vertices[::5]:
        assert F.count_violations(v, M) == 0
    assert F.count_violations(np.eye(4) / 4, F.table1_facets()) == 0


def test_projection_sizes():
    assert len(F.octahedron()) == 6
    assert len(F.chsh_projection().extreme_points()) > 0
    pp = F.two_body_projection()
    assert (len(pp), pp.dim) == (80, 12)
    assert len(F.three_body_projection()) == 918


def test_chsh_projection_facets():
    pp = F.chsh_projection()
    # XX and XY anticommute, so the tight points of <XX> + <XY> = 1 sit on the axes
    tight = [p for p in pp.points if p[0] + p[1] == 1]
    assert len(tight) >= 4
    fs = F.polytope_facets(pp)
    rows = {(f.const,) + f.coeffs for f in fs}
    # <XX> + <XY> <= 1 is a facet, CHSH <= 2 is valid but not a facet
    assert (1, -1, -1, 0, 0) in rows
    assert (2, -1, -1, -1, 1) not in rows
    pts = pp.as_array()
    assert (2 - pts @ [1, 1, 1, -1]).min() >= 0


def test_octahedron_facets():
    fs = F.polytope_facets(F.octahedron())
    assert len(fs) == 8
    assert {(f.const,) + f.coeffs for f in fs} == {(1,) + s for s in
                                                   [(a, b, c) for a in (1, -1) for b in (1, -1) for c in (1, -1)]}


def test_three_body_witnesses_valid_on_vertices():
    vs = stabilizer_vertices(2, 3)
    for f in list(F.three_body_facets()) + [F.chsh3q_facet()]:
        vals = np.array([F.evaluate(f, v) for v in vs.vertices])
        assert vals.min() > -1e-9


def test_facet_file_round_trip():
    fs = F.table1_facets()
    text = F.export_facets(fs)
    assert text.splitlines()[0].startswith("# const IX")
    back = F.import_facets(text)
    assert [(f.const, f.coeffs) for f in back] == [(f.const, f.coeffs) for f in fs]
    assert F.export_facets(back) == text
    with pytest.raises(ValueError):
        F.import_facets("1 2 3\n")
    with pytest.raises(ValueError):
        F.import_facets("# const X Y\n1 2\n")


def test_one_qubit_scale():
    f = F.one_qudit_facets(2)[0]
    assert f.scale == Fraction(1, 2)
    assert np.isclose(np.trace(f.operator).real, 1)
