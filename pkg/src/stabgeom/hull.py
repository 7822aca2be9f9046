"""Exact facet enumeration by the double description method.

Facets c0 + c.v >= 0 of conv(points) are the extreme rays of the cone
{y : (1, v_i).y >= 0 for all i}.  The cone is built up one constraint at a
time (rows in lexicographic order).  All arithmetic is on Python integers, so
nothing overflows; rays are kept reduced by their gcd.

Two rays are adjacent when no third ray is tight on every constraint they
share.  That test is done on bitsets: for each constraint the set of rays
tight on it is one Python int, and a shared zero set is contained in another
ray's zero set exactly when the AND over its constraints has a third bit.
"""
import math
from fractions import Fraction

import numpy as np


class DegenerateInput(ValueError):
    pass


def _gcd_reduce(v):
    g = 0
    for x in v:
        g = math.gcd(g, x)
    return tuple(x // g for x in v) if g > 1 else tuple(v)


def _integer_rows(points):
    """Rows (1, v) scaled to integers (a positive factor does not change the cone)."""
    rows = []
    for p in points:
        p = [Fraction(x) for x in p]
        den = 1
        for x in p:
            den = den * x.denominator // math.gcd(den, x.denominator)
        rows.append(tuple([den] + [int(x * den) for x in p]))
    return rows


def rref(rows):
    """Exact reduced row echelon form; returns (matrix as Fractions, pivot columns)."""
    M = [[Fraction(x) for x in r] for r in rows]
    pivots = []
    r = 0
    ncols = len(M[0]) if M else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def affine_hull(points):
    """Integer equations (c0, c) with c0 + c.v = 0 for every point."""
    rows = _integer_rows(points)
    R, pivots = rref(rows)
    ncols = len(rows[0])
    free = [c for c in range(ncols) if c not in pivots]
    eqs = []
    for f in free:
        y = [Fraction(0)] * ncols
        y[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            y[pc] = -R[i][f]
        den = 1
        for x in y:
            den = den * x.denominator // math.gcd(den, x.denominator)
        eqs.append(_gcd_reduce([int(x * den) for x in y]))
    return eqs


def _initial_rays(rows, basis):
    """Extreme rays of {y : B y >= 0}: the columns of B^{-1}, as integer vectors."""
    n = len(basis)
    B = [list(rows[i]) + [int(j == k) for j in range(n)] for k, i in enumerate(basis)]
    R, _ = rref(B)
    inv = [r[n:] for r in R]
    rays = []
    for j in range(n):
        col = [inv[i][j] for i in range(n)]
        den = 1
        for x in col:
            den = den * x.denominator // math.gcd(den, x.denominator)
        rays.append(_gcd_reduce([int(x * den) for x in col]))
    return rays


def double_description(rows):
    """Extreme rays of {y : a.y >= 0 for a in rows}; rows must span the full space.

    Returns a list of (ray, zero_set_bitmask) with bit i set when ray is tight
    on rows[i].
    """
    dim = len(rows[0])
    order = sorted(range(len(rows)), key=lambda i: rows[i])
    basis = []
    for i in order:
        _, piv = rref([rows[j] for j in basis + [i]])
        if len(piv) == len(basis) + 1:
            basis.append(i)
        if len(basis) == dim:
            break
    if len(basis) < dim:
        raise DegenerateInput("points do not span their ambient space")
    rays = _initial_rays(rows, basis)
    zeros = []
    for k in range(dim):
        z = 0
        for j, i in enumerate(basis):
            if j != k:
                z |= 1 << i
        zeros.append(z)
    done = list(basis)
    for i in order:
        if i in basis:
            continue
        a = rows[i]
        vals = [sum(x * y for x, y in zip(a, r)) for r in rays]
        plus = [k for k, v in enumerate(vals) if v > 0]
        minus = [k for k, v in enumerate(vals) if v < 0]
        zero = [k for k, v in enumerate(vals) if v == 0]
        new_rays, new_zeros = [], []
        if plus and minus:
            for p, m, inter in _adjacent_pairs(plus, minus, zeros, done, dim):
                vp, vm = vals[p], vals[m]
                r = _gcd_reduce([vp * y - vm * x for x, y in zip(rays[p], rays[m])])
                new_rays.append(r)
                new_zeros.append(inter | (1 << i))
        keep = plus + zero
        rays = [rays[k] for k in keep] + new_rays
        zeros = [zeros[k] | ((1 << i) if vals[k] == 0 else 0) for k in keep] + new_zeros
        done.append(i)
    return list(zip(rays, zeros))


def _adjacent_pairs(plus, minus, zeros, done, dim):
    """Adjacent (plus, minus) ray pairs with their shared zero set."""
    nwords = (max(done) >> 6) + 1
    Z = np.zeros((len(zeros), nwords), dtype=np.uint64)
    for k, z in enumerate(zeros):
        for w in range(nwords):
            Z[k, w] = (z >> (64 * w)) & 0xFFFFFFFFFFFFFFFF
    # rays tight on each constraint, as bitsets over ray indices
    tight = {}
    for k, z in enumerate(zeros):
        while z:
            low = z & -z
            c = low.bit_length() - 1
            tight[c] = tight.get(c, 0) | (1 << k)
            z ^= low
    minus_arr = np.array(minus)
    Zm = Z[minus_arr]
    need = dim - 2
    out = []
    for p in plus:
        inter = Zm & Z[p]
        cnt = np.bitwise_count(inter).sum(axis=1)
        for j in np.flatnonzero(cnt >= need):
            m = int(minus_arr[j])
            shared = zeros[p] & zeros[m]
            pair = (1 << p) | (1 << m)
            common = -1 if shared else pair
            s = shared
            while s and common != pair:
                low = s & -s
                common &= tight[low.bit_length() - 1]
                s ^= low
            if common == pair:
                out.append((p, m, shared))
    return out


def hull_facets(points):
    """Facets of conv(points) as integer tuples (c0, c1, ..., cD), meaning c0 + c.v >= 0.

    For a lower-dimensional point set, coordinates outside a pivot subset are
    dropped (the facets are then valid on the affine hull, returned by
    :func:`affine_hull`) and the returned tuples have zeros there.
    """
    rows = _integer_rows(points)
    ncols = len(rows[0])
    _, pivots = rref(rows)
    if len(pivots) < ncols:
        sub = [tuple(r[c] for c in pivots) for r in rows]
        out = []
        for ray, _ in double_description(sub):
            full = [0] * ncols
            for c, x in zip(pivots, ray):
                full[c] = x
            out.append(tuple(full))
        return sorted(out)
    return sorted(ray for ray, _ in double_description(rows))
