"""Slow reference implementations used to cross-check the package.

These work on plain Python ints and Fractions and share no code with
``sumprod``; every comparison in the test suite goes through one of them.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction


def norm(v, p):
    if p is None:
        return Fraction(v)
    return Fraction(v).numerator * pow(Fraction(v).denominator, p - 2, p) % p


def inv(x, p):
    if p is None:
        return 1 / Fraction(x)
    return pow(x, p - 2, p)  # Fermat, deliberately not pow(x, -1, p)


def apply(op, x, y, p):
    if op == "sum":
        v = x + y
    elif op == "difference":
        v = x - y
    elif op == "product":
        v = x * y
    elif op == "ratio":
        v = x * inv(y, p)
    else:
        raise ValueError(op)
    return v if p is None else v % p


def rep_counts(X, Y, op, p):
    return Counter(apply(op, x, y, p) for x in X for y in Y)


def energy_tuples(X, Y, op, n, p):
    """Count n-tuples of pairs sharing a common value by explicit enumeration."""
    pairs = [apply(op, x, y, p) for x in X for y in Y]
    return sum(1 for t in itertools.product(pairs, repeat=n) if len(set(t)) == 1)


def on_line(x, y, d, c, p):
    """(x, y) lies on y = (1/d)(x/c - 1), i.e. d c y = x - c."""
    diff = d * c * y - (x - c)
    return diff == 0 if p is None else diff % p == 0


def incidences(X, Y, params, p):
    return sum(1 for x in X for y in Y for d, c in params if on_line(x, y, d, c, p))


def popular(A, B, p):
    """P, A', covered pairs straight from the definitions (float logs)."""
    r = rep_counts(A, B, "product", p)
    nA, nB, nAB = len(A), len(B), len(r)
    thr = nA * nB / (math.log(nA) * nAB)
    P = {x for x, k in r.items() if k >= thr}
    rows = {a: {b for b in B if apply("product", a, b, p) in P} for a in A}
    A_prime = sorted(a for a in A if len(rows[a]) >= 2 * nB / 3)
    covered = sum(len(v) for v in rows.values())
    return P, A_prime, covered, rows


def scaling_classes(A, B, p):
    """Union-find classes of A^2 x B^2 under (a,a',b,b') ~ (la, la', b/l, b'/l)."""
    A, B = list(A), list(B)
    Aset, Bset = set(A), set(B)
    quads = list(itertools.product(A, A, B, B))
    parent = {q: q for q in quads}

    def find(q):
        while parent[q] != q:
            parent[q] = parent[parent[q]]
            q = parent[q]
        return q

    lams = {apply("ratio", x, y, p) for x in A for y in A}
    for q in quads:
        a, a2, b, b2 = q
        for lam in lams:
            img = (
                apply("product", lam, a, p),
                apply("product", lam, a2, p),
                apply("ratio", b, lam, p),
                apply("ratio", b2, lam, p),
            )
            if img[0] in Aset and img[1] in Aset and img[2] in Bset and img[3] in Bset:
                ra, rb = find(q), find(img)
                if ra != rb:
                    parent[ra] = rb
    return Counter(find(q) for q in quads)


def mult_order(g, p):
    k, x = 1, g % p
    while x != 1:
        x = x * g % p
        k += 1
    return k


def min_shift_product(p, n):
    best = None
    for combo in itertools.combinations(range(1, p), n):
        s = len({a * (b + 1) % p for a in combo for b in combo})
        if best is None or (s, combo) < best:
            best = (s, combo)
    return best
