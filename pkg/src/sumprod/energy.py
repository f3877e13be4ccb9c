"""Representation functions, moment energies and dyadic pigeonholing."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Union

import numpy as np

from .errors import DivisionByZero, EmptyHistogram, TooLarge
from .field import Element
from .setops import FSet, _check_ctx

Moment = Union[int, Fraction, str]

BRUTEFORCE_LIMIT = 10**8


@dataclass(frozen=True)
class RepHistogram:
    """r(x) = number of pairs (u, y) in left x right with u o y = x.

    ``left`` may itself be a histogram, in which case each left element is
    weighted by its count and the result counts composite tuples (e.g. the
    triples (b, a, a') behind r_{BA/A}).
    """

    op: str
    left: Union[FSet, "RepHistogram"]
    right: FSet
    counts: Dict[Element, int]

    @property
    def ctx(self):
        return self.right.ctx

    @property
    def mass(self) -> int:
        return sum(self.counts.values())

    @property
    def support(self) -> FSet:
        return FSet(self.ctx, tuple(self.counts))

    @property
    def max_count(self) -> int:
        return max(self.counts.values()) if self.counts else 0

    def __getitem__(self, x) -> int:
        return self.counts.get(x, 0)

    def __len__(self) -> int:
        return len(self.counts)

    def items(self):
        return sorted(self.counts.items())

    def restrict(self, keep) -> "RepHistogram":
        """Sub-histogram on the keys in ``keep`` (bookkeeping only)."""
        return RepHistogram(self.op, self.left, self.right, {x: c for x, c in self.counts.items() if x in keep})

    def to_json(self) -> dict:
        fmt = self.ctx.format
        return {"op": self.op, "counts": [[fmt(x), c] for x, c in self.items()]}


def _left_weights(left) -> Dict[Element, int]:
    if isinstance(left, RepHistogram):
        return left.counts
    return {x: 1 for x in left}


def rep_function(X: Union[FSet, RepHistogram], Y: FSet, op: str = "ratio") -> RepHistogram:
    """Histogram of x o y over X x Y (X optionally weighted)."""
    ctx = Y.ctx
    if isinstance(X, FSet):
        _check_ctx(X, Y)
    elif X.ctx != ctx:
        _check_ctx(X.support, Y)
    p = ctx.p
    ys = list(Y)
    if op == "ratio":
        if Y.has_zero():
            raise DivisionByZero("ratio histogram with 0 in the denominator set")
        ys = [ctx.inv(y) for y in ys]
    weights = _left_weights(X)
    counts: Counter = Counter()
    for x, w in weights.items():
        if op in ("ratio", "product"):
            vals = [x * y for y in ys]
        elif op == "sum":
            vals = [x + y for y in ys]
        elif op == "difference":
            vals = [x - y for y in ys]
        else:
            raise ValueError(f"unknown op {op!r}")
        if p is not None:
            vals = [v % p for v in vals]
        if w == 1:
            counts.update(vals)
        else:
            for v in vals:
                counts[v] += w
    return RepHistogram(op, X, Y, dict(counts))


def parse_moment(n: Moment) -> Fraction:
    n = Fraction(n)
    if n < 1:
        raise ValueError("moment must be >= 1")
    return n


def power_sum(values, n: Moment):
    """sum v**n: exact for integer n, correctly rounded float otherwise."""
    n = parse_moment(n)
    if n.denominator == 1:
        k = n.numerator
        return sum(v**k for v in values)
    e = float(n)
    return math.fsum(float(v) ** e for v in values)


def energy_moment(h: RepHistogram, n: Moment):
    """E_n = sum_x r(x)**n."""
    return power_sum(h.counts.values(), n)


def _pair_values(X: FSet, Y: FSet, op: str):
    return [(x, y) for x in X for y in Y]


def energy_bruteforce(X: FSet, Y: FSet, op: str, n: int) -> int:
    """Count 2n-tuples with equal x_k o y_k by direct enumeration.

    Independent of :func:`rep_function`: ratio and product equalities are
    tested by cross-multiplication, never by computing and grouping keys.
    """
    ctx = _check_ctx(X, Y)
    if n < 1 or int(n) != n:
        raise ValueError("bruteforce energy needs a positive integer moment")
    n = int(n)
    m = len(X) * len(Y)
    if m**n > BRUTEFORCE_LIMIT:
        raise TooLarge(f"{m}^{n} tuples exceeds the enumeration guard")
    if op == "ratio" and Y.has_zero():
        raise DivisionByZero("ratio with 0 in the denominator set")
    if m == 0:
        return 0
    pairs = _pair_values(X, Y, op)
    p = ctx.p

    def same(i, j):
        (x1, y1), (x2, y2) = pairs[i], pairs[j]
        if op == "ratio":
            d = x1 * y2 - x2 * y1
        elif op == "product":
            d = x1 * y1 - x2 * y2
        elif op == "sum":
            d = (x1 + y1) - (x2 + y2)
        elif op == "difference":
            d = (x1 - y1) - (x2 - y2)
        else:
            raise ValueError(f"unknown op {op!r}")
        return d == 0 if p is None else d % p == 0

    eq = np.array([[same(i, j) for j in range(m)] for i in range(m)], dtype=bool)
    if n == 1:
        return m
    # all n-tuples (i_1..i_n) with eq[i_k, i_{k+1}] for every k
    total = 0
    for i in range(m):
        acc = eq[i]
        for k in range(2, n):
            shape = (m,) * (k - 1)
            acc = acc.reshape(shape + (1,)) & eq.reshape((1,) * (k - 2) + (m, m))
        total += int(acc.sum())
    return total


@dataclass(frozen=True)
class DyadicBucket:
    """Level set {x : tau <= r(x) < 2 tau} with weight |members| * tau**n."""

    tau: int
    members: FSet
    weight_exponent: Fraction
    weight: Union[int, float]

    def __len__(self):
        return len(self.members)

    def to_json(self) -> dict:
        w = self.weight
        return {
            "tau": self.tau,
            "members": self.members.to_list(),
            "weight_exponent": str(self.weight_exponent),
            "weight": w,
        }


def bucket_weight(size: int, tau: int, n: Moment):
    n = parse_moment(n)
    if n.denominator == 1:
        return size * tau**n.numerator
    return size * float(tau) ** float(n)


def dyadic_level(count: int) -> int:
    """Largest power of two <= count."""
    return 1 << (count.bit_length() - 1)


def dyadic_buckets(h: RepHistogram, n: Moment = 1) -> List[DyadicBucket]:
    """Partition the support of ``h`` into dyadic level sets, ascending tau."""
    n = parse_moment(n)
    groups: Dict[int, list] = {}
    for x, c in h.counts.items():
        groups.setdefault(dyadic_level(c), []).append(x)
    out = []
    for tau in sorted(groups):
        members = FSet(h.ctx, tuple(groups[tau]))
        out.append(DyadicBucket(tau, members, n, bucket_weight(len(members), tau, n)))
    return out


def bucket_count(h: RepHistogram) -> int:
    """Number of possible dyadic levels: floor(log2 r_max) + 1."""
    return h.max_count.bit_length()


def richest_bucket(h: RepHistogram, n: Moment) -> DyadicBucket:
    """Bucket maximizing |S_tau| * tau**n; ties go to the smaller tau.

    Guarantee: weight >= E_n / (2**n * (floor(log2 r_max) + 1)).
    """
    if not h.counts:
        raise EmptyHistogram("cannot pigeonhole an empty histogram")
    buckets = dyadic_buckets(h, n)
    best = buckets[0]
    for b in buckets[1:]:
        if _greater(b.weight, best.weight):
            best = b
    return best


def _greater(a, b) -> bool:
    if isinstance(a, int) and isinstance(b, int):
        return a > b
    return a > b * (1 + 1e-12)


def pigeonhole_floor(h: RepHistogram, n: Moment) -> float:
    """Provable lower bound for the richest bucket weight."""
    n = parse_moment(n)
    return float(energy_moment(h, n)) / (2 ** float(n) * bucket_count(h))
