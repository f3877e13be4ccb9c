"""Cartesian point grids, the shifted-product line families, incidence counts.

A line ``y = m x + k`` is stored by its exact (slope, intercept) pair.  The
family l_{d,c} : y = (1/d)(x/c - 1) has slope 1/(dc) and intercept -1/d.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .energy import DyadicBucket
from .errors import ZeroElement, ZeroParameter
from .setops import FSet, _check_ctx, shifted_product


@dataclass(frozen=True)
class PointGrid:
    X: FSet
    Y: FSet

    def __len__(self):
        return len(self.X) * len(self.Y)


@dataclass(frozen=True)
class LineFamily:
    kind: str
    params: Tuple[tuple, ...]  # (d_or_t, c) pairs, or (slope, intercept) for explicit
    lines: Tuple[tuple, ...]  # (slope, intercept)

    def __len__(self):
        return len(self.lines)


def _shift_family(kind: str, first: FSet, C: FSet) -> LineFamily:
    ctx = _check_ctx(first, C)
    if first.has_zero() or C.has_zero():
        raise ZeroParameter("line parameters must be nonzero")
    params = tuple((d, c) for d in first for c in C)
    lines = tuple((ctx.inv(ctx.mul(d, c)), ctx.neg(ctx.inv(d))) for d, c in params)
    return LineFamily(kind, params, lines)


def shift_lines(D: FSet, C: FSet) -> LineFamily:
    """{l_{d,c} : d in D, c in C} with l_{d,c}: y = (1/d)(x/c - 1)."""
    return _shift_family("shift_lines", D, C)


def swapped_lines(S: FSet, C: FSet) -> LineFamily:
    """{l_{t,c} : t in S, c in C}, same formula with t in place of d."""
    return _shift_family("swapped_lines", S, C)


def explicit_lines(ctx, pairs) -> LineFamily:
    lines = tuple(sorted({(ctx(m), ctx(k)) for m, k in pairs}))
    return LineFamily("explicit", lines, lines)


def _on_line(ctx, x, y, m, k) -> bool:
    return y == ctx.add(ctx.mul(m, x), k)


def count_incidences(grid: PointGrid, L: LineFamily, method: str = "hashed") -> int:
    """Number of (point, line) pairs with the point on the line."""
    ctx = _check_ctx(grid.X, grid.Y)
    if method == "bruteforce":
        return sum(
            1
            for x in grid.X
            for y in grid.Y
            for m, k in L.lines
            if _on_line(ctx, x, y, m, k)
        )
    if method != "hashed":
        raise ValueError(f"unknown method {method!r}")
    Y = grid.Y.members
    p = ctx.p
    total = 0
    for m, k in L.lines:
        if p is None:
            total += sum(1 for x in grid.X if m * x + k in Y)
        else:
            total += sum(1 for x in grid.X if (m * x + k) % p in Y)
    return total


@dataclass(frozen=True)
class SdzBound:
    value: float
    a: int
    b: int
    lines: int
    flags: dict

    def to_json(self):
        return {"value": self.value, "A": self.a, "B": self.b, "L": self.lines, "flags": dict(self.flags)}


def sdz_bound(nA: int, nB: int, nL: int, p: Optional[int] = None) -> SdzBound:
    """|A|^{1/2}|B|^{3/4}|L|^{3/4} + |L| with |A| >= |B| and precondition flags.

    The "<< p^2" condition is evaluated with constant 1, i.e. |L||B| <= p^2.
    """
    if min(nA, nB, nL) < 0:
        raise ValueError("sizes must be nonnegative")
    a, b = max(nA, nB), min(nA, nB)
    value = a**0.5 * b**0.75 * nL**0.75 + nL
    flags = {
        "LB_le_p2": True if p is None else nL * b <= p * p,
        "BA2_le_L3": b * a * a <= nL**3,
    }
    return SdzBound(value, a, b, nL, flags)


def _construction_inputs(A: FSet, D: FSet, C: FSet):
    _check_ctx(A, D, C)
    for name, s in (("A", A), ("C", C), ("D", D)):
        if s.has_zero():
            raise ZeroElement(f"0 in {name}; the construction needs nonzero sets")
    return shifted_product(C, A, 1)


@dataclass(frozen=True)
class ConstructionCheck:
    incidences: int
    required: int
    bound: SdzBound
    holds: bool

    def to_json(self):
        return {
            "incidences": self.incidences,
            "required": self.required,
            "holds": self.holds,
            "sdz_bound": self.bound.to_json(),
            "ratio_to_bound": self.incidences / self.bound.value if self.bound.value else None,
        }


def construction_identity(A: FSet, D: FSet, C: FSet, bucket: DyadicBucket, method: str = "hashed") -> ConstructionCheck:
    """Incidences between C(A+1) x S_tau and {l_{d,c}} versus |S_tau| tau |C|."""
    CA1 = _construction_inputs(A, D, C)
    grid = PointGrid(CA1, bucket.members)
    L = shift_lines(D, C)
    inc = count_incidences(grid, L, method)
    req = len(bucket.members) * bucket.tau * len(C)
    return ConstructionCheck(inc, req, sdz_bound(len(CA1), len(bucket.members), len(L), C.ctx.p), inc >= req)


def swapped_construction(A: FSet, D: FSet, C: FSet, bucket: DyadicBucket, method: str = "hashed") -> ConstructionCheck:
    """Incidences between C(A+1) x D and {l_{t,c} : t in S_tau} versus |S_tau| tau |C|."""
    CA1 = _construction_inputs(A, D, C)
    grid = PointGrid(CA1, D)
    L = swapped_lines(bucket.members, C)
    inc = count_incidences(grid, L, method)
    req = len(bucket.members) * bucket.tau * len(C)
    return ConstructionCheck(inc, req, sdz_bound(len(CA1), len(D), len(L), C.ctx.p), inc >= req)


def construction_identity_check(A, D, C, bucket, method="hashed") -> bool:
    return construction_identity(A, D, C, bucket, method).holds


def swapped_construction_check(A, D, C, bucket, method="hashed") -> bool:
    return swapped_construction(A, D, C, bucket, method).holds
