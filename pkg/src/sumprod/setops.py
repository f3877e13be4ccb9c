"""Finite sets of field elements and the set algebra built on them.

Descriptor grammar (used by the CLI)::

    <field>; <set>
    field := p=<prime> | rational
    set   := elems=<comma list> | <comma list>
           | gp(g,n)          {g, g^2, ..., g^n}
           | ap(a,d,n)        {a, a+d, ..., a+(n-1)d}
           | subgroup(g,n)    {1, g, ..., g^(n-1)}  (a subgroup when ord(g) = n)
           | coset(x,g,n)     x * subgroup(g,n)
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Tuple

from .errors import CtxMismatch, DescriptorError, DivisionByZero, ZeroDilation
from .field import Element, FieldCtx

OPS = ("sum", "difference", "product", "ratio")


@dataclass(frozen=True)
class FSet:
    """Immutable, sorted, duplicate-free set of elements of ``ctx``."""

    ctx: FieldCtx
    elems: Tuple[Element, ...]
    _members: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "elems", tuple(sorted(set(self.elems))))
        object.__setattr__(self, "_members", frozenset(self.elems))

    @classmethod
    def of(cls, ctx: FieldCtx, values: Iterable) -> "FSet":
        return cls(ctx, tuple(ctx(v) for v in values))

    def __len__(self) -> int:
        return len(self.elems)

    def __iter__(self) -> Iterator[Element]:
        return iter(self.elems)

    def __contains__(self, x) -> bool:
        return x in self._members

    @property
    def members(self) -> frozenset:
        return self._members

    def has_zero(self) -> bool:
        return 0 in self._members

    def without_zero(self) -> "FSet":
        return FSet(self.ctx, tuple(x for x in self.elems if x != 0))

    def to_list(self) -> list:
        return [self.ctx.format(x) for x in self.elems]

    def describe(self) -> str:
        return f"{self.ctx}; elems={','.join(self.to_list())}"

    def __str__(self) -> str:
        return "{" + ", ".join(self.to_list()) + "}"


def _check_ctx(*sets: FSet) -> FieldCtx:
    ctx = sets[0].ctx
    for s in sets[1:]:
        if s.ctx != ctx:
            raise CtxMismatch(f"sets live in different fields: {ctx} vs {s.ctx}")
    return ctx


def combine(X: FSet, Y: FSet, op: str) -> FSet:
    """{x o y : x in X, y in Y} for o in sum, difference, product, ratio."""
    ctx = _check_ctx(X, Y)
    p = ctx.p
    if op == "ratio":
        if Y.has_zero():
            raise DivisionByZero("ratio set with 0 in the denominator set")
        Y = FSet(ctx, tuple(ctx.inv(y) for y in Y))
        op = "product"
    if op == "sum":
        out = {x + y for x in X for y in Y}
    elif op == "difference":
        out = {x - y for x in X for y in Y}
    elif op == "product":
        out = {x * y for x in X for y in Y}
    else:
        raise ValueError(f"unknown op {op!r}; expected one of {OPS}")
    if p is not None:
        out = {v % p for v in out}
    return FSet(ctx, tuple(out))


def shift(X: FSet, lam) -> FSet:
    """X + lam."""
    ctx = X.ctx
    lam = ctx(lam)
    return FSet(ctx, tuple(ctx.add(x, lam) for x in X))


def dilate(X: FSet, lam) -> FSet:
    """lam * X."""
    ctx = X.ctx
    lam = ctx(lam)
    return FSet(ctx, tuple(ctx.mul(x, lam) for x in X))


def negate(X: FSet) -> FSet:
    return dilate(X, -1)


def shifted_product(C: FSet, A: FSet, lam=1) -> FSet:
    """C(A + lam)."""
    _check_ctx(C, A)
    return combine(C, shift(A, lam), "product")


def dilate_invariance_check(C: FSet, A: FSet, lam) -> bool:
    """|C(A+1)| == |C(lam*A + lam)| for nonzero lam."""
    lam = A.ctx(lam)
    if lam == 0:
        raise ZeroDilation("dilation factor must be nonzero")
    lhs = len(shifted_product(C, A, 1))
    rhs = len(combine(C, shift(dilate(A, lam), lam), "product"))
    return lhs == rhs


# -- descriptors ------------------------------------------------------------

_GEN_RE = re.compile(r"^\s*(gp|ap|subgroup|coset)\s*\((.*)\)\s*$", re.IGNORECASE)


def multiplicative_order(g: int, p: int) -> int:
    if g % p == 0:
        raise ValueError("0 has no multiplicative order")
    x, k = g % p, 1
    while x != 1:
        x = x * g % p
        k += 1
    return k


def geometric(ctx: FieldCtx, g, n: int, start: int = 1) -> FSet:
    """{g^start, ..., g^(start+n-1)}; raises if the powers repeat."""
    g = ctx(g)
    x = ctx.one
    for _ in range(start):
        x = ctx.mul(x, g)
    out = []
    for _ in range(n):
        out.append(x)
        x = ctx.mul(x, g)
    s = FSet(ctx, tuple(out))
    if len(s) != n:
        raise DescriptorError(f"powers of {g} repeat before {n} distinct elements")
    return s


def arithmetic(ctx: FieldCtx, a, d, n: int) -> FSet:
    a, d = ctx(a), ctx(d)
    s = FSet(ctx, tuple(ctx.add(a, ctx.mul(ctx(k), d)) for k in range(n)))
    if len(s) != n:
        raise DescriptorError(f"progression ap({a},{d},{n}) repeats")
    return s


def parse_set(text: str, ctx: FieldCtx) -> FSet:
    """Parse the set part of a descriptor (comma list or generator form)."""
    t = text.strip()
    if t.lower().startswith("elems="):
        t = t[6:]
    m = _GEN_RE.match(t)
    if m:
        kind = m.group(1).lower()
        try:
            args = [Fraction(a.strip()) for a in m.group(2).split(",")]
        except ValueError:
            raise DescriptorError(f"bad generator arguments in {text!r}") from None
        want = {"gp": 2, "ap": 3, "subgroup": 2, "coset": 3}[kind]
        if len(args) != want:
            raise DescriptorError(f"{kind} takes {want} arguments, got {len(args)}")
        n = int(args[-1])
        if n != args[-1] or n < 0:
            raise DescriptorError(f"size must be a nonnegative integer in {text!r}")
        if kind == "gp":
            return geometric(ctx, args[0], n, start=1)
        if kind == "ap":
            return arithmetic(ctx, args[0], args[1], n)
        if kind == "subgroup":
            return geometric(ctx, args[0], n, start=0)
        return dilate(geometric(ctx, args[1], n, start=0), args[0])
    if not t:
        return FSet(ctx, ())
    try:
        return FSet.of(ctx, [v for v in t.split(",") if v.strip()])
    except (ValueError, ZeroDivisionError) as exc:
        raise DescriptorError(f"cannot parse set {text!r}: {exc}") from None


def parse_descriptor(text: str) -> FSet:
    """Parse ``"p=101; elems=1,2,4"``, ``"rational; gp(2,5)"`` and friends."""
    if ";" not in text:
        raise DescriptorError(f"descriptor {text!r} needs '<field>; <set>'")
    head, body = text.split(";", 1)
    try:
        ctx = FieldCtx.parse(head)
    except ValueError as exc:
        raise DescriptorError(str(exc)) from None
    return parse_set(body, ctx)
