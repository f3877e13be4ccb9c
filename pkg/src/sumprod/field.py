"""Exact arithmetic in F_p and in Q.

Elements are plain Python values in canonical form: an ``int`` in
``[0, p)`` for a prime field, a ``fractions.Fraction`` in lowest terms for
the rationals.  Both are hashable and totally ordered, so they can be used
directly as histogram keys and sort keys.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import DivisionByZero, NonPrimeModulus

Element = Union[int, Fraction]

# Deterministic Miller-Rabin witnesses for n < 3.3e24 (covers all n < 2**64).
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Deterministic primality test, exact for every n < 2**64."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldCtx:
    """Ambient field: ``F_p`` when ``p`` is set, the rationals otherwise."""

    p: Optional[int] = None

    def __post_init__(self):
        if self.p is not None:
            if isinstance(self.p, bool) or not isinstance(self.p, int):
                raise NonPrimeModulus(f"modulus must be an integer, got {self.p!r}")
            if self.p >= 2**64:
                raise NonPrimeModulus("moduli >= 2**64 are outside the supported range")
            if not is_prime(self.p):
                raise NonPrimeModulus(f"{self.p} is not prime")

    @classmethod
    def prime(cls, p: int) -> "FieldCtx":
        return cls(p)

    @classmethod
    def rational(cls) -> "FieldCtx":
        return cls(None)

    @classmethod
    def parse(cls, text: str) -> "FieldCtx":
        """Parse ``"rational"``, ``"p=101"`` or ``"101"``."""
        t = text.strip().lower()
        if t.startswith("p="):
            t = t[2:].strip()
        if t in ("rational", "q", "inf", "0"):
            return cls.rational()
        try:
            return cls.prime(int(t))
        except ValueError:
            raise NonPrimeModulus(f"cannot parse field {text!r}") from None

    @property
    def is_rational(self) -> bool:
        return self.p is None

    @property
    def characteristic(self) -> int:
        return 0 if self.p is None else self.p

    def __str__(self) -> str:
        return "rational" if self.p is None else f"p={self.p}"

    # -- elements ---------------------------------------------------------

    def __call__(self, value) -> Element:
        """Canonicalize ``value`` (int, Fraction or string like ``"-3/4"``)."""
        if isinstance(value, str):
            value = Fraction(value.strip())
        if self.p is None:
            return Fraction(value)
        if isinstance(value, Fraction):
            if value.denominator == 1:
                return int(value.numerator) % self.p
            num = value.numerator % self.p
            den = value.denominator % self.p
            if den == 0:
                raise DivisionByZero(f"denominator of {value} vanishes mod {self.p}")
            return num * pow(den, -1, self.p) % self.p
        return int(value) % self.p

    def format(self, x: Element) -> str:
        return str(x)

    @property
    def zero(self) -> Element:
        return self(0)

    @property
    def one(self) -> Element:
        return self(1)

    def add(self, x: Element, y: Element) -> Element:
        return x + y if self.p is None else (x + y) % self.p

    def sub(self, x: Element, y: Element) -> Element:
        return x - y if self.p is None else (x - y) % self.p

    def neg(self, x: Element) -> Element:
        return -x if self.p is None else (-x) % self.p

    def mul(self, x: Element, y: Element) -> Element:
        return x * y if self.p is None else x * y % self.p

    def inv(self, x: Element) -> Element:
        if x == 0:
            raise DivisionByZero("inverse of zero")
        return 1 / x if self.p is None else pow(x, -1, self.p)

    def div(self, x: Element, y: Element) -> Element:
        if y == 0:
            raise DivisionByZero("division by zero")
        return x / y if self.p is None else x * pow(y, -1, self.p) % self.p

    def arith(self, op: str, x: Element, y: Optional[Element] = None) -> Element:
        """Dispatch one of ``add, sub, mul, div, inv, neg`` by name."""
        if op not in ("add", "sub", "mul", "div", "inv", "neg"):
            raise ValueError(f"unknown operation {op!r}")
        if op not in ("inv", "neg") and y is None:
            raise ValueError(f"{op} needs two operands")
        if op in ("inv", "neg"):
            return getattr(self, op)(x)
        return getattr(self, op)(x, y)


def char_guard(n: int, ctx: FieldCtx, exponent: Union[Fraction, str, float] = Fraction(1, 4)) -> bool:
    """True iff ``n < p**exponent`` (vacuously true in characteristic 0).

    With ``exponent = a/b`` this is checked as ``n**b < p**a`` in integers.
    """
    if n < 1:
        raise ValueError("set size must be positive")
    if ctx.p is None:
        return True
    e = Fraction(exponent).limit_denominator(1000) if isinstance(exponent, float) else Fraction(exponent)
    return n**e.denominator < ctx.p**e.numerator
