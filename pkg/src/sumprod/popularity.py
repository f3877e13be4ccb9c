"""Popular products P, the popular subset A', and the 4/3-energy refinement.

``log`` is the natural logarithm throughout.  Threshold comparisons keep the
integer side exact and evaluate the logarithm with :mod:`decimal` at 40
significant digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from typing import List, Optional

from .energy import energy_moment, rep_function
from .errors import SetTooSmall, ZeroElement
from .setops import FSet, _check_ctx

_PREC = 40
REL_TOL = 1e-9


def _ln(n: int) -> Decimal:
    with localcontext() as c:
        c.prec = _PREC
        return Decimal(n).ln()


def count_at_least_popular(r: int, nA: int, nB: int, nAB: int) -> bool:
    """r >= |A||B| / (ln|A| * |AB|), with ties counting as popular."""
    with localcontext() as c:
        c.prec = _PREC
        return Decimal(r) * _ln(nA) * nAB >= Decimal(nA * nB)


def below_log_fraction(count: int, total: int, nA: int) -> bool:
    """count < total / ln|A|."""
    with localcontext() as c:
        c.prec = _PREC
        return Decimal(count) * _ln(nA) < Decimal(total)


@dataclass(frozen=True)
class PopularityDecomposition:
    A: FSet
    B: FSet
    P: FSet
    A_prime: FSet
    threshold_P: float
    threshold_A: float
    covered_pairs: int
    rows: dict = field(repr=False, compare=False)  # a -> frozenset {b : ab in P}
    guaranteed: bool = True

    @property
    def uncovered_pairs(self) -> int:
        return len(self.A) * len(self.B) - self.covered_pairs

    def row(self, a) -> frozenset:
        return self.rows[a]

    def to_json(self) -> dict:
        return {
            "A": self.A.to_list(),
            "B": self.B.to_list(),
            "P": self.P.to_list(),
            "A_prime": self.A_prime.to_list(),
            "threshold_P": self.threshold_P,
            "threshold_A": self.threshold_A,
            "covered_pairs": self.covered_pairs,
            "uncovered_pairs": self.uncovered_pairs,
            "guaranteed": self.guaranteed,
        }


def popular_decompose(A: FSet, B: FSet, force: bool = False) -> PopularityDecomposition:
    """Compute P, A' and the pair coverage for the product set AB.

    For |A| < 3 the threshold |A||B|/(ln|A||AB|) is meaningless; with
    ``force`` such inputs get P = AB and A' = A, flagged as unguaranteed.
    """
    ctx = _check_ctx(A, B)
    if A.has_zero() or B.has_zero():
        raise ZeroElement("popular decomposition needs 0 outside A and B")
    nA, nB = len(A), len(B)
    if nA < 3 and not force:
        raise SetTooSmall(f"|A| = {nA} < 3, so ln|A| <= 1")
    hist = rep_function(A, B, "product")
    nAB = len(hist)
    if nA >= 3:
        threshold = nA * nB / (math.log(nA) * nAB)
        P = FSet(ctx, tuple(x for x, r in hist.counts.items() if count_at_least_popular(r, nA, nB, nAB)))
    else:
        threshold = 0.0
        P = hist.support
    p = ctx.p
    rows = {}
    for a in A:
        if p is None:
            rows[a] = frozenset(b for b in B if a * b in P)
        else:
            rows[a] = frozenset(b for b in B if a * b % p in P)
    covered = sum(len(r) for r in rows.values())
    A_prime = FSet(ctx, tuple(a for a in A if 3 * len(rows[a]) >= 2 * nB))
    return PopularityDecomposition(
        A=A,
        B=B,
        P=P,
        A_prime=A_prime,
        threshold_P=threshold,
        threshold_A=2 * nB / 3,
        covered_pairs=covered,
        rows=rows,
        guaranteed=nA >= 3,
    )


def intersection_bound_check(dec: PopularityDecomposition) -> int:
    """min over a, a' in A' of |{b : ab in P and a'b in P}|.

    Two subsets of B of size >= 2|B|/3 meet in >= |B|/3 elements, so the
    result is always >= |B|/3 when A' is nonempty.
    """
    rows = [dec.rows[a] for a in dec.A_prime]
    if not rows:
        return len(dec.B)
    best = len(dec.B)
    for i, r in enumerate(rows):
        for s in rows[i:]:
            k = len(r & s)
            if k < best:
                best = k
    return best


def energy_43(A: FSet) -> float:
    """E_{4/3}(A) = sum_x r_{A/A}(x)^{4/3}."""
    if len(A) == 0:
        return 0.0
    return energy_moment(rep_function(A, A, "ratio"), "4/3")


@dataclass
class RefineStep:
    size: int
    energy: float
    prime_size: int
    prime_energy: float


@dataclass
class RefineResult:
    A1: FSet
    iterations: int
    stopped: bool
    guaranteed: bool
    trace: List[RefineStep]
    max_iterations: int

    @property
    def energies(self) -> List[float]:
        return [s.energy for s in self.trace]

    def to_json(self) -> dict:
        return {
            "A1": self.A1.to_list(),
            "size": len(self.A1),
            "iterations": self.iterations,
            "max_iterations": self.max_iterations,
            "stopped": self.stopped,
            "guaranteed": self.guaranteed,
            "trace": [vars(s) for s in self.trace],
        }


def stop_condition(prime_energy: float, energy: float) -> bool:
    """E(A_i') >= E(A_i)/4 up to relative tolerance 1e-9."""
    return prime_energy >= energy / 4 * (1 - REL_TOL)


def refine_43(A: FSet, B: FSet, force: bool = False, max_iterations: Optional[int] = None) -> RefineResult:
    """Iterate A_{i+1} = (A_i)' until E_{4/3}(A_i') >= E_{4/3}(A_i)/4.

    Runs at most ceil(ln|A|) steps.  Sets with |A| <= e^3 (i.e. < 21) give
    no size guarantee and need ``force``.
    """
    _check_ctx(A, B)
    n = len(A)
    guaranteed = n >= 21
    if not guaranteed and not force:
        raise SetTooSmall(f"|A| = {n} < 21; pass force=True for the unguaranteed regime")
    if max_iterations is None:
        max_iterations = math.ceil(math.log(n)) if n > 1 else 1
    current = A
    trace: List[RefineStep] = []
    for i in range(max_iterations + 1):
        dec = popular_decompose(current, B, force=True)
        e = energy_43(current)
        e_prime = energy_43(dec.A_prime)
        trace.append(RefineStep(len(current), e, len(dec.A_prime), e_prime))
        if stop_condition(e_prime, e):
            return RefineResult(current, i, True, guaranteed, trace, max_iterations)
        if i == max_iterations or len(dec.A_prime) == 0:
            break
        current = dec.A_prime
    return RefineResult(current, len(trace) - 1, False, guaranteed, trace, max_iterations)
