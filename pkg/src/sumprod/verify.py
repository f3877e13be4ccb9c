"""Theorem-instance verifiers and the full shift-theorem proof trace.

Two kinds of statements are checked:

* exact inequalities and identities (set-size preconditions, pigeonhole
  constants, Cauchy-Schwarz steps, class counting).  These carry no hidden
  constant and a failure raises :class:`IdentityViolation`;
* asymptotic statements (``<<``, ``<~``).  Their hidden constants are unknown,
  so they are only reported as ``lhs / rhs`` with the constant taken as 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from .energy import (
    RepHistogram,
    dyadic_level,
    energy_moment,
    rep_function,
    richest_bucket,
)
from .errors import IdentityViolation, TooLarge, ZeroElement
from .field import char_guard
from .popularity import (
    REL_TOL,
    _ln,
    below_log_fraction,
    energy_43,
    intersection_bound_check,
    popular_decompose,
    refine_43,
)
from .report import ratio as _ratio
from .setops import FSet, _check_ctx, combine, negate, shift, shifted_product

QUADRUPLE_LIMIT = 10**8


@dataclass
class VerificationReport:
    theorem_id: str
    inputs: Dict[str, str]
    lhs: object
    rhs: object
    ratio: Optional[float]
    flags: Dict[str, bool]
    sizes: Dict[str, int] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    log_power: Optional[int] = None
    embedded: List["VerificationReport"] = field(default_factory=list)

    @property
    def all_flags(self) -> bool:
        return all(self.flags.values())

    def to_json(self) -> dict:
        out = {
            "theorem_id": self.theorem_id,
            "inputs": dict(self.inputs),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "flags": dict(self.flags),
            "sizes": dict(self.sizes),
            "notes": list(self.notes),
            "log_power": self.log_power,
        }
        if self.embedded:
            out["embedded"] = [r.to_json() for r in self.embedded]
        return out


def _zero_policy(sets: Dict[str, FSet], strict: bool, notes: List[str]) -> Dict[str, FSet]:
    """Warn about zeros; in strict mode strip them and record both sizes."""
    out = {}
    for name, s in sets.items():
        if s.has_zero():
            if strict:
                out[name] = s.without_zero()
                notes.append(f"0 stripped from {name}: |{name}| {len(s)} -> {len(out[name])}")
            else:
                out[name] = s
                msg = f"0 in {name}; sizes computed as given"
                notes.append(msg)
                warnings.warn(msg, stacklevel=3)
        else:
            out[name] = s
    return out


def _ratio_hist(X: FSet, Y: FSet, notes: List[str]) -> RepHistogram:
    if Y.has_zero():
        notes.append("pairs with zero denominator excluded from the ratio histogram")
        Y = Y.without_zero()
    return rep_function(X, Y, "ratio")


def _le_p2(value: int, ctx) -> bool:
    return True if ctx.p is None else value <= ctx.p**2


def verify_e4(A: FSet, C: FSet, D: FSet, strict: bool = False) -> VerificationReport:
    """E_4(A,D) against min{|C(A+1)|^2|D|^3/|C|, |C(A+1)|^3|D|^2/|C|}."""
    ctx = _check_ctx(A, C, D)
    notes: List[str] = []
    s = _zero_policy({"A": A, "C": C, "D": D}, strict, notes)
    A, C, D = s["A"], s["C"], s["D"]
    nA, nC, nD = len(A), len(C), len(D)
    nCA = len(shifted_product(C, A, 1))
    lhs = energy_moment(_ratio_hist(A, D, notes), 4)
    b1 = Fraction(nCA**2 * nD**3, nC)
    b2 = Fraction(nCA**3 * nD**2, nC)
    rhs = min(b1, b2)
    flags = {
        "A2_CA1_le_D_C3": nA**2 * nCA <= nD * nC**3,
        "A_CA1sq_le_D2_C3": nA * nCA**2 <= nD**2 * nC**3,
        "A_C_D2_le_p2": _le_p2(nA * nC * nD**2, ctx),
    }
    return VerificationReport(
        "e4",
        {"A": A.describe(), "C": C.describe(), "D": D.describe()},
        lhs,
        rhs,
        _ratio(lhs, rhs),
        flags,
        {"A": nA, "C": nC, "D": nD, "C(A+1)": nCA},
        notes,
        log_power=1,
    )


def verify_e2(A: FSet, C: FSet, D: FSet, strict: bool = False) -> VerificationReport:
    """E_2(A,D) against |C(A+1)|^{3/2}|D|^{3/2}/|C|^{1/2}."""
    ctx = _check_ctx(A, C, D)
    notes: List[str] = []
    s = _zero_policy({"A": A, "C": C, "D": D}, strict, notes)
    A, C, D = s["A"], s["C"], s["D"]
    nA, nC, nD = len(A), len(C), len(D)
    nCA = len(shifted_product(C, A, 1))
    lhs = energy_moment(_ratio_hist(A, D, notes), 2)
    rhs = nCA**1.5 * nD**1.5 / nC**0.5 if nC else math.inf
    flags = {
        "A2_CA1_le_D_C3": nA**2 * nCA <= nD * nC**3,
        "A_CA1sq_le_D2_C3": nA * nCA**2 <= nD**2 * nC**3,
        "A_C_D_minCD_le_p2": _le_p2(nA * nC * nD * min(nC, nD), ctx),
    }
    return VerificationReport(
        "e2",
        {"A": A.describe(), "C": C.describe(), "D": D.describe()},
        lhs,
        rhs,
        _ratio(lhs, rhs),
        flags,
        {"A": nA, "C": nC, "D": nD, "C(A+1)": nCA},
        notes,
        log_power=1,
    )


def verify_shift(A: FSet, B: FSet, C: FSet, D: FSet, strict: bool = False) -> VerificationReport:
    """|AB|^8 |C(A+1)|^2 |D(B-1)|^8 against |B|^13 |A|^5 |C|^3 |D|."""
    ctx = _check_ctx(A, B, C, D)
    notes: List[str] = []
    s = _zero_policy({"A": A, "B": B, "C": C, "D": D}, strict, notes)
    A, B, C, D = s["A"], s["B"], s["C"], s["D"]
    nA, nB, nC, nD = len(A), len(B), len(C), len(D)
    nAB = len(combine(A, B, "product"))
    nCA = len(shifted_product(C, A, 1))
    nDB = len(shifted_product(D, B, -1))
    lhs = nAB**8 * nCA**2 * nDB**8
    rhs = nB**13 * nA**5 * nC**3 * nD
    flags = {
        "CA1_A_le_C3": nCA * nA <= nC**3,
        "CA1sq_le_A_C3": nCA**2 <= nA * nC**3,
        "B_le_D": nB <= nD,
        "sizes_lt_p_quarter": all(char_guard(max(n, 1), ctx, Fraction(1, 4)) for n in (nA, nB, nC, nD)),
    }
    return VerificationReport(
        "shift",
        {"A": A.describe(), "B": B.describe(), "C": C.describe(), "D": D.describe()},
        lhs,
        rhs,
        _ratio(lhs, rhs),
        flags,
        {"A": nA, "B": nB, "C": nC, "D": nD, "AB": nAB, "C(A+1)": nCA, "D(B-1)": nDB},
        notes,
    )


def _exponent(size: int, n: int) -> Optional[float]:
    if n < 2 or size < 1:
        return None
    return round(math.log(size) / math.log(n), 4)


def verify_corollary(A: FSet, strict: bool = False) -> Tuple[VerificationReport, VerificationReport]:
    """|A(A+1)| and |AA| + |(A+1)(A+1)| against |A|^{11/9}.

    Each report embeds the shift-theorem instance it specializes:
    (B, C, D) = (A+1, A, A+1) and (B, C, D) = (-A, A+1, A+1).
    """
    ctx = A.ctx
    n = len(A)
    if n < 1:
        raise ValueError("corollary needs a nonempty set")
    A1 = shift(A, 1)
    target = n ** (11 / 9)
    guard = char_guard(n, ctx, Fraction(1, 4))

    sp = len(combine(A, A1, "product"))
    r1 = VerificationReport(
        "corollary_shift_product",
        {"A": A.describe()},
        sp,
        target,
        _ratio(sp, target),
        {"A_lt_p_quarter": guard, "AA1_ge_A": sp >= n},
        {"A": n, "A(A+1)": sp},
        [f"exponent={_exponent(sp, n)}"],
    )
    r1.embedded.append(verify_shift(A, A1, A, A1, strict=strict))

    aa = len(combine(A, A, "product"))
    bb = len(combine(A1, A1, "product"))
    r2 = VerificationReport(
        "corollary_two_products",
        {"A": A.describe()},
        aa + bb,
        target,
        _ratio(aa + bb, target),
        {"A_lt_p_quarter": guard},
        {"A": n, "AA": aa, "(A+1)(A+1)": bb},
        [f"exponent={_exponent(aa + bb, n)}"],
    )
    r2.embedded.append(verify_shift(A, negate(A), A1, A1, strict=strict))
    return r1, r2


# -- section 3 machinery ---------------------------------------------------


def trivial_solution_count(A_prime: FSet, B: FSet, Q: FSet, P: FSet) -> int:
    """N = sum over a, a' in A' with a/a' in Q of |{b : ab, a'b in P}|^2."""
    ctx = _check_ctx(A_prime, B, Q, P)
    rows = {a: frozenset(b for b in B if ctx.mul(a, b) in P) for a in A_prime}
    total = 0
    for a in A_prime:
        for a2 in A_prime:
            if ctx.div(a, a2) in Q:
                total += len(rows[a] & rows[a2]) ** 2
    return total


@dataclass
class EquivClassTable:
    """Classes of condition-satisfying quadruples under (a,a',b,b') ~ (la,la',b/l,b'/l)."""

    classes: List[Tuple[tuple, int]]
    conditioned: bool
    total_quadruples: int
    total_classes: int
    sum_sq_all: int
    satisfying_quadruples: int
    sum_sq_satisfying: int

    @property
    def class_count(self) -> int:
        """|X|: the number of condition-satisfying classes."""
        return len(self.classes)

    def to_json(self, fmt=str, limit: int = 50) -> dict:
        return {
            "class_count": self.class_count,
            "conditioned": self.conditioned,
            "total_quadruples": self.total_quadruples,
            "total_classes": self.total_classes,
            "sum_sq_all": self.sum_sq_all,
            "satisfying_quadruples": self.satisfying_quadruples,
            "sum_sq_satisfying": self.sum_sq_satisfying,
            "classes": [[[fmt(v) for v in rep], size] for rep, size in self.classes[:limit]],
            "classes_truncated": len(self.classes) > limit,
        }


def _conditions(ctx, A: FSet, Q: Optional[FSet], P: Optional[FSet]):
    if Q is None and P is None:
        return None

    def holds(a, a2, b, b2):
        if Q is not None and ctx.div(a, a2) not in Q:
            return False
        if P is not None:
            m = ctx.mul
            return m(a, b) in P and m(a2, b) in P and m(a, b2) in P and m(a2, b2) in P
        return True

    return holds


def _check_quadruple_space(A: FSet, B: FSet):
    if A.has_zero() or B.has_zero():
        raise ZeroElement("the scaling relation needs 0 outside A and B")
    n = len(A) ** 2 * len(B) ** 2
    if n > QUADRUPLE_LIMIT:
        raise TooLarge(f"{n} quadruples exceeds {QUADRUPLE_LIMIT}")
    return n


def equiv_classes(A: FSet, B: FSet, Q: Optional[FSet] = None, P: Optional[FSet] = None) -> EquivClassTable:
    """Partition A^2 x B^2 into scaling classes and keep those satisfying
    a/a' in Q and ab, a'b, ab', a'b' in P (no conditions when Q, P are None).

    A class is identified by the products (ab, a'b, ab'), which are invariant
    under the scaling and determine the quadruple up to it.  Every class is
    checked to satisfy the conditions either for all members or for none.
    """
    ctx = _check_ctx(A, B)
    total = _check_quadruple_space(A, B)
    nA, nB = len(A), len(B)
    if total == 0:
        return EquivClassTable([], Q is not None or P is not None, 0, 0, 0, 0, 0)
    ids: Dict = {}
    vals = []
    pid = np.empty((nA, nB), dtype=np.int64)
    for i, a in enumerate(A):
        for j, b in enumerate(B):
            v = ctx.mul(a, b)
            if v not in ids:
                ids[v] = len(vals)
                vals.append(v)
            pid[i, j] = ids[v]
    K = len(vals)
    shape = (nA, nA, nB, nB)
    s = pid[:, None, :, None]
    t = pid[None, :, :, None]
    u = pid[:, None, None, :]
    keys = np.broadcast_to((s * K + t) * K + u, shape).ravel()
    _, first, inverse, counts = np.unique(keys, return_index=True, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()

    conditioned = Q is not None or P is not None
    if conditioned:
        inP = np.array([P is None or v in P for v in vals], dtype=bool)
        qmask = np.array([[Q is None or ctx.div(a, a2) in Q for a2 in A] for a in A], dtype=bool)
        v4 = pid[None, :, None, :]
        cond = qmask[:, :, None, None] & inP[s] & inP[t] & inP[u] & inP[v4]
        cond = np.broadcast_to(cond, shape).ravel()
        true_counts = np.bincount(inverse[cond], minlength=len(counts))
        mixed = (true_counts != 0) & (true_counts != counts)
        if mixed.any():
            raise IdentityViolation("conditions are not constant on a scaling class")
        sat = true_counts == counts
    else:
        sat = np.ones(len(counts), dtype=bool)

    order = np.argsort(first[sat], kind="stable")
    sat_first = first[sat][order]
    sat_counts = counts[sat][order]
    Al, Bl = A.elems, B.elems
    classes = []
    for idx, size in zip(sat_first.tolist(), sat_counts.tolist()):
        i, i2, j, j2 = np.unravel_index(idx, shape)
        classes.append(((Al[i], Al[i2], Bl[j], Bl[j2]), int(size)))
    c64 = counts.astype(object)
    return EquivClassTable(
        classes=classes,
        conditioned=conditioned,
        total_quadruples=total,
        total_classes=len(counts),
        sum_sq_all=int(sum(c * c for c in c64)),
        satisfying_quadruples=int(sum(sat_counts.tolist())),
        sum_sq_satisfying=int(sum(c * c for c in sat_counts.tolist())),
    )


def equiv_classes_orbit(A: FSet, B: FSet, Q: Optional[FSet] = None, P: Optional[FSet] = None) -> EquivClassTable:
    """Reference implementation: explicit orbit enumeration over the scalings.

    Quadratically slower than :func:`equiv_classes`; for small inputs only.
    """
    ctx = _check_ctx(A, B)
    total = _check_quadruple_space(A, B)
    holds = _conditions(ctx, A, Q, P)
    seen = set()
    all_sizes, classes = [], []
    for a in A:
        for a2 in A:
            for b in B:
                for b2 in B:
                    q = (a, a2, b, b2)
                    if q in seen:
                        continue
                    orbit = []
                    for c in A:
                        lam = ctx.div(c, a)
                        img = (c, ctx.mul(lam, a2), ctx.div(b, lam), ctx.div(b2, lam))
                        if img[1] in A and img[2] in B and img[3] in B:
                            orbit.append(img)
                    seen.update(orbit)
                    all_sizes.append(len(orbit))
                    if holds is None:
                        classes.append((q, len(orbit)))
                        continue
                    status = {holds(*m) for m in orbit}
                    if len(status) != 1:
                        raise IdentityViolation(f"conditions vary on the class of {q}")
                    if status.pop():
                        classes.append((q, len(orbit)))
    return EquivClassTable(
        classes=classes,
        conditioned=holds is not None,
        total_quadruples=total,
        total_classes=len(all_sizes),
        sum_sq_all=sum(k * k for k in all_sizes),
        satisfying_quadruples=sum(k for _, k in classes),
        sum_sq_satisfying=sum(k * k for _, k in classes),
    )


def fourth_mixed_sum(A: FSet, B: FSet) -> int:
    """sum_x r_{A/A}(x)^2 r_{B/B}(x)^2."""
    hA = rep_function(A, A, "ratio")
    hB = rep_function(B, B, "ratio")
    return sum(c * c * hB[x] ** 2 for x, c in hA.counts.items())


def equiv_energy_inequality(A: FSet, B: FSet, table: EquivClassTable) -> bool:
    """sum over all classes of |class|^2 <= sum_x r_{A/A}(x)^2 r_{B/B}(x)^2."""
    return table.sum_sq_all <= fourth_mixed_sum(A, B)


# -- proof trace --------------------------------------------------------------


class ProofTrace:
    """Ordered ledger of exact checks, asymptotic ratios and recorded values."""

    def __init__(self, theorem_id: str = "shift_trace"):
        self.theorem_id = theorem_id
        self.steps: List[dict] = []
        self.quantities: Dict[str, object] = {}
        self.reports: List[VerificationReport] = []
        self.notes: List[str] = []
        self.complete = False

    def exact(self, name: str, lhs, rel: str, rhs, note: str = "", tol: float = 0.0):
        if rel == "<=":
            ok = lhs <= rhs * (1 + tol) if tol else lhs <= rhs
        elif rel == "<":
            ok = lhs < rhs
        elif rel == "==":
            ok = lhs == rhs
        else:
            raise ValueError(rel)
        self._record(name, lhs, rel, rhs, bool(ok), note)

    def exact_bool(self, name: str, ok: bool, lhs, rel: str, rhs, note: str = ""):
        self._record(name, lhs, rel, rhs, bool(ok), note)

    def _record(self, name, lhs, rel, rhs, ok, note):
        self.steps.append(
            {
                "name": name,
                "kind": "exact",
                "relation": rel,
                "lhs": lhs,
                "rhs": rhs,
                "ratio": _ratio(lhs, rhs),
                "holds": ok,
                "note": note,
            }
        )
        if not ok:
            raise IdentityViolation(f"{name}: {lhs} {rel} {rhs} is false")

    def asymptotic(self, name: str, lhs, rhs, note: str = "", flags: Optional[dict] = None):
        step = {
            "name": name,
            "kind": "asymptotic",
            "relation": "<~",
            "lhs": lhs,
            "rhs": rhs,
            "ratio": _ratio(lhs, rhs),
            "holds": None,
            "note": note,
        }
        if flags is not None:
            step["flags"] = dict(flags)
        self.steps.append(step)

    def skipped(self, name: str, note: str):
        self.steps.append({"name": name, "kind": "skipped", "relation": "", "lhs": None, "rhs": None, "ratio": None, "holds": None, "note": note})

    def exact_steps(self) -> List[dict]:
        return [s for s in self.steps if s["kind"] == "exact"]

    def step(self, name: str) -> dict:
        for s in self.steps:
            if s["name"] == name:
                return s
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "theorem_id": self.theorem_id,
            "complete": self.complete,
            "quantities": self.quantities,
            "steps": self.steps,
            "reports": [r.to_json() for r in self.reports],
            "notes": self.notes,
        }


def _argmax_bucket(values: Dict, levels: Dict, ctx) -> Tuple[FSet, int, int]:
    """Dyadic bucket (by ``levels``) with maximal total ``values``; ties to smaller tau."""
    sums: Dict[int, int] = {}
    for x, v in values.items():
        lv = levels[x]
        sums[lv] = sums.get(lv, 0) + v
    tau = min(sums, key=lambda t: (-sums[t], t))
    members = FSet(ctx, tuple(x for x in values if levels[x] == tau))
    return members, tau, sums[tau]


def proof_trace_shift(A: FSet, B: FSet, C: FSet, D: FSet, force: bool = False, strict: bool = False) -> ProofTrace:
    """Compute every intermediate object of the shift-theorem argument.

    Exact steps raise :class:`IdentityViolation` on failure; asymptotic steps
    are recorded as ratios.  ``force`` admits sets with |A| < 21.
    """
    ctx = _check_ctx(A, B, C, D)
    tr = ProofTrace()
    s = _zero_policy({"A": A, "B": B, "C": C, "D": D}, strict, tr.notes)
    A0, B, C, D = s["A"], s["B"], s["C"], s["D"]
    if A0.has_zero() or B.has_zero():
        raise ZeroElement("the trace needs 0 outside A and B (use strict mode to strip)")
    _check_quadruple_space(A0, B)
    mul = ctx.mul
    nB, nC, nD = len(B), len(C), len(D)

    tr.reports.append(verify_shift(A0, B, C, D))

    # refinement of A by the 4/3-energy algorithm
    ref = refine_43(A0, B, force=force)
    tr.quantities["refine"] = ref.to_json()
    for i, st in enumerate(ref.trace):
        if st.size >= 3:
            ok = (st.size - st.prime_size) * _ln(st.size) <= 3 * st.size
            tr.exact_bool(
                f"refine_step{i}_prime_size",
                ok,
                st.prime_size,
                ">=",
                (1 - 3 / math.log(st.size)) * st.size,
                "|A_i'| >= (1 - 3/ln|A_i|)|A_i|",
            )
    if not ref.stopped:
        tr.notes.append("refinement hit the iteration cap without meeting the stopping condition")
    A = ref.A1
    nA = len(A)
    tr.quantities["A1"] = A.to_list()

    # popular products and popular subset
    dec = popular_decompose(A, B, force=True)
    hAB = rep_function(A, B, "product")
    P = dec.P
    uncovered = sum(c for x, c in hAB.counts.items() if x not in P)
    tr.quantities["P"] = P.to_list()
    tr.quantities["A_prime"] = dec.A_prime.to_list()
    tr.quantities["threshold_P"] = dec.threshold_P
    tr.exact("pair_partition", dec.covered_pairs + uncovered, "==", nA * nB)
    if dec.guaranteed:
        tr.exact_bool(
            "uncovered_lt_AB_over_lnA",
            below_log_fraction(uncovered, nA * nB, nA),
            uncovered,
            "<",
            nA * nB / math.log(nA),
        )
        tr.exact_bool(
            "A_prime_size",
            (nA - len(dec.A_prime)) * _ln(nA) <= 3 * nA,
            len(dec.A_prime),
            ">=",
            (1 - 3 / math.log(nA)) * nA,
        )
    else:
        tr.skipped("uncovered_lt_AB_over_lnA", "|A| < 3: threshold undefined, P = AB")
    Ap = dec.A_prime
    if len(Ap) == 0:
        tr.notes.append("A' is empty; chain stops")
        return tr
    tr.exact("intersection_bound", nB, "<=", 3 * intersection_bound_check(dec))

    # 4/3-energy and the rich ratio set Q
    E43 = energy_43(A)
    E43p = energy_43(Ap)
    tr.quantities["E43_A"] = E43
    tr.quantities["E43_A_prime"] = E43p
    tr.asymptotic("E43_A_vs_A_prime", E43, E43p, "E43(A) << E43(A')")
    hpp = rep_function(Ap, Ap, "ratio")
    Qb = richest_bucket(hpp, "4/3")
    Q, Delta = Qb.members, Qb.tau
    K_Q = hpp.max_count.bit_length()
    tr.quantities["Q"] = Q.to_list()
    tr.quantities["Delta"] = Delta
    tr.exact("Q_pigeonhole", E43p, "<=", 2 ** (4 / 3) * K_Q * Qb.weight, "E43(A') <= 2^{4/3} K |Q| Delta^{4/3}", tol=REL_TOL)
    tr.asymptotic("Q_weight", E43p, Qb.weight, "|Q| Delta^{4/3} ~ E43(A')")

    # trivial equation solutions and scaling classes
    N = trivial_solution_count(Ap, B, Q, P)
    tr.quantities["N"] = N
    tr.exact("N_lower_bound", nB**2 * len(Q) * Delta, "<=", 9 * N, "N >= |B|^2 |Q| Delta / 9")
    tr.exact("N_squared_lower_bound", len(Q) ** 2 * Delta**2 * nB**4, "<=", 81 * N * N)
    table = equiv_classes(A, B, Q, P)
    X = table.class_count
    tr.quantities["X"] = X
    tr.quantities["class_mass"] = table.satisfying_quadruples
    tr.exact("N_le_class_mass", N, "<=", table.satisfying_quadruples)
    tr.exact("cs_classes", table.satisfying_quadruples**2, "<=", X * table.sum_sq_satisfying)
    tr.exact("N_sq_le_X_classes_sq", N * N, "<=", X * table.sum_sq_satisfying)
    tr.exact("classes_sq_completion", table.sum_sq_satisfying, "<=", table.sum_sq_all)
    hAA = rep_function(A, A, "ratio")
    hBB = rep_function(B, B, "ratio")
    S4 = sum(c * c * hBB[x] ** 2 for x, c in hAA.counts.items())
    tr.exact("equation_4", table.sum_sq_all, "<=", S4, "sum |class|^2 <= sum r_{A/A}^2 r_{B/B}^2")
    E4A = energy_moment(hAA, 4)
    E4B = energy_moment(hBB, 4)
    tr.exact("cs_fourth_energies", S4 * S4, "<=", E4A * E4B)
    nCA = len(shifted_product(C, A, 1))
    nDB = len(shifted_product(D, B, -1))
    nAB = len(hAB)
    tr.quantities.update({"|A|": nA, "|B|": nB, "|C|": nC, "|D|": nD, "|AB|": nAB, "|C(A+1)|": nCA, "|D(B-1)|": nDB})
    eA = verify_e4(A, C, A)
    tr.asymptotic("E4_A_bound", E4A, Fraction(nCA**2 * nA**3, nC), "E4(A) <~ |C(A+1)|^2|A|^3/|C|", eA.flags)
    eB_flags = {
        "DB1_B_le_D3": nDB * nB <= nD**3,
        "DB1sq_le_B_D3": nDB**2 <= nB * nD**3,
        "B3_D_le_p2": _le_p2(nB**3 * nD, ctx),
    }
    tr.asymptotic("E4_B_bound", E4B, Fraction(nDB**2 * nB**3, nD), "E4(B) <~ |D(B-1)|^2|B|^3/|D|", eB_flags)
    tr.asymptotic(
        "Q_X_bound",
        len(Q) ** 2 * Delta**2 * nB**4,
        X * nCA * nA**1.5 * nDB * nB**1.5 / math.sqrt(nC * nD),
        "|Q|^2 Delta^2 |B|^4 <~ |X| |C(A+1)||A|^{3/2}|D(B-1)||B|^{3/2} / (|C||D|)^{1/2}",
    )

    # |X| through P^4 solutions and popularity
    thr = dec.threshold_P
    Z = W = M8 = 0
    for q in Q:
        cz = gp = g = 0
        for t, rt in hAB.counts.items():
            qt = mul(q, t)
            rq = hAB[qt]
            if rq:
                g += rq * rt
                if qt in P and t in P:
                    cz += 1
                    gp += rq * rt
        Z += cz * cz
        W += gp * gp
        M8 += g * g
    tr.quantities["M8"] = M8
    tr.exact("X_le_P4_solutions", X, "<=", Z)
    tr.exact("popularity_weighting", Z * thr**4, "<=", W, "each r_AB on P is >= threshold", tol=REL_TOL)
    tr.exact("P4_le_8tuples", W, "<=", M8)
    tr.asymptotic("X_popularity", X, Fraction(nAB**4, nA**4 * nB**4) * M8, "|X| <~ |AB|^4/(|A|^4|B|^4) * #8-tuples")

    # dyadic chain over BA/A: R1, R2
    h3 = rep_function(rep_function(B, A, "product"), A, "ratio")
    tr.exact("BA_A_mass", h3.mass, "==", nB * nA * nA)
    lev3 = {x: dyadic_level(c) for x, c in h3.counts.items()}
    K3 = h3.max_count.bit_length()
    Bl = list(B)
    G = {q: sum(h3[mul(q, b)] for b in Bl) for q in Q}
    Binv = [ctx.inv(b) for b in Bl]

    def over_Q(x, weights):
        tot = 0
        for bi in Binv:
            q = mul(x, bi)
            if q in Q:
                tot += weights.get(q, 0)
        return tot

    f1 = {x: over_Q(x, G) for x in h3.counts}
    tr.exact("M8_identity", sum(h3[x] * f1[x] for x in f1), "==", M8)
    R1, D1, w1 = _argmax_bucket({x: h3[x] * f1[x] for x in f1}, lev3, ctx)
    F1 = sum(f1[x] for x in R1)
    tr.exact("R1_pigeonhole", M8, "<=", K3 * w1)
    tr.exact("R1_level", w1, "<=", 2 * D1 * F1)
    H1 = {q: sum(1 for b in Bl if mul(q, b) in R1) for q in Q}
    g1 = {y: over_Q(y, H1) for y in h3.counts}
    tr.exact("F1_identity", sum(h3[y] * g1[y] for y in g1), "==", F1)
    R2, D1p, w2 = _argmax_bucket({y: h3[y] * g1[y] for y in g1}, lev3, ctx)
    T12 = sum(g1[y] for y in R2)
    tr.exact("R2_pigeonhole", F1, "<=", K3 * w2)
    tr.exact("R2_level", w2, "<=", 2 * D1p * T12)
    H2 = {q: sum(1 for b in Bl if mul(q, b) in R2) for q in Q}
    tr.exact("T12_identity", T12, "==", sum(H1[q] * H2[q] for q in Q))
    tr.exact("X_dyadic_chain", M8, "<=", 4 * K3 * K3 * D1 * D1p * T12)
    tr.quantities.update({"R1": R1.to_list(), "R2": R2.to_list(), "Delta1": D1, "Delta1_prime": D1p, "T12": T12})
    tr.asymptotic("X_after_dyadic", X, Fraction(nAB**4, nA**4 * nB**4) * D1 * D1p * T12)
    SR = [sum(H1[q] ** 2 for q in Q), sum(H2[q] ** 2 for q in Q)]
    tr.exact("cs_R", T12 * T12, "<=", SR[0] * SR[1])
    for i, (R, sr) in enumerate(zip((R1, R2), SR), start=1):
        E4BR = energy_moment(rep_function(B, R, "ratio"), 4)
        E4RB = energy_moment(rep_function(R, B, "ratio"), 4)
        nR = len(R)
        tr.exact(f"E4_inversion_R{i}", E4BR, "==", E4RB)
        tr.exact(f"holder_R{i}", sr * sr, "<=", len(Q) * E4BR)
        tr.exact(f"E4_trivial_R{i}", E4BR, "<=", nR**4 * nB)
        c1 = nB**2 * nDB <= nR * nD**3
        c2 = nB * nDB**2 <= nR**2 * nD**3
        if (not c1 or not c2) and nB <= nD:
            tr.exact(f"fallback_R{i}", nR**2 * nB * nD, "<=", nDB**3, "condition failed; |B| <= |D| forces the bound")
        tr.asymptotic(
            f"E4_BR{i}_bound",
            E4BR,
            Fraction(nDB**3 * nR**2, nD),
            "E4(B,R_i) <~ |D(B-1)|^3 |R_i|^2 / |D|",
            {"cond1": c1, "cond2": c2, "B_le_D": nB <= nD, "B_D_R2_le_p2": _le_p2(nB * nD * nR**2, ctx)},
        )
    tr.asymptotic(
        "X_final",
        X,
        math.sqrt(len(Q)) * nAB**4 * nDB**1.5 * math.sqrt(len(R1) * len(R2)) * D1 * D1p / (nA**4 * nB**4 * math.sqrt(nD)),
    )

    # second chain over A/A: S1, S2
    M6 = energy_moment(h3, 2)
    sq1 = sum(h3[x] ** 2 for x in R1)
    sq2 = sum(h3[x] ** 2 for x in R2)
    tr.exact("R_level_squares", len(R1) * len(R2) * D1**2 * D1p**2, "<=", sq1 * sq2)
    tr.exact("R1_sq_le_M6", sq1, "<=", M6)
    tr.exact("R2_sq_le_M6", sq2, "<=", M6)
    lev2 = {x: dyadic_level(c) for x, c in hAA.counts.items()}
    K2 = hAA.max_count.bit_length()
    bb_items = list(hBB.counts.items())
    f2 = {s_: sum(c * hAA[mul(s_, y)] for y, c in bb_items) for s_ in hAA.counts}
    tr.exact("M6_identity", sum(hAA[x] * f2[x] for x in f2), "==", M6)
    S1, D2, w3 = _argmax_bucket({x: hAA[x] * f2[x] for x in f2}, lev2, ctx)
    F2 = sum(f2[x] for x in S1)
    tr.exact("S1_pigeonhole", M6, "<=", K2 * w3)
    tr.exact("S1_level", w3, "<=", 2 * D2 * F2)
    S1inv = [ctx.inv(x) for x in S1]
    g2 = {s2: sum(hBB[mul(s2, i1)] for i1 in S1inv) for s2 in hAA.counts}
    tr.exact("F2_identity", sum(hAA[x] * g2[x] for x in g2), "==", F2)
    S2, D2p, w4 = _argmax_bucket({x: hAA[x] * g2[x] for x in g2}, lev2, ctx)
    U12 = sum(g2[x] for x in S2)
    tr.exact("S2_pigeonhole", F2, "<=", K2 * w4)
    tr.exact("S2_level", w4, "<=", 2 * D2p * U12)
    rS1B = rep_function(S1, B, "product")
    rS2B = rep_function(S2, B, "product")
    tr.exact("U12_identity", U12, "==", sum(c * rS2B[x] for x, c in rS1B.counts.items()))
    tr.exact("M6_dyadic_chain", M6, "<=", 4 * K2 * K2 * D2 * D2p * U12)
    tr.quantities.update({"S1": S1.to_list(), "S2": S2.to_list(), "Delta2": D2, "Delta2_prime": D2p, "U12": U12, "M6": M6})
    E2 = []
    for i, (S, rSB) in enumerate(((S1, rS1B), (S2, rS2B)), start=1):
        nS = len(S)
        E2BS = energy_moment(rep_function(B, S, "ratio"), 2)
        E2.append(E2BS)
        tr.exact(f"E2_product_ratio_S{i}", energy_moment(rSB, 2), "==", E2BS)
        tr.exact(f"E2_trivial_S{i}", E2BS, "<=", nB * nS * nS)
        c1 = nB**2 * nDB <= nS * nD**3
        c2 = nB * nDB**2 <= nS**2 * nD**3
        if (not c1 or not c2) and nB <= nD:
            tr.exact(f"fallback_S{i}", nB**2 * nD * nS, "<=", nDB**3, "condition failed; |B| <= |D| forces the bound")
        tr.asymptotic(
            f"E2_BS{i}_bound",
            E2BS,
            nS**1.5 * nDB**1.5 / math.sqrt(nD),
            "E(B,S_i) <~ |S_i|^{3/2}|D(B-1)|^{3/2}/|D|^{1/2}",
            {"cond1": c1, "cond2": c2, "B_le_D": nB <= nD},
        )
        tr.exact(f"S{i}_energy_43", nS * (D2 if i == 1 else D2p) ** (4 / 3), "<=", E43, tol=REL_TOL)
    tr.exact("cs_S", U12 * U12, "<=", E2[0] * E2[1])
    tr.exact(
        "S_energy_43_product",
        D2**2 * D2p**2 * (len(S1) * len(S2)) ** 1.5,
        "<=",
        E43**3,
        "Delta2^2 Delta2'^2 |S1|^{3/2}|S2|^{3/2} <= E43(A)^3",
        tol=REL_TOL,
    )
    tr.asymptotic("R_S_chain", len(R1) * len(R2) * D1**2 * D1p**2, E43**3 * nDB**3 / nD)

    # assembly
    tr.asymptotic(
        "assembly",
        len(Q) ** 1.5 * Delta**2 * nB**6.5 * nA**2.5 * nC**1.5 * nD**0.5,
        nAB**4 * nCA * nDB**4 * E43**1.5,
    )
    tr.asymptotic(
        "assembly_simplified",
        E43p**3 * nB**13 * nA**5 * nC**3 * nD,
        nAB**8 * nCA**2 * nDB**8 * E43**3,
    )
    tr.reports.append(verify_shift(A, B, C, D))
    tr.complete = True
    return tr
