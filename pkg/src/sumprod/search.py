"""Searches for sets with small shifted products, and structured set families.

Objectives (candidate sets never contain 0):

* ``shift_product``: |A(A+1)|
* ``two_products``:  |AA| + |(A+1)(A+1)|

A record's ``value`` is the growth exponent ln f(A) / ln |A| to 4 decimals
(undefined for |A| = 1).
"""

from __future__ import annotations

import csv
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from pathlib import Path
from typing import List, Optional, Tuple

from .errors import BadParams, TooLarge
from .field import FieldCtx
from .setops import FSet, arithmetic, dilate, geometric

OBJECTIVES = ("shift_product", "two_products")
EXHAUSTIVE_LIMIT = 10**7


def objective_size(elems, p: int, objective: str) -> int:
    """Objective on a tuple of residues mod p (fast path, no FSet)."""
    shifted = [(a + 1) % p for a in elems]
    if objective == "shift_product":
        return len({a * b % p for a in elems for b in shifted})
    if objective == "two_products":
        return len({a * b % p for a in elems for b in elems}) + len({a * b % p for a in shifted for b in shifted})
    raise BadParams(f"unknown objective {objective!r}")


def exponent(size: int, n: int) -> Optional[float]:
    if n < 2:
        return None
    return round(math.log(size) / math.log(n), 4)


@dataclass(frozen=True)
class SearchRecord:
    objective: str
    p: int
    elems: Tuple[int, ...]
    size: int
    value: Optional[float]
    seed: Optional[int] = None
    generator: str = ""
    timestamp: float = field(default_factory=time.time, compare=False)

    @property
    def n(self) -> int:
        return len(self.elems)

    @property
    def descriptor(self) -> str:
        return f"p={self.p}; elems={','.join(map(str, self.elems))}"

    def sort_key(self):
        return (self.objective, self.size, self.elems)

    def to_json(self) -> dict:
        return {
            "objective": self.objective,
            "p": self.p,
            "n": self.n,
            "set": self.descriptor,
            "size": self.size,
            "value": self.value,
            "seed": self.seed,
            "generator": self.generator,
            "timestamp": self.timestamp,
        }


def make_record(elems, p, objective, seed=None, generator="") -> SearchRecord:
    elems = tuple(sorted(elems))
    size = objective_size(elems, p, objective)
    return SearchRecord(objective, p, elems, size, exponent(size, len(elems)), seed, generator)


def _best_with_first(args) -> Optional[Tuple[int, Tuple[int, ...]]]:
    """Best n-subset of {1..p-1} whose smallest element is ``first``."""
    p, n, objective, first = args
    best = None
    for rest in combinations(range(first + 1, p), n - 1):
        combo = (first,) + rest
        s = objective_size(combo, p, objective)
        if best is None or (s, combo) < best:
            best = (s, combo)
    return best


def exhaustive(p: int, n: int, objective: str = "shift_product", jobs: int = 1) -> SearchRecord:
    """Global minimum of the objective over all n-subsets of F_p minus 0.

    Ties break toward the lexicographically smallest set, so the result does
    not depend on ``jobs``.
    """
    FieldCtx.prime(p)
    if objective not in OBJECTIVES:
        raise BadParams(f"unknown objective {objective!r}")
    if not 1 <= n <= p - 1:
        raise BadParams(f"need 1 <= n <= p-1, got n={n}")
    total = comb(p - 1, n)
    if total > EXHAUSTIVE_LIMIT:
        raise TooLarge(f"C({p - 1},{n}) = {total} candidates exceeds {EXHAUSTIVE_LIMIT}")
    jobs = max(1, int(jobs))
    tasks = [(p, n, objective, first) for first in range(1, p - n + 1)]
    if jobs == 1:
        results = [_best_with_first(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_best_with_first, tasks))
    size, combo = min(r for r in results if r is not None)
    return make_record(combo, p, objective, generator=f"exhaustive(p={p},n={n})")


def hill_climb(start: FSet, objective: str = "shift_product", steps: int = 1000, seed: int = 0) -> SearchRecord:
    """Single-element swap local search; never returns worse than ``start``.

    Equal-cost moves are accepted so the walk can cross plateaus; the best
    set seen (lexicographic tie-break) is returned.
    """
    p = start.ctx.p
    if p is None:
        raise BadParams("hill climbing needs a prime field")
    if len(start) < 2:
        raise BadParams("start set needs at least 2 elements")
    if start.has_zero():
        raise BadParams("candidate sets exclude 0")
    if len(start) >= p - 1:
        return make_record(start.elems, p, objective, seed, "hill_climb")
    rng = random.Random(seed)
    cur = list(start.elems)
    cur_size = objective_size(cur, p, objective)
    best = (cur_size, tuple(sorted(cur)))
    for _ in range(steps):
        members = set(cur)
        i = rng.randrange(len(cur))
        new = rng.randrange(1, p)
        while new in members:
            new = rng.randrange(1, p)
        cand = cur[:i] + [new] + cur[i + 1 :]
        s = objective_size(cand, p, objective)
        if s <= cur_size:
            cur, cur_size = cand, s
            key = (s, tuple(sorted(cand)))
            if key < best:
                best = key
    return make_record(best[1], p, objective, seed, f"hill_climb(steps={steps})")


# -- structured families ---------------------------------------------------


def primitive_root(p: int) -> int:
    n = p - 1
    factors = _prime_factors(n)
    for g in range(2, p):
        if all(pow(g, n // q, p) != 1 for q in factors):
            return g
    return 1


def _prime_factors(n: int) -> List[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def has_order(g: int, n: int, p: int) -> bool:
    """True iff g has multiplicative order exactly n mod p."""
    if g % p == 0 or pow(g, n, p) != 1:
        return False
    return all(pow(g, n // q, p) != 1 for q in _prime_factors(n))


def subgroup_generator(p: int, order: int) -> int:
    if (p - 1) % order:
        raise BadParams(f"no subgroup of order {order} in F_{p}^*: {order} does not divide {p - 1}")
    return pow(primitive_root(p), (p - 1) // order, p)


def generate_family(kind: str, ctx: FieldCtx, **params) -> FSet:
    """Structured test sets.

    geometric(g, n)         {g, ..., g^n}
    arithmetic(a, d, n)     {a, a+d, ..., a+(n-1)d}
    subgroup(n[, g])        the order-n subgroup (g must have order n)
    subgroup_coset(n, x[, g])  x times the order-n subgroup
    """
    try:
        n = int(params["n"])
        if kind == "geometric":
            return geometric(ctx, params["g"], n, start=1)
        if kind == "arithmetic":
            return arithmetic(ctx, params["a"], params["d"], n)
        if kind in ("subgroup", "subgroup_coset"):
            p = ctx.p
            if p is None:
                raise BadParams("subgroups need a prime field")
            g = params.get("g")
            if g is None:
                g = subgroup_generator(p, n)
            elif not has_order(int(g), n, p):
                raise BadParams(f"{g} does not have order {n} mod {p}")
            H = geometric(ctx, g, n, start=0)
            if kind == "subgroup":
                return H
            x = ctx(params.get("x", 1))
            if x == 0:
                raise BadParams("coset representative must be nonzero")
            return dilate(H, x)
    except KeyError as exc:
        raise BadParams(f"{kind} needs parameter {exc}") from None
    raise BadParams(f"unknown family {kind!r}")


def coset_or_truncation(ctx: FieldCtx, n: int, x: int = 1) -> Tuple[FSet, bool]:
    """x * H_n when n divides p-1; otherwise the first n elements of x * H_m
    for the smallest subgroup order m > n.  Returns (set, is_exact_coset)."""
    p = ctx.p
    if (p - 1) % n == 0:
        return generate_family("subgroup_coset", ctx, n=n, x=x), True
    m = next(d for d in range(n + 1, p) if (p - 1) % d == 0)
    g = subgroup_generator(p, m)
    return dilate(geometric(ctx, g, n, start=0), x), False


def append_ledger(path, records: List[SearchRecord]) -> None:
    """Append records to a CSV ledger (objective, p, n, set, value, seed)."""
    path = Path(path)
    new = not path.exists()
    with path.open("a", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(["objective", "p", "n", "set", "size", "value", "seed"])
        for r in records:
            w.writerow([r.objective, r.p, r.n, ",".join(map(str, r.elems)), r.size, r.value, r.seed])
