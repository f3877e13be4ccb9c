from __future__ import annotations

import math
import random

import pytest

from conftest import BIG_P
from oracles import popular
from sumprod.errors import SetTooSmall, ZeroElement
from sumprod.field import FieldCtx
from sumprod.popularity import energy_43, intersection_bound_check, popular_decompose, refine_43
from sumprod.search import generate_family
from sumprod.setops import FSet


def test_decompose_example(tri):
    dec = popular_decompose(tri, tri)
    assert math.isclose(dec.threshold_P, 9 / (math.log(3) * 5), rel_tol=1e-12)
    assert dec.P.elems == (2, 4, 8)
    assert dec.A_prime.elems == (1, 2, 4)
    assert dec.covered_pairs == 7 and dec.uncovered_pairs == 2
    # rows {2,4}, {1,2,4}, {1,2}: the pair (1, 4) shares only b = 2
    assert intersection_bound_check(dec) == 1


def test_decompose_errors(Q):
    one = FSet.of(Q, [1])
    with pytest.raises(SetTooSmall):
        popular_decompose(one, one)
    with pytest.raises(ZeroElement):
        popular_decompose(FSet.of(Q, [0, 1, 2]), FSet.of(Q, [1]))
    dec = popular_decompose(one, one, force=True)
    assert not dec.guaranteed and dec.A_prime == one


def test_subgroup_order_25(F101):
    H = generate_family("subgroup", F101, n=25)
    dec = popular_decompose(H, H)
    assert dec.covered_pairs >= (1 - 1 / math.log(25)) * 625
    assert dec.covered_pairs == 625


@pytest.mark.parametrize("seed", range(20))
def test_against_oracle_and_guarantees(seed):
    rng = random.Random(seed)
    p = rng.choice([101, 1009, BIG_P])
    F = FieldCtx.prime(p)
    hi = min(p - 1, 200)
    A = FSet(F, tuple(rng.sample(range(1, hi), rng.randint(3, 40))))
    B = FSet(F, tuple(rng.sample(range(1, hi), rng.randint(1, 40))))
    dec = popular_decompose(A, B)
    P, Ap, cov, rows = popular(list(A), list(B), p)
    assert set(dec.P) == P and list(dec.A_prime) == Ap and dec.covered_pairs == cov
    nA, nB = len(A), len(B)
    assert dec.covered_pairs + dec.uncovered_pairs == nA * nB
    assert dec.uncovered_pairs < nA * nB / math.log(nA)
    assert dec.covered_pairs >= (1 - 1 / math.log(nA)) * nA * nB
    if nA >= 21:
        assert len(dec.A_prime) >= (1 - 3 / math.log(nA)) * nA
    if len(dec.A_prime):
        k = intersection_bound_check(dec)
        assert 3 * k >= nB
        want = min(len(rows[a] & rows[b]) for a in Ap for b in Ap)
        assert k == want


def test_refine_examples(tri):
    r = refine_43(tri, tri, force=True)
    assert r.iterations <= math.ceil(math.log(3)) and r.stopped
    assert r.iterations == 0 and r.A1 == tri
    with pytest.raises(SetTooSmall):
        refine_43(tri, tri)


def test_refine_subgroup_order_30():
    F = FieldCtx.prime(BIG_P)
    H = generate_family("subgroup", F, n=30)
    r = refine_43(H, H)
    assert r.guaranteed and r.stopped
    assert r.iterations <= math.ceil(math.log(30))
    assert len(r.A1) >= 30 / math.e**3
    last = r.trace[-1]
    assert last.prime_energy >= last.energy / 4 * (1 - 1e-9)
    assert math.isclose(last.energy, energy_43(r.A1), rel_tol=1e-12)


def test_refine_trace_consistent():
    F = FieldCtx.prime(BIG_P)
    rng = random.Random(5)
    A = FSet(F, tuple(rng.sample(range(1, 10**6), 25)))
    r = refine_43(A, A)
    assert r.energies[0] == pytest.approx(energy_43(A), rel=1e-12)
    for step in r.trace:
        assert step.prime_size <= step.size
