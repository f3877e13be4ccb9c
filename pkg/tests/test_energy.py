from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import energy_tuples, rep_counts
from sumprod.energy import (
    bucket_count,
    dyadic_buckets,
    energy_bruteforce,
    energy_moment,
    pigeonhole_floor,
    rep_function,
    richest_bucket,
)
from sumprod.errors import DivisionByZero, EmptyHistogram, TooLarge
from sumprod.field import FieldCtx
from sumprod.setops import FSet, dilate

TRI_RATIO = {Fr(1): 3, Fr(2): 2, Fr(1, 2): 2, Fr(4): 1, Fr(1, 4): 1}


def test_rep_function_examples(tri, Q):
    assert dict(rep_function(tri, tri, "ratio").counts) == TRI_RATIO
    assert dict(rep_function(FSet.of(Q, [1]), FSet.of(Q, [1]), "ratio").counts) == {1: 1}
    assert dict(rep_function(tri, tri, "product").counts) == {1: 1, 2: 2, 4: 3, 8: 2, 16: 1}
    with pytest.raises(DivisionByZero):
        rep_function(tri, FSet.of(Q, [0, 1]), "ratio")


def test_energy_examples(tri, Q):
    h = rep_function(tri, tri, "ratio")
    assert energy_moment(h, 1) == 9
    assert energy_moment(h, 2) == 19
    assert energy_moment(h, 4) == 115
    assert energy_bruteforce(tri, tri, "ratio", 2) == 19
    one = FSet.of(Q, [1])
    assert energy_bruteforce(one, one, "ratio", 4) == 1
    A = FSet.of(Q, [1, 2])
    assert energy_bruteforce(A, A, "ratio", 2) == 6


def test_fractional_moment(tri):
    h = rep_function(tri, tri, "ratio")
    exact = 3 ** (4 / 3) + 2 * 2 ** (4 / 3) + 2
    assert math.isclose(energy_moment(h, "4/3"), exact, rel_tol=1e-12)
    assert isinstance(energy_moment(h, Fr(3)), int)


def test_bruteforce_guard(F101):
    A = FSet(F101, tuple(range(1, 12)))
    with pytest.raises(TooLarge):
        energy_bruteforce(A, A, "ratio", 4)


def test_composite_histogram_counts_triples(tri):
    BA = rep_function(tri, tri, "product")
    h = rep_function(BA, tri, "ratio")
    assert h.mass == 27
    slow = rep_counts([b * a for b in tri for a in tri], list(tri), "ratio", None)
    assert dict(h.counts) == dict(slow)


@pytest.mark.parametrize("op", ["ratio", "product", "sum", "difference"])
def test_against_tuple_oracle(op):
    rng = random.Random(hash(op) % 1000)
    for p in (13, None):
        ctx = FieldCtx.rational() if p is None else FieldCtx.prime(p)
        for _ in range(25):
            X = FSet.of(ctx, rng.sample(range(1, 13), rng.randint(1, 4)))
            Y = FSet.of(ctx, rng.sample(range(1, 13), rng.randint(1, 4)))
            h = rep_function(X, Y, op)
            assert dict(h.counts) == dict(rep_counts(list(X), list(Y), op, p))
            for n in (2, 3):
                want = energy_tuples(list(X), list(Y), op, n, p)
                assert energy_moment(h, n) == want
                assert energy_bruteforce(X, Y, op, n) == want


def test_mass_exhaustive_small():
    F = FieldCtx.prime(101)
    rng = random.Random(3)
    sets = [FSet(F, tuple(rng.sample(range(101), k))) for k in range(1, 6) for _ in range(12)]
    for X, Y in itertools.product(sets, sets):
        assert rep_function(X, Y, "product").mass == len(X) * len(Y)
        assert rep_function(X, Y, "sum").mass == len(X) * len(Y)


small = st.lists(st.integers(1, 100), min_size=1, max_size=10)


@settings(max_examples=100)
@given(small, small, st.integers(1, 100))
def test_energy_properties(xs, ys, lam):
    F = FieldCtx.prime(101)
    A, B = FSet.of(F, xs), FSet.of(F, ys)
    h = rep_function(A, B, "ratio")
    E1, E2, E3 = (energy_moment(h, n) for n in (1, 2, 3))
    assert E1 == len(A) * len(B)
    assert E2 * E2 <= E1 * E3
    EAB = energy_moment(rep_function(A, B, "ratio"), 2)
    EAA = energy_moment(rep_function(A, A, "ratio"), 2)
    EBB = energy_moment(rep_function(B, B, "ratio"), 2)
    assert EAB * EAB <= EAA * EBB
    hl = rep_function(dilate(A, lam), dilate(B, lam), "ratio")
    assert sorted(hl.counts.values()) == sorted(h.counts.values())
    bs = dyadic_buckets(h)
    seen = set()
    for b in bs:
        assert b.tau & (b.tau - 1) == 0
        for x in b.members:
            assert b.tau <= h[x] < 2 * b.tau
            assert x not in seen
            seen.add(x)
    assert seen == set(h.counts)
    assert len(bs) <= bucket_count(h)
    for n in (1, 2, 4, "4/3"):
        rb = richest_bucket(h, n)
        assert rb.weight >= pigeonhole_floor(h, n) * (1 - 1e-12)


def test_dyadic_examples(Q, tri):
    h = rep_function(tri, tri, "ratio")
    bs = dyadic_buckets(h)
    assert [(b.tau, set(b.members)) for b in bs] == [(1, {Fr(4), Fr(1, 4)}), (2, {Fr(1), Fr(2), Fr(1, 2)})]
    rb = richest_bucket(h, 4)
    assert rb.tau == 2 and rb.weight == 48
    rb2 = richest_bucket(h, 2)
    assert rb2.tau == 2 and rb2.weight == 12
    one = FSet.of(Q, [1])
    assert richest_bucket(rep_function(one, one, "ratio"), 3).tau == 1
    # a single element of count 8 sits alone in the tau = 8 bucket
    A = FSet.of(Q, [1, 2, 4, 8, 16, 32, 64, 128])
    h8 = rep_function(A, A, "ratio")
    assert richest_bucket(h8.restrict([Fr(1)]), 1).tau == 8
    with pytest.raises(EmptyHistogram):
        richest_bucket(h.restrict([]), 2)


def test_divisor_without_2n_can_fail(tri):
    """The richest bucket can weigh less than E_n/(floor(log2 rmax)+1);
    the factor 2^n coming from r < 2 tau is needed."""
    h = rep_function(tri, tri, "ratio").restrict([Fr(1)])  # one count of 3
    rb = richest_bucket(h, 4)
    E4 = energy_moment(h, 4)
    assert (rb.tau, rb.weight, E4) == (2, 16, 81)
    assert rb.weight < E4 / (math.floor(math.log2(h.max_count)) + 1)
    assert rb.weight >= pigeonhole_floor(h, 4)
