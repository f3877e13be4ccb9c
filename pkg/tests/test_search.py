from __future__ import annotations

import csv
import random

import pytest

from conftest import BIG_P
from oracles import min_shift_product, mult_order
from sumprod.errors import BadParams, TooLarge
from sumprod.field import FieldCtx
from sumprod.search import (
    append_ledger,
    coset_or_truncation,
    exhaustive,
    generate_family,
    has_order,
    hill_climb,
    make_record,
    objective_size,
    primitive_root,
)
from sumprod.setops import FSet, combine


def test_exhaustive_small_cases():
    r = exhaustive(7, 2)
    assert (r.size, r.elems) == min_shift_product(7, 2) == (3, (1, 5))
    assert objective_size((3, 5), 7, "shift_product") == 4
    r = exhaustive(13, 3)
    assert (r.size, r.elems) == min_shift_product(13, 3) == (5, (1, 6, 11))
    assert r.value == round(__import__("math").log(5) / __import__("math").log(3), 4)


def test_exhaustive_singletons_and_guard():
    r = exhaustive(11, 1)
    assert r.size == 1 and r.value is None
    with pytest.raises(TooLarge):
        exhaustive(101, 6)
    with pytest.raises(BadParams):
        exhaustive(7, 2, objective="nope")


def test_exhaustive_parallel_matches_serial():
    a = exhaustive(17, 4, "two_products", jobs=1)
    b = exhaustive(17, 4, "two_products", jobs=4)
    assert a == b


def test_hill_climb():
    F = FieldCtx.prime(101)
    rng = random.Random(42)
    start = FSet(F, tuple(rng.sample(range(1, 101), 6)))
    rec = hill_climb(start, steps=500, seed=42)
    assert rec.size <= objective_size(start.elems, 101, "shift_product")
    assert rec == hill_climb(start, steps=500, seed=42)
    opt = exhaustive(13, 3)
    again = hill_climb(FSet(FieldCtx.prime(13), opt.elems), steps=300, seed=1)
    assert again.size == opt.size
    H = generate_family("subgroup", F, n=10)
    r2 = hill_climb(H, "two_products", steps=300, seed=3)
    assert r2.size <= objective_size(H.elems, 101, "two_products")


def test_families(Q, F101):
    H = generate_family("subgroup", F101, n=10, g=6)
    assert len(H) == 10 and combine(H, H, "product") == H
    assert generate_family("arithmetic", Q, a=1, d=1, n=5).elems == (1, 2, 3, 4, 5)
    G = generate_family("geometric", Q, g=2, n=5)
    assert G.elems == (2, 4, 8, 16, 32) and len(combine(G, G, "product")) == 9
    with pytest.raises(BadParams):
        generate_family("subgroup", F101, n=10, g=36)
    with pytest.raises(BadParams):
        generate_family("subgroup", F101, n=7)
    C = generate_family("subgroup_coset", F101, n=20, x=3)
    assert len(C) == 20 and 3 in C


@pytest.mark.parametrize("n", [10, 30, 45, 90])
def test_big_field_subgroups_closed(n):
    F = FieldCtx.prime(BIG_P)
    H = generate_family("subgroup", F, n=n)
    assert combine(H, H, "product") == H
    assert all(pow(h, n, BIG_P) == 1 for h in H)
    assert sum(has_order(h, n, BIG_P) for h in H) >= 2
    g = primitive_root(101)
    assert mult_order(g, 101) == 100


def test_coset_or_truncation():
    F = FieldCtx.prime(BIG_P)
    A, exact = coset_or_truncation(F, 30, 3)
    assert exact and len(A) == 30
    A, exact = coset_or_truncation(F, 20, 3)
    assert not exact and len(A) == 20 and 0 not in A


def test_ledger(tmp_path):
    path = tmp_path / "ledger.csv"
    recs = [make_record((1, 5), 7, "shift_product", seed=3), make_record((1, 6, 11), 13, "shift_product")]
    append_ledger(path, recs[:1])
    append_ledger(path, recs[1:])
    rows = list(csv.DictReader(path.open()))
    assert [r["set"] for r in rows] == ["1,5", "1,6,11"]
    assert rows[0]["seed"] == "3" and rows[0]["objective"] == "shift_product"
