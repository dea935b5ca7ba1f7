from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chowlakit import arith, correlations, spectral

D_21_35 = arith.shift_set_from_lists([[3, 5], [7]])
D_21 = arith.shift_set_from_lists([[3], [7]])
TABLE = arith.liouville_sieve(1, 20_000)


def direct_s2(lo, hi, shifts, table):
    total = Fraction(0)
    for n in range(lo + 1, hi + 1):
        for d in shifts:
            w = Fraction(1)
            for p in shifts.factor_tuple(d):
                w *= (n % p == 0) - Fraction(1, p)
            total += w * table[n] * table[n + d]
    return total


def test_s1_empty_when_no_multiples():
    assert correlations.s1_sum(0, 20, D_21_35, TABLE).value == 0


def test_s1_two_terms():
    expected = TABLE[21] * TABLE[42] + TABLE[42] * TABLE[63]
    assert correlations.s1_sum(20, 42, D_21, TABLE).value == expected


def test_empty_range():
    assert correlations.s2_sum(50, 50, D_21_35, TABLE).value == 0
    assert all(v == 0 for v in correlations.expansion_terms(50, 50, D_21_35, TABLE).values())


def test_table_too_short():
    with pytest.raises(ValueError):
        correlations.s1_sum(0, 20_000, D_21_35, TABLE)


def test_s2_with_constant_lambda_is_weight_count():
    ones = arith.LiouvilleTable.constant(1, 1000)
    got = correlations.s2_sum(0, 900, D_21_35, ones).value
    expected = Fraction(0)
    for d in D_21_35:
        for n in range(1, 901):
            expected += math.prod((n % p == 0) - Fraction(1, p) for p in D_21_35.factor_tuple(d))
    assert got == expected


@pytest.mark.parametrize("layers", [[[3, 5], [7]], [[2, 3], [5], [7, 11]], [[5, 7, 11]]])
@pytest.mark.parametrize("lo,hi", [(0, 500), (1234, 3000)])
def test_s2_minus_s1_equals_expansion(layers, lo, hi):
    shifts = arith.shift_set_from_lists(layers)
    s1 = correlations.s1_sum(lo, hi, shifts, TABLE).value
    s2, terms = correlations.s2_sum_and_expansion(lo, hi, shifts, shifts.layers, TABLE)
    assert s2.value == direct_s2(lo, hi, shifts, TABLE)
    assert s2.value - s1 == sum(terms.values())
    assert set(terms) == {I for r in range(1, shifts.J + 1) for I in itertools.combinations(range(1, shifts.J + 1), r)}


@given(st.integers(0, 2000), st.integers(0, 300), st.integers(0, 10**6))
def test_expansion_identity_random(lo, width, seed):
    rng = random.Random(seed)
    pool = [2, 3, 5, 7, 11, 13]
    rng.shuffle(pool)
    layers = [pool[:2], pool[2:3], pool[3:5]][: rng.randint(1, 3)]
    shifts = arith.shift_set_from_lists(layers)
    hi = lo + width
    s1 = correlations.s1_sum(lo, hi, shifts, TABLE).value
    s2 = correlations.s2_sum(lo, hi, shifts, TABLE).value
    assert s2 - s1 == sum(correlations.expansion_terms(lo, hi, shifts, TABLE).values())


def test_float_mode_close_to_exact():
    exact = correlations.s2_sum(0, 5000, D_21_35, TABLE).value
    approx = correlations.s2_sum(0, 5000, D_21_35, TABLE, exact=False).value
    assert abs(float(exact) - approx) < 1e-9


@pytest.mark.parametrize("lo,hi", [(0, 60), (100, 180)])
def test_quadratic_form_matches_graph(lo, hi):
    shifts = arith.shift_set_from_lists([[2, 3], [5]])
    g = spectral.build_graph("G0", lo, hi, shifts)
    values = [TABLE[n] for n in range(lo + 1, hi + 1)]
    s2 = correlations.s2_sum(lo, hi, shifts, TABLE).value
    boundary = correlations.quadratic_form_boundary(lo, hi, shifts, TABLE)
    assert spectral.quadratic_form(g, values) == 2 * (s2 - boundary)


@pytest.mark.parametrize("x,expected", [(1, Fraction(-1)), (2, Fraction(-1, 2))])
def test_log_chowla_small(x, expected):
    assert correlations.log_chowla_exact(x, TABLE) == expected
    assert correlations.log_chowla_sum(x, TABLE) == pytest.approx(float(expected))


def test_log_chowla_routes_agree():
    x = 10**6
    table = arith.liouville_sieve(1, x + 1)
    lam = arith.liouville_spf(x + 1)
    oracle = math.fsum(int(lam[n]) * int(lam[n + 1]) / n for n in range(1, x + 1))
    assert abs(correlations.log_chowla_sum(x, table) - oracle) < 1e-10
    assert abs(correlations.log_chowla_dyadic(x, table) - oracle) < 1e-10


def test_log_chowla_exact_matches_float():
    assert float(correlations.log_chowla_exact(300, TABLE)) == pytest.approx(correlations.log_chowla_sum(300, TABLE), abs=1e-12)


@pytest.mark.parametrize("x,primes", [(50, (3,)), (40, (2, 5)), (30, (3, 7))])
def test_rescaled_sum_matches_definition(x, primes):
    d = math.prod(primes)
    got = correlations.rescaled_log_sum(x, d, TABLE)
    # lambda(d m) lambda(d m + d) = lambda(m) lambda(m + 1) by complete multiplicativity
    assert got == sum((Fraction(TABLE[m] * TABLE[m + 1], m) for m in range(1, x + 1)), Fraction(0))
