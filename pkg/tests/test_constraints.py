from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chowlakit import arith, constraints, walks
from chowlakit.arith import ResourceError
from chowlakit.constraints import Constraint, TriangularSystem

D3 = arith.shift_set_from_lists([[2, 3, 5], [7]])
W = walks.build_walk((14, 21, -35), D3)


def test_constraint_runs():
    con = Constraint.make([5, 1, 2, 3, 7, 6], (1, 1))
    assert con.intervals == ((1, 3), (5, 7)) and con.c == 2
    assert con.indices == (1, 2, 3, 5, 6, 7)
    assert Constraint.interval(3, 2, (1, 1)).indices == ()


@pytest.mark.parametrize("kappa,expected", [(0, True), (1, False)])
def test_evaluate_examples(kappa, expected):
    assert constraints.evaluate_constraint(W, Constraint.make([2, 3], (1, 2), kappa)) is expected


def test_empty_index_set_holds():
    assert all(constraints.evaluate_constraint(W, Constraint.make([], (i, j))) for i, j in W.indices())


def test_pivot_outside_walk():
    with pytest.raises(ValueError):
        constraints.evaluate_constraint(W, Constraint.make([1], (4, 1)))


def test_status_examples():
    con = Constraint.make([2, 3], (1, 2))
    assert constraints.prime_status(W, con, 2) == "absent"
    assert constraints.prime_status(W, con, 7) == "neither"
    # 3 divides only 21, which the pivot prime 7 also divides
    assert constraints.prime_status(W, con, 3) == "neither"
    assert constraints.prime_status(W, Constraint.make([1, 2], (3, 1)), 2) == ("involved", ("iii",))
    with pytest.raises(ValueError):
        constraints.prime_status(W, con, 11)


def test_involved_case_i():
    # sum over I is zero and 2 divides only 14
    con = Constraint.make([1, 2, 3], (1, 2))
    assert "i" in constraints.involvement_cases(W, con, 2)


@given(st.lists(st.sampled_from(D3.signed), min_size=1, max_size=4), st.data())
def test_status_matches_definition(steps, data):
    w = walks.build_walk(steps, D3)
    I = data.draw(st.lists(st.integers(1, w.R), unique=True))
    pivot = (data.draw(st.integers(1, w.R)), data.draw(st.integers(1, w.J)))
    kappa = data.draw(st.integers(-3, 3))
    con = Constraint.make(I, pivot, kappa)
    q = w.p(*pivot)
    ds = [w.d(i) for i in sorted(I)]
    for p in w.primes():
        absent = p != q and all(d % p for d in ds)
        c1 = kappa == 0 and sum(ds) == 0 and sum(d for d in ds if d % p == 0) != 0
        c2 = kappa == 0 and p == q and sum(d for d in ds if d % p) != 0
        c3 = p != q and sum(d for d in ds if d % p == 0) % q != 0
        st_ = constraints.prime_status(w, con, p)
        if absent:
            assert st_ == "absent"
        elif c1 or c2 or c3:
            assert st_[0] == "involved"
        else:
            assert st_ == "neither"


def test_single_constraint_system():
    ok, cert = constraints.verify_triangular(W, TriangularSystem((Constraint.make([1, 2, 3], (1, 2)),)))
    assert ok and cert[0].prime == 2 and "i" in cert[0].cases
    # no prime is involved in this one
    assert not constraints.verify_triangular(W, TriangularSystem((Constraint.make([2, 3], (1, 2)),)))[0]


def test_system_with_reused_prime_is_rejected():
    w = walks.build_walk((14, 21, -35, 14), D3)
    first = Constraint.make([1, 2, 3], (1, 2))
    second = Constraint.make([4], (4, 1))  # 2 | 14, and 2 already divides d_1 in the first set
    ok, cert = constraints.verify_triangular(w, TriangularSystem((first, second), (2, 2)))
    assert not ok and (cert[-1].t, cert[-1].prime) == (2, 2)


def test_false_constraint_is_rejected():
    ok, cert = constraints.verify_triangular(W, TriangularSystem((Constraint.make([2], (1, 1)),)))
    assert not ok and cert[0].reason == "constraint does not hold"


def test_system_on_concatenation():
    shifts = arith.shift_set_from_lists([[2, 3, 5], [7, 11]])
    w = walks.build_walk((14, 33, -35, 22), shifts)
    dw = constraints.doubled(w)
    assert dw.steps == (14, 33, -35, 22, -14, -33, 35, -22) and dw.closed
    # the index set crosses from d into -d
    system = TriangularSystem((Constraint.interval(1, 5, (1, 1)),))
    ok, cert = constraints.verify_triangular(dw, system)
    assert ok and cert[0].cases


def test_complexity():
    s = TriangularSystem((Constraint.make([1, 3], (1, 1), 2), Constraint.make([1], (1, 1), 2)))
    assert s.complexity == (2, 2, 2)
    with pytest.raises(ValueError):
        TriangularSystem((Constraint.make([1], (1, 1), 1), Constraint.make([1], (1, 1), 2))).complexity


def test_weighted_count_oracle_examples():
    D = arith.shift_set_from_lists([[3, 5], [7]])
    assert constraints.weighted_count_oracle(1, D, lambda w: True) == 2 * (Fraction(1, 21) + Fraction(1, 35))
    assert constraints.weighted_count_oracle(1, D, None) == 0


def test_weighted_count_oracle_double_enumeration():
    D = arith.shift_set_from_lists([[3, 5], [7]])
    con = Constraint.make([1, 2], (1, 1))
    got = constraints.weighted_count_oracle(2, D, lambda w: constraints.evaluate_constraint(w, con))
    expected = Fraction(0)
    for d1 in (-35, -21, 21, 35):
        for d2 in (-35, -21, 21, 35):
            p = D.factor_tuple(d1)[0]
            if (d1 + d2) % p == 0:
                expected += Fraction(1, math.prod(arith.prime_divisors(abs(d1 * d2))))
    assert got == expected


def test_weighted_count_guard():
    with pytest.raises(ResourceError):
        constraints.weighted_count_oracle(20, D3, lambda w: True)


BAD_D = arith.shift_set_from_lists([[11, 13, 17], [19, 23]])


@pytest.mark.parametrize("seed", range(30))
def test_bad_single_systems_verify(seed):
    rng = random.Random(seed)
    for _ in range(20):
        w = walks.build_walk([rng.choice(BAD_D.signed) for _ in range(rng.randint(2, 8))], BAD_D)
        bad = walks.bad_single_indices(w, walks.single_indices(w))
        systems = constraints.bad_single_systems(w)
        assert bool(systems) == bool(bad)
        for system in systems.values():
            assert constraints.verify_triangular(w, system)[0]


def test_bad_single_decreasing_case():
    w = walks.build_walk((14, 21, -35, 143), arith.shift_set_from_lists([[2, 3, 5, 11], [7, 13]]))
    systems = constraints.bad_single_systems(w)
    assert "1" in systems
    assert all(constraints.verify_triangular(w, s)[0] for s in systems.values())


def test_layer_word():
    assert constraints.layer_word(W, 2) == ((7,), [(1, 3)])
    assert constraints.layer_word(W, 1)[0] == (2, 3, 5)


def constrained_walk(rng, shifts, R):
    steps, b = [], [0]
    while len(steps) < R:
        cands = [
            d
            for d in shifts.signed
            if not (steps and d == -steps[-1])
            and all(not (s % p == 0 and (b[-1] - b[k]) % p) for p in shifts.factor_tuple(d) for k, s in enumerate(steps))
        ]
        if not cands:
            return None
        steps.append(rng.choice(cands))
        b.append(b[-1] + steps[-1])
    return walks.build_walk(steps, shifts)


def test_repetition_routes_verify():
    rng = random.Random(3)
    checked = 0
    for _ in range(1500):
        w = constrained_walk(rng, BAD_D, rng.randint(4, 10))
        if w is None:
            continue
        S = walks.single_indices(w)
        part = walks.IndexPartition(S, frozenset(set(w.indices()) - S), frozenset())
        if constraints.repetition_hypotheses(w, part, w.R):
            continue
        for j in range(1, w.J + 1):
            if not constraints.repetition_triples(w, j):
                continue
            routes = constraints.repetition_systems(w, j, part)
            assert routes.chosen is not None
            assert routes.systems[routes.chosen].T >= -(-len(routes.triples) // 4)
            assert constraints.verify_triangular(w, routes.systems[routes.chosen])[0]
            checked += 1
    assert checked > 50


def test_repetition_hypotheses_report_problems():
    w = walks.build_walk((14, -14, 21), D3)
    S = walks.single_indices(w)
    part = walks.IndexPartition(S, frozenset(set(w.indices()) - S), frozenset())
    problems = constraints.repetition_hypotheses(w, part, 3)
    assert "walk backtracks" in problems and "R is not below the smallest prime" in problems


def test_interleaving_hypotheses_reject_malformed_patterns():
    w = walks.build_walk((14, 21, -35, 14, 21, -35), D3)
    S = walks.single_indices(w)
    part = walks.IndexPartition(S, frozenset(set(w.indices()) - S), frozenset())
    assert constraints.interleaving_hypotheses(w, part, 6, constraints.Interleaving(1, (1,), (), (4,)))
    out_of_order = constraints.Interleaving(1, (3, 2), (1,), (4, 5))
    assert "positions out of order" in constraints.interleaving_hypotheses(w, part, 6, out_of_order)


def test_interleaving_constraints_live_on_doubled_walk():
    w = walks.build_walk((14, 21, -35, 14, 21, -35), D3)
    S = walks.single_indices(w)
    part = walks.IndexPartition(S, frozenset(set(w.indices()) - S), frozenset())
    pat = constraints.Interleaving(2, (1, 3), (2,), (4, 6))
    for system in constraints.interleaving_systems(w, part, pat).values():
        for con in system.constraints:
            assert all(1 <= i <= 2 * w.R for i in con.indices)
