from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chowlakit import arith, walks
from chowlakit.walks import SignedWalk

EXAMPLE = (5, -4, -1, 2, -2, 4, 5, -5, -4, -1, -9, -7, 7, 8, -8, 9)
D3 = arith.shift_set_from_lists([[2, 3, 5], [7]])
D21_35 = arith.shift_set_from_lists([[3, 5], [7]])


def naive_reduce(steps):
    steps = list(steps)
    changed = True
    while changed:
        changed = False
        for k in range(len(steps) - 1):
            if steps[k] == -steps[k + 1]:
                del steps[k : k + 2]
                changed = True
                break
    return steps


@pytest.mark.parametrize(
    "steps,shifts,partials,closed",
    [((21, -21), D21_35, (0, 21, 0), True), ((14, 21, -35), D3, (0, 14, 35, 0), True)],
)
def test_partial_sums(steps, shifts, partials, closed):
    w = walks.build_walk(steps, shifts)
    assert w.partials == partials and w.closed == closed


def test_open_walk():
    w = SignedWalk((22,))
    assert w.partials == (0, 22) and not w.closed


def test_build_walk_rejects_foreign_step():
    with pytest.raises(ValueError):
        walks.build_walk((14, 22), D3)


def test_single_indices_and_bad_singles():
    w = walks.build_walk((14, 21, -35), D3)
    s = walks.single_indices(w)
    assert s == {(1, 1), (2, 1), (3, 1)}
    assert walks.bad_single_indices(w, s) == set()
    with pytest.raises(ValueError):
        walks.bad_single_indices(w, frozenset())


def test_bad_single_clause_one():
    # b_1 = b_4 = 0 and rows 1 and 4 carry single primes
    shifts = arith.shift_set_from_lists([[2, 3, 5, 11], [7, 13]])
    w = walks.build_walk((14, 21, -35, 143), shifts)
    s = walks.single_indices(w)
    assert {(1, 1), (4, 1), (4, 2)} <= s and w.b(1) == w.b(4)
    assert {(1, 1), (4, 1), (4, 2)} <= walks.bad_single_indices(w, s)


def test_bad_singles_of_one_step():
    w = walks.build_walk((21,), D21_35)
    assert walks.bad_single_indices(w, walks.single_indices(w)) == set()


@pytest.mark.parametrize(
    "steps,expected",
    [(EXAMPLE, [5, -4, -1, -1]), ((5, -4, -1, -1), [5, -4, -1, -1]), ((3, -3), [])],
)
def test_reduce(steps, expected):
    assert list(walks.reduce_walk(SignedWalk(steps)).steps) == expected


@given(st.lists(st.sampled_from([-3, -2, -1, 1, 2, 3]), max_size=30))
def test_reduce_matches_naive_and_is_idempotent(steps):
    red = walks.reduce_walk(SignedWalk(tuple(steps)))
    assert list(red.steps) == naive_reduce(steps)
    assert walks.reduce_walk(red) == red
    _, iota = walks.reduce_with_map(SignedWalk(tuple(steps)))
    assert [steps[k - 1] for k in iota] == list(red.steps)


def test_decomposition_of_example():
    dec = walks.decompose_backtracking(SignedWalk(EXAMPLE), allow_open=True)
    assert dec.shifts == (0, 1, 2, 4, 1, 3, 5)
    assert dec.appended == (-9, 8, -7, 4, 5, 2)
    assert sum(dec.shifts) == 16
    assert walks.replay(dec.reduced.steps, dec.shifts, dec.appended) == list(EXAMPLE)


def test_decomposition_needs_closed_walk_by_default():
    with pytest.raises(ValueError):
        walks.decompose_backtracking(SignedWalk(EXAMPLE))


def test_decomposition_of_reduced_walk():
    w = SignedWalk((21, 35, -21, -35))
    dec = walks.decompose_backtracking(w)
    assert dec.M == 0 and dec.shifts == (4,)


def test_decomposition_of_backtrack():
    dec = walks.decompose_backtracking(SignedWalk((7, -7)))
    assert dec.reduced.steps == () and dec.appended == (7,)
    assert walks.replay((), dec.shifts, dec.appended) == [7, -7]


@given(st.lists(st.sampled_from([-3, -2, -1, 1, 2, 3]), max_size=24))
def test_replay_roundtrip(steps):
    w = SignedWalk(tuple(steps))
    dec = walks.decompose_backtracking(w, allow_open=True)
    assert walks.replay(dec.reduced.steps, dec.shifts, dec.appended) == steps
    assert sum(dec.shifts) == len(steps)
    assert dec.reduced == walks.reduce_walk(w)


@pytest.mark.parametrize("h", [-1, 4])
def test_tau_range(h):
    with pytest.raises(ValueError):
        walks.tau([1, 2, 3], h)


def test_tau():
    assert walks.tau([1, 2, 3, 4], 1) == [4, 1, 2, 3]


@pytest.mark.parametrize(
    "steps,expected",
    [((14, 21, -35), []), ((14, 33, -14), [(1, 3, 2), (1, 3, 7)]), ((14, -14), [])],
)
def test_minimal_divisibility_triples(steps, expected):
    shifts = arith.shift_set_from_lists([[2, 3, 5], [7, 11]])
    assert walks.minimal_divisibility_triples(walks.build_walk(steps, shifts)) == expected


def test_splits_enumerate_power_set_in_order():
    w = walks.build_walk((14, 21, -14, -21), D3)
    single, splits = walks.classify_indices(w)
    splits = list(splits)
    rest = len(w.indices()) - len(single)
    assert len(splits) == 2**rest
    sizes = [len(p.unlit) for p in splits]
    assert sizes == sorted(sizes)
    for p in splits:
        p.check(w)
    assert len(list(walks.lit_unlit_splits(w, max_unlit=1))) == 1 + rest


def test_partition_check_rejects_overlap():
    w = walks.build_walk((14, -14), D3)
    everything = frozenset(w.indices())
    with pytest.raises(ValueError):
        walks.IndexPartition(frozenset(), everything, everything).check(w)


def test_lit_conditions():
    w = walks.build_walk((14, 21, -14, -21), D3)
    lit = frozenset({(1, 2), (2, 2)})
    # 7 | b_2 - b_1 = 14
    assert walks.lit_condition_1(w, lit)
    assert walks.lit_prime_counts(w, lit) == [1, 1, 1, 1]
    assert walks.lit_condition_2(w, lit, 1) and not walks.lit_condition_2(w, lit, 0)
    # 2 at rows 1 and 3 but b_3 - b_1 = 29 is odd
    bad = walks.build_walk((14, 15, -14), arith.shift_set_from_lists([[2, 3], [5, 7]]))
    assert not walks.lit_condition_1(bad, frozenset({(1, 1), (3, 1)}))


@given(st.integers(0, 10**6))
def test_extension_types_partition_layers(seed):
    rng = random.Random(seed)
    half = [rng.choice(D3.signed) for _ in range(rng.randint(1, 4))]
    steps = []
    for d in half:
        steps.append(d)
        if rng.random() < 0.5:
            steps += [-steps[-1], steps[-1]] if rng.random() < 0.5 else []
    steps = steps + [-d for d in reversed(steps)]
    w = walks.build_walk(steps, D3)
    single, splits = walks.classify_indices(w, max_unlit=1)
    for part in splits:
        for ext in walks.extension_types(w, part):
            assert ext.jn | ext.jl | ext.ju == set(range(1, w.J + 1))
            assert not (ext.jn & ext.jl or ext.jn & ext.ju or ext.jl & ext.ju)
