from __future__ import annotations

import itertools
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chowlakit import arith, prohibited, walks
from chowlakit.arith import ResourceError

D3 = arith.shift_set_from_lists([[2, 3, 5], [7]])


def brute_primitive(shifts, L):
    out = []
    for ell in range(3, L + 1):
        for seq in itertools.product(shifts.signed, repeat=ell):
            if prohibited.is_prohibited(seq, L) and prohibited.check_primitive(seq, L):
                out.append(seq)
    return out


def chain_hits(n, seq):
    partial = 0
    for d in seq:
        if (n + partial) % d:
            return False
        partial += d
    return True


def test_certificate_of_35_14_21():
    ok, cert = prohibited.check_prohibited((35, 14, 21), 3)
    assert ok and (cert.p, cert.ell0) == (5, 2)


@pytest.mark.parametrize(
    "seq,field",
    [((21, -21, 35), "non_backtracking"), ((14, 22, 26), "pattern")],
)
def test_not_prohibited(seq, field):
    ok, cert = prohibited.check_prohibited(seq, 3)
    assert not ok and not getattr(cert, field)


def test_length_checked():
    with pytest.raises(ValueError):
        prohibited.check_prohibited((35, 14), 3)
    with pytest.raises(ValueError):
        prohibited.check_prohibited((35, 14, 21, 14), 3)
    assert not prohibited.is_prohibited((35, 14), 3)


def test_primitive_examples():
    assert prohibited.check_primitive((35, 14, 21))
    assert not prohibited.is_prohibited((21, 14, 35), 3)
    with pytest.raises(ValueError):
        prohibited.check_primitive((21, 14, 35))


def test_nested_prohibited_block_is_not_primitive():
    for seq in itertools.product(D3.signed, repeat=4):
        if prohibited.is_prohibited(seq, 4) and any(
            prohibited.is_prohibited(s[k : k + 3], 4) for s in (seq, seq[::-1]) for k in range(2)
        ):
            assert not prohibited.check_primitive(seq, 4)
            return
    pytest.fail("no nested instance found")


def test_progression_of_35_14_21():
    prog = prohibited.to_progression((35, 14, 21))
    assert (prog.residue, prog.modulus) == (35, 210)
    assert all(chain_hits(n, (35, 14, 21)) == (n in prog) for n in range(420))


def test_progression_needs_length_three():
    with pytest.raises(ValueError):
        prohibited.to_progression((35,))


@given(st.lists(st.sampled_from(D3.signed), min_size=3, max_size=4))
def test_progression_is_solution_set(seq):
    prog = prohibited.to_progression(seq)
    for n in range(prog.modulus):
        assert chain_hits(n, seq) == (n in prog)
    neg = prohibited.to_progression([-d for d in seq])
    assert neg.modulus == prog.modulus
    if not neg.empty:
        assert chain_hits(neg.residue, [-d for d in seq])


@pytest.mark.parametrize("layers,L", [([[2, 3, 5], [7]], 3), ([[3, 5], [7]], 4), ([[2, 3], [5, 7]], 3)])
def test_enumeration_matches_brute_force(layers, L):
    shifts = arith.shift_set_from_lists(layers)
    assert sorted(prohibited.enumerate_primitive(shifts, L)) == sorted(brute_primitive(shifts, L))


def test_y_filter_example():
    keep = prohibited.y_filter(0, 210, D3, 3)
    assert not keep[35 - 1] and not keep[175 - 1]
    assert np.array_equal(keep, prohibited.y_filter_direct(0, 210, D3, 3))


@pytest.mark.parametrize("layers,L", [([[2, 3], [5]], 4), ([[3], [5], [7]], 4), ([[2, 3, 5], [7]], 3)])
def test_y_filter_matches_per_n_oracle(layers, L):
    shifts = arith.shift_set_from_lists(layers)
    seqs = brute_primitive(shifts, L)
    keep = prohibited.y_filter(1000, 1600, shifts, L)
    for k, n in enumerate(range(1001, 1601)):
        assert keep[k] == (not any(chain_hits(n, s) for s in seqs))


def test_y_filter_everything_without_prohibited_sequences():
    shifts = arith.shift_set_from_lists([[3], [7], [11]])
    assert prohibited.enumerate_primitive(shifts, 3) == []
    assert prohibited.y_filter(0, 500, shifts, 3).all()


def test_enumeration_guard():
    big = arith.shift_set_from_lists([[2, 3, 5, 11, 13], [7, 17, 19, 23]])
    with pytest.raises(ResourceError):
        prohibited.enumerate_primitive(big, 6)


def test_lit_condition_3():
    w = walks.build_walk((35, 14, 21, -21, -14, -35), D3)
    single, splits = walks.classify_indices(w)
    everything_lit = next(p for p in walks.lit_unlit_splits(w, single) if not p.unlit)
    # the reduced walk is empty, so nothing can be prohibited
    assert prohibited.lit_condition_3(w, everything_lit, 3)
    # every prime repeats, so the window (35, 14, 21) can be fully lit
    w2 = walks.build_walk((35, 14, 21, 35, 14, 21), D3)
    parts = list(walks.lit_unlit_splits(w2))
    assert not prohibited.lit_condition_3(w2, parts[0], 3)
    unlit_first = next(p for p in parts if p.unlit == {(1, 1)})
    assert not prohibited.lit_condition_3(w2, unlit_first, 3)  # the later copy is still lit
    assert prohibited.lit_condition_3(w2, parts[-1], 3)
