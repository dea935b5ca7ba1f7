from __future__ import annotations

import itertools
import math
import random
from functools import lru_cache

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chowlakit import words
from chowlakit.arith import ResourceError


def w_words(draw_len=st.integers(0, 14), letters=6):
    """Hypothesis strategy for words with no equal adjacent letters."""

    @st.composite
    def build(draw):
        n = draw(draw_len)
        out = []
        for _ in range(n):
            out.append(draw(st.integers(0, letters - 1).filter(lambda a: not out or a != out[-1])))
        return tuple(out)

    return build()


def brute_separated(w):
    @lru_cache(maxsize=None)
    def best(start):
        top = 0
        for k in range(start, len(w)):
            for l in range(k + 1, len(w)):
                if w[k] == w[l]:
                    top = max(top, 1 + best(l + 1))
        return top

    return best(0)


def brute_predictable(w, t):
    n = len(w)
    if any(w.count(a) > t for a in set(w)):
        return False
    variable = 0
    for a in set(w):
        neigh = {frozenset(w[i] for i in (k - 1, k + 1) if 0 <= i < n) for k in range(n) if w[k] == a}
        variable += len(neigh) > 1
    return variable <= t


@pytest.mark.parametrize("v,expected", [("XXYYX", "XYX"), ((7, 7, 7), (7,)), ((), ())])
def test_compress(v, expected):
    assert words.compress(v) == tuple(expected)


@pytest.mark.parametrize(
    "w,expected",
    [("XAYZYAXAY", "constant"), ("YAXYZAXA", "variable"), ("XAYZYAYZXAY", "variable")],
)
def test_neighbour_table(w, expected):
    assert words.neighbour_class(w, "A") == expected


def test_neighbour_of_missing_letter():
    with pytest.raises(ValueError):
        words.neighbour_class("XY", "A")


def test_predictable_examples():
    assert words.is_t_predictable("ABCDEF", 1) == (True, None)
    ok, witness = words.is_t_predictable("ABACA", 2)
    assert not ok and witness == ("repeats", "A")


@given(w_words(st.integers(0, 40), letters=8), st.integers(1, 5))
def test_predictable_matches_definition(w, t):
    assert words.is_t_predictable(w, t)[0] == brute_predictable(w, t)


@pytest.mark.parametrize("w,count", [("ABAB", 1), ("ABACBC", 2), ("ABCDE", 0)])
def test_separated_repetitions_examples(w, count):
    got, pairs = words.separated_repetitions(w)
    assert got == count and words.is_separated_witness(w, pairs)
    if w == "ABACBC":
        assert pairs == [(1, 3), (4, 6)]


@given(w_words(st.integers(0, 12), letters=4))
def test_separated_repetitions_is_maximum(w):
    count, pairs = words.separated_repetitions(w)
    assert count == brute_separated(w)
    assert words.is_separated_witness(w, pairs) and len(pairs) == count


def test_extract_pairs_examples():
    assert words.extract_pairs([(1, 2)]) == ("nested-free", [(1, 2)])
    assert words.extract_pairs([(1, 2), (3, 4), (5, 6)]) == ("nested-free", [(1, 2), (3, 4), (5, 6)])
    with pytest.raises(ValueError):
        words.extract_pairs([(2, 1)])
    with pytest.raises(ValueError):
        words.extract_pairs([(1, 3), (3, 4)])


@pytest.mark.parametrize("seed", range(100))
def test_extract_pairs_random(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 64)
    ends = rng.sample(range(1000), 2 * n)
    pairs = [tuple(sorted(ends[2 * k : 2 * k + 2])) for k in range(n)]
    shape, sel = words.extract_pairs(pairs)
    assert set(sel) <= set(pairs)
    assert words.check_pair_shape(shape, sel)
    assert len(sel) >= math.ceil(n**0.25)


def test_reconstruct_forced_small():
    assert words.reconstruct_positions(2, [[1], [2]]) == frozenset({frozenset({1}), frozenset({2})})
    assert words.reconstruct_positions(3, [[1], [1]]) is None


@pytest.mark.parametrize("seed", range(20))
def test_reconstruct_random_predictable(seed):
    rng = random.Random(seed)
    while True:
        # a 3-predictable word: repeat a short cycle with few variable letters
        base = rng.sample(range(30), rng.randint(3, 6))
        w = tuple(base * 3)[: rng.randint(10, 60)] if rng.random() < 0.5 else tuple(rng.sample(range(60), 60))
        if words.in_W(w) and words.is_t_predictable(w, 3)[0]:
            break
    anchors = [sorted(words.positions(w, a)) for a in words.anchor_letters(w)]
    assert words.reconstruct_positions(len(w), anchors) == words.position_partition(w)


@given(w_words(st.integers(1, 10), letters=5))
def test_reconstruct_predictable_words(w):
    if words.is_t_predictable(w, len(w))[0]:
        anchors = [sorted(words.positions(w, a)) for a in words.anchor_letters(w)]
        assert words.reconstruct_positions(len(w), anchors) == words.position_partition(w)


@pytest.mark.parametrize("n,t,count", [(2, 1, 1), (3, 1, 1)])
def test_partition_counts(n, t, count):
    assert len(words.enumerate_predictable_partitions(n, t)) == count


def test_partitions_n4_t2_brute_force():
    brute = {
        words.position_partition(w)
        for w in itertools.product(range(4), repeat=4)
        if words.in_W(w) and brute_predictable(w, 2)
    }
    assert words.enumerate_predictable_partitions(4, 2) == brute


def test_partition_guard():
    with pytest.raises(ResourceError):
        words.enumerate_predictable_partitions(13, 2)


def test_canonical_words_count():
    # words in W of length 4 over 3 letters, up to renaming: 3 * 2^3 / 3! * ... checked by brute force
    brute = {
        words.position_partition(w) for w in itertools.product(range(3), repeat=4) if words.in_W(w)
    }
    canon = list(words.canonical_words(4, 3))
    assert len(canon) == len(brute) == len({words.position_partition(w) for w in canon})


def test_structure_from_repeated_letter():
    w = "ABACADAEA"
    s = words.unpredictable_structure(w, 4)
    assert isinstance(s, words.RepetitionStructure)
    assert words.verify_structure(w, 4, s) == (True, "repetitions")


def test_structure_interleaved_branch():
    w = (3, 4, 2, 0, 3, 2, 1, 4, 0)
    s = words.unpredictable_structure(w, 2)
    assert isinstance(s, words.InterleavedStructure) and s.m == 2
    assert words.verify_structure(w, 2, s) == (True, "interleaved")


def test_structure_rejects_predictable_word():
    with pytest.raises(ValueError):
        words.unpredictable_structure("ABC", 2)


def test_verifier_rejects_tampered_structure():
    w = (3, 4, 2, 0, 3, 2, 1, 4, 0)
    s = words.unpredictable_structure(w, 2)
    bad = words.InterleavedStructure(s.m, s.v1, s.v2, s.xs[::-1], s.zs, s.v1_reversed, s.v2_reversed)
    assert not words.verify_structure(w, 2, bad)[0]
    assert not words.verify_structure(w, 2, words.RepetitionStructure(2, ((1, 5), (2, 8))))[0]


def brute_interleaved_exists(w, m):
    """Search every distinct-letter factor pair for a Z/X pattern of size m."""
    factors = set()
    for src in (tuple(w), tuple(w)[::-1]):
        for a in range(len(src)):
            for b in range(a + 1, len(src) + 1):
                v = src[a:b]
                if len(set(v)) < len(v):
                    break
                factors.add(v)
    for v1 in factors:
        for inner in itertools.combinations(range(1, len(v1) - 1), 2 * m - 1):
            idx = (0, *inner, len(v1) - 1)
            zs, xs = [v1[i] for i in idx[::2]], [v1[i] for i in idx[1::2]]
            for v2 in factors:
                if v2[0] != zs[0] or v2[-1] != zs[-1] or any(z not in v2 for z in zs):
                    continue
                pos = [v2.index(z) for z in zs]
                if any(a >= b for a, b in zip(pos, pos[1:])):
                    continue
                if all(x not in v2[: pos[j] + 1] for j, x in enumerate(xs, start=1)):
                    return True
    return False


def test_small_t_counterexample_has_no_structure():
    # 3 occurs three times, yet no two separated repetitions or Z/X pattern exist
    w = (4, 5, 0, 1, 3, 7, 3, 2, 3, 7)
    s = words.unpredictable_structure(w, 2)
    assert words.verify_structure(w, 2, s) == (False, "m=1 below target 2")
    assert brute_separated(w) == 1 and not brute_interleaved_exists(w, 2)


@pytest.mark.parametrize("seed", range(10))
def test_random_unpredictable_words_verify(seed):
    rng = random.Random(seed)
    done = 0
    while done < 50:
        n, k, t = rng.randint(10, 200), rng.randint(3, 8), rng.randint(1, 5)
        w = [rng.randrange(k)]
        while len(w) < n:
            a = rng.randrange(k)
            if a != w[-1]:
                w.append(a)
        if words.is_t_predictable(w, t)[0]:
            continue
        ok, _ = words.verify_structure(w, t, words.unpredictable_structure(w, t))
        if not ok:
            # only allowed when no structure of the required size exists at all
            target = math.ceil(t ** (1 / 8))
            assert brute_separated(w) < target and not brute_interleaved_exists(w, target)
        done += 1
