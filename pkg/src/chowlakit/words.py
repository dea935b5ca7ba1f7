"""Combinatorics on words: compression, neighbours, predictability, repetitions.

Words are tuples of hashable letters (strings such as ``"XAYZ"`` work too).
Positions reported to callers are 1-based.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterator, Sequence

from .arith import ResourceError

Letter = Hashable
Word = tuple

SHAPES = ("nested-free", "stacked", "rainbow")


def as_word(w: Sequence[Letter]) -> Word:
    return tuple(w)


def in_W(w: Sequence[Letter]) -> bool:
    """No two adjacent letters are equal."""
    return all(a != b for a, b in zip(w, w[1:]))


def in_W_distinct(w: Sequence[Letter]) -> bool:
    return len(set(w)) == len(w)


def compress(v: Sequence[Letter]) -> Word:
    """Collapse runs of equal adjacent letters."""
    return tuple(a for a, _ in itertools.groupby(v))


def positions(w: Sequence[Letter], letter: Letter) -> frozenset[int]:
    return frozenset(k for k, a in enumerate(w, start=1) if a == letter)


def position_partition(w: Sequence[Letter]) -> frozenset[frozenset[int]]:
    return frozenset(positions(w, a) for a in set(w))


def _neighbour_sets(w: Sequence[Letter], letter: Letter) -> list[frozenset]:
    n = len(w)
    out = []
    for k, a in enumerate(w):
        if a == letter:
            out.append(frozenset(w[i] for i in (k - 1, k + 1) if 0 <= i < n))
    return out


def neighbour_class(w: Sequence[Letter], letter: Letter) -> str:
    """``"constant"`` or ``"variable"`` neighbours of ``letter`` in ``w``."""
    sets = _neighbour_sets(w, letter)
    if not sets:
        raise ValueError(f"letter {letter!r} does not occur")
    return "constant" if all(s == sets[0] for s in sets) else "variable"


def variable_letters(w: Sequence[Letter]) -> list[Letter]:
    """Letters with variable neighbours, in order of first occurrence."""
    seen = dict.fromkeys(w)
    return [a for a in seen if neighbour_class(w, a) == "variable"]


def is_t_predictable(w: Sequence[Letter], t: int) -> tuple[bool, tuple | None]:
    """Check both predictability clauses.

    Returns ``(True, None)`` or ``(False, witness)`` where the witness is
    ``("repeats", letter)`` or ``("variable", letters)``.
    """
    counts: dict[Letter, int] = {}
    for a in w:
        counts[a] = counts.get(a, 0) + 1
    for a, c in counts.items():
        if c > t:
            return False, ("repeats", a)
    var = variable_letters(w)
    if len(var) > t:
        return False, ("variable", tuple(var))
    return True, None


# ---------------------------------------------------------------------------
# separated repetitions


def separated_repetitions(w: Sequence[Letter]) -> tuple[int, list[tuple[int, int]]]:
    """Maximum number of separated repetitions, with a witness.

    Greedy: cut as soon as the current segment contains a repeated letter.
    The earliest possible closing position is never worse, by exchange.
    """
    pairs: list[tuple[int, int]] = []
    first: dict[Letter, int] = {}
    for l, a in enumerate(w, start=1):
        if a in first:
            pairs.append((first[a], l))
            first = {}
        else:
            first[a] = l
    return len(pairs), pairs


def is_separated_witness(w: Sequence[Letter], pairs: Sequence[tuple[int, int]]) -> bool:
    flat = [x for pair in pairs for x in pair]
    if any(b <= a for a, b in zip(flat, flat[1:])):
        return False
    return all(1 <= k and l <= len(w) and w[k - 1] == w[l - 1] for k, l in pairs)


# ---------------------------------------------------------------------------
# pair extraction


def _longest_monotone(values: Sequence[float], increasing: bool) -> list[int]:
    """Indices of a longest strictly monotone subsequence (quadratic DP)."""
    n = len(values)
    if n == 0:
        return []
    best = [1] * n
    prev = [-1] * n
    for i in range(n):
        for j in range(i):
            ok = values[j] < values[i] if increasing else values[j] > values[i]
            if ok and best[j] + 1 > best[i]:
                best[i], prev[i] = best[j] + 1, j
    i = max(range(n), key=lambda k: (best[k], -k))
    out = []
    while i >= 0:
        out.append(i)
        i = prev[i]
    return out[::-1]


def extract_pairs(pairs: Sequence[tuple[float, float]]) -> tuple[str, list[tuple[float, float]]]:
    """Large ordered sub-family of a set of disjoint pairs.

    Shapes: ``"nested-free"`` (a1<b1<a2<b2<...), ``"stacked"``
    (a's then b's, both increasing), ``"rainbow"`` (a's increasing then b's
    decreasing). The result has at least ``ceil(n ** (1/4))`` pairs.
    """
    ps = [(a, b) for a, b in pairs]
    if any(a >= b for a, b in ps):
        raise ValueError("every pair needs a < b")
    ends = [x for p in ps for x in p]
    if len(set(ends)) != len(ends):
        raise ValueError("pairs share an endpoint")
    if not ps:
        return SHAPES[0], []
    # longest chain for "b < c": earliest-ending interval scheduling
    chain: list[tuple[float, float]] = []
    for a, b in sorted(ps, key=lambda p: p[1]):
        if not chain or chain[-1][1] < a:
            chain.append((a, b))
    best_shape, best = SHAPES[0], chain
    # pairwise-overlapping families all share a point; scan left endpoints
    for x in sorted(a for a, _ in ps):
        clique = sorted(p for p in ps if p[0] <= x <= p[1])
        bs = [b for _, b in clique]
        for shape, inc in ((SHAPES[1], True), (SHAPES[2], False)):
            sel = [clique[i] for i in _longest_monotone(bs, inc)]
            if len(sel) > len(best):
                best_shape, best = shape, sel
    return best_shape, sorted(best)


def check_pair_shape(shape: str, sel: Sequence[tuple[float, float]]) -> bool:
    sel = sorted(sel)
    a = [p[0] for p in sel]
    b = [p[1] for p in sel]
    if shape == SHAPES[0]:
        flat = [x for p in sel for x in p]
        return all(u < v for u, v in zip(flat, flat[1:]))
    if not sel:
        return True
    inc_a = all(u < v for u, v in zip(a, a[1:]))
    if shape == SHAPES[1]:
        return inc_a and a[-1] < b[0] and all(u < v for u, v in zip(b, b[1:]))
    if shape == SHAPES[2]:
        return inc_a and a[-1] < b[-1] and all(u > v for u, v in zip(b, b[1:]))
    raise ValueError(f"unknown shape {shape!r}")


# ---------------------------------------------------------------------------
# predictable words


def anchor_letters(w: Sequence[Letter]) -> set[Letter]:
    """First two letters, variable letters and their neighbours."""
    var = set(variable_letters(w))
    out = set(w[:2]) | var
    for k, a in enumerate(w):
        if a in var:
            out.update(w[i] for i in (k - 1, k + 1) if 0 <= i < len(w))
    return out


def reconstruct_positions(
    n: int, anchor_sets: Sequence[Sequence[int]]
) -> frozenset[frozenset[int]] | None:
    """Rebuild the full position partition from the anchor letters' positions.

    A position ``k`` not covered by an anchor gets the class
    ``{l : {l-1, l+1} meets Pos(k-1), l not in Pos(k-2)}``. Returns None when
    the anchors are inconsistent with any word.
    """
    if n < 1:
        return frozenset()
    owner: dict[int, int] = {}
    classes: list[frozenset[int]] = []
    for s in anchor_sets:
        s = frozenset(s)
        if not s or any(k < 1 or k > n or k in owner for k in s):
            return None
        for k in s:
            owner[k] = len(classes)
        classes.append(s)
    for k in range(1, n + 1):
        if k in owner:
            continue
        if k < 3:
            return None
        prev1 = classes[owner[k - 1]]
        prev2 = classes[owner[k - 2]]
        new = frozenset(
            l for l in range(1, n + 1) if ({l - 1, l + 1} & prev1) and l not in prev2
        )
        if k not in new or any(l in owner for l in new):
            return None
        for l in new:
            owner[l] = len(classes)
        classes.append(new)
    result = frozenset(classes)
    # the partition must come from a word in W: no class has adjacent positions
    if any(k + 1 in c for c in classes for k in c):
        return None
    return result


def canonical_words(n: int, alphabet: int) -> Iterator[Word]:
    """Restricted-growth words of length n in W over at most ``alphabet`` letters."""

    def grow(prefix: list[int], used: int) -> Iterator[Word]:
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for a in range(min(used + 1, alphabet)):
            if prefix and prefix[-1] == a:
                continue
            prefix.append(a)
            yield from grow(prefix, max(used, a + 1))
            prefix.pop()

    if n == 0:
        yield ()
        return
    yield from grow([], 0)


MAX_PARTITION_LENGTH = 12


def enumerate_predictable_partitions(n: int, t: int) -> set[frozenset[frozenset[int]]]:
    """Position partitions of t-predictable words in W_n."""
    if n > MAX_PARTITION_LENGTH:
        raise ResourceError(f"n={n} exceeds the exhaustive guard {MAX_PARTITION_LENGTH}")
    return {
        position_partition(w) for w in canonical_words(n, n) if is_t_predictable(w, t)[0]
    }


# ---------------------------------------------------------------------------
# structure of unpredictable words


@dataclass(frozen=True)
class RepetitionStructure:
    m: int
    pairs: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class InterleavedStructure:
    """``v1 = Z0..X1..Z1..Xm..Zm`` and ``v2 = Z0..Z1..Zm`` with X_j outside v2 up to Z_j."""

    m: int
    v1: Word
    v2: Word
    xs: tuple
    zs: tuple
    v1_reversed: bool
    v2_reversed: bool
    route: str = field(default="proof")


def _substring_at(w: Word, v: Word) -> int | None:
    n, k = len(w), len(v)
    for s in range(n - k + 1):
        if w[s : s + k] == v:
            return s
    return None


def _pair_sets(x1: Word, x2: Word) -> tuple[Word, Word]:
    """Prefixes of x1, x2 (same first letter) ending at a common letter with different letter sets."""
    if set(x1) != set(x2):
        return x1, x2
    k = next((i for i in range(1, len(x1)) if x1[i] != x2[i]), None)
    if k is None:
        raise ValueError("words coincide; the middle letter cannot have variable neighbours")
    y = x2[k]
    l = x1.index(y)
    return x1[: l + 1], x2[: k + 1]


def _segment(word: Word, a: Letter, b: Letter) -> Word:
    i, j = word.index(a), word.index(b)
    return word[i : j + 1]


def _interleave_from_segments(w1: Word, w2: Word, ys: Sequence[Letter]) -> tuple[list, list, Word, Word]:
    """Pick X's in segments of w1 missing from w2 up to the segment end."""
    xs, zs = [], [ys[0]]
    for s in range(1, len(ys)):
        seg = _segment(w1, ys[s - 1], ys[s])
        prefix2 = set(_segment(w2, ys[0], ys[s]))
        x = next((c for c in seg if c not in prefix2), None)
        if x is not None:
            xs.append(x)
            zs.append(ys[s])
    v1 = _segment(w1, zs[0], zs[-1])
    v2 = _segment(w2, zs[0], zs[-1])
    return xs, zs, v1, v2


def _proof_route(w: Word) -> InterleavedStructure | None:
    """Variable-letter pairs, pair extraction, distinct windows, segment refinement."""
    n = len(w)
    ends = {w[0], w[-1]}
    pairs = {}
    for a in variable_letters(w):
        if a in ends:
            continue
        occ = [k for k in range(1, n + 1) if w[k - 1] == a]
        nb = {k: frozenset(w[i - 1] for i in (k - 1, k + 1) if 1 <= i <= n) for k in occ}
        pair = next((k, l) for k, l in itertools.combinations(occ, 2) if nb[k] != nb[l])
        pairs[pair] = a
    if not pairs:
        return None
    shape, sel = extract_pairs(list(pairs))
    if shape == SHAPES[0] or len(sel) < 2:
        return None
    ks = [k for k, _ in sel]
    ls = [l for _, l in sel]

    def windows(i: int, j: int) -> tuple[Word, Word]:
        x1 = w[ks[i] - 1 : ks[j]]
        if shape == SHAPES[1]:
            x2 = w[ls[i] - 1 : ls[j]]
        else:
            x2 = w[ls[j] - 1 : ls[i]][::-1]
        return x1, x2

    best = None
    for i in range(len(sel)):
        for j in range(i + 2, len(sel)):
            x1, x2 = windows(i, j)
            if in_W_distinct(x1) and in_W_distinct(x2) and (best is None or j - i > best[1] - best[0]):
                best = (i, j)
    if best is None:
        return None
    i, j = best
    w1, w2 = windows(i, j)
    anchors = [w[k - 1] for k in ks[i : j + 1]]
    # iterate the two-word refinement on consecutive anchor pairs
    ys = [anchors[0]]
    for s in range(2, len(anchors), 2):
        x1 = _segment(w1, ys[-1], anchors[s])
        x2 = _segment(w2, ys[-1], anchors[s])
        v1, _ = _pair_sets(x1, x2)
        ys.append(v1[-1])
    if len(ys) < 2:
        return None
    w1 = _segment(w1, ys[0], ys[-1])
    w2 = _segment(w2, ys[0], ys[-1])
    v2_rev_base = shape == SHAPES[2]
    best_struct = None
    for swap, rev in ((False, False), (True, False), (False, True), (True, True)):
        a, b = (w2, w1) if swap else (w1, w2)
        yy = list(ys)
        if rev:
            a, b, yy = a[::-1], b[::-1], yy[::-1]
        xs, zs, v1, v2 = _interleave_from_segments(a, b, yy)
        if best_struct is None or len(xs) > best_struct.m:
            # orientation relative to w: w1 is forward, w2 is reversed for rainbow pairs
            r1 = (v2_rev_base if swap else False) != rev
            r2 = (False if swap else v2_rev_base) != rev
            best_struct = InterleavedStructure(len(xs), v1, v2, tuple(xs), tuple(zs), r1, r2)
    return best_struct


def _best_chain(m1: Word, m2: Word, target: int) -> tuple[list, list] | None:
    """Longest Z/X chain with Z0 = m1[0] = m2[0] inside two distinct-letter words."""
    pos2 = {c: i for i, c in enumerate(m2)}
    best = {0: (0, None, None)}  # index in m1 -> (m, prev index, x index)
    for p in range(1, len(m1)):
        z = m1[p]
        if z not in pos2:
            continue
        prefix2 = set(m2[: pos2[z] + 1])
        for q in sorted(best):
            if q >= p or pos2[m1[q]] >= pos2[z]:
                continue
            x = next((r for r in range(q + 1, p) if m1[r] not in prefix2), None)
            if x is None:
                continue
            cand = best[q][0] + 1
            if p not in best or cand > best[p][0]:
                best[p] = (cand, q, x)
    end = max(best, key=lambda k: (best[k][0], -k))
    if best[end][0] < target:
        return None
    zs_idx, xs_idx = [end], []
    while best[zs_idx[-1]][1] is not None:
        _, q, x = best[zs_idx[-1]]
        xs_idx.append(x)
        zs_idx.append(q)
    zs_idx.reverse()
    xs_idx.reverse()
    return zs_idx, xs_idx


def _search_route(w: Word, target: int) -> InterleavedStructure | None:
    """Exhaustive search over distinct-letter windows of w and its reversal."""
    n = len(w)
    sources = {False: w, True: w[::-1]}
    maximal: dict[tuple[bool, int], Word] = {}
    for rev, s in sources.items():
        for a in range(n):
            seen = set()
            b = a
            while b < n and s[b] not in seen:
                seen.add(s[b])
                b += 1
            maximal[rev, a] = s[a:b]
    best: InterleavedStructure | None = None
    for (r1, a), m1 in maximal.items():
        for (r2, c), m2 in maximal.items():
            if m2[0] != m1[0] or (r1, a) == (r2, c):
                continue
            found = _best_chain(m1, m2, max(target, 1 if best is None else best.m + 1))
            if found is None:
                continue
            zi, xi = found
            zs = tuple(m1[i] for i in zi)
            xs = tuple(m1[i] for i in xi)
            v1 = m1[: zi[-1] + 1]
            v2 = m2[: m2.index(zs[-1]) + 1]
            best = InterleavedStructure(len(xs), v1, v2, xs, zs, r1, r2, route="search")
    return best


def unpredictable_structure(
    w: Sequence[Letter], t: int, c1: float = 1 / 8
) -> RepetitionStructure | InterleavedStructure:
    """Extract separated repetitions or an interleaved Z/X pattern.

    The separated-repetition count is tried first, then the variable-letter
    route of the structure argument. When neither reaches ``ceil(t**c1)`` an
    exhaustive search over distinct-letter windows is run; if that also
    falls short, the better of the partial answers is returned and the
    verifier will reject it.

    Raises:
        ValueError: if ``w`` is t-predictable or not in W.
    """
    w = as_word(w)
    if not in_W(w):
        raise ValueError("word has equal adjacent letters")
    if is_t_predictable(w, t)[0]:
        raise ValueError("word is t-predictable")
    target = math.ceil(t**c1)
    count, pairs = separated_repetitions(w)
    reps = RepetitionStructure(count, tuple(pairs))
    if count >= target:
        return reps
    found = _proof_route(w)
    if found is not None and found.m >= target:
        return found
    searched = _search_route(w, target)
    if searched is not None:
        return searched
    candidates = [s for s in (found,) if s is not None] + [reps]
    return max(candidates, key=lambda s: s.m)


def verify_structure(
    w: Sequence[Letter], t: int, s: RepetitionStructure | InterleavedStructure, c1: float = 1 / 8
) -> tuple[bool, str]:
    """Independent check of every clause of an extracted structure."""
    w = as_word(w)
    target = math.ceil(t**c1)
    if s.m < target:
        return False, f"m={s.m} below target {target}"
    if isinstance(s, RepetitionStructure):
        if len(s.pairs) != s.m or not is_separated_witness(w, s.pairs):
            return False, "repetition witness invalid"
        return True, "repetitions"
    v1, v2 = tuple(s.v1), tuple(s.v2)
    for name, v in (("v1", v1), ("v2", v2)):
        if not v or not in_W_distinct(v):
            return False, f"{name} has repeated letters"
        if _substring_at(w, v) is None and _substring_at(w, v[::-1]) is None:
            return False, f"{name} is not a substring of w or its reversal"
    if len(s.xs) != s.m or len(s.zs) != s.m + 1:
        return False, "wrong number of X or Z letters"
    order1 = [s.zs[0]]
    for x, z in zip(s.xs, s.zs[1:]):
        order1 += [x, z]
    if any(c not in v1 for c in order1):
        return False, "v1 misses a Z or X letter"
    idx1 = [v1.index(c) for c in order1]
    if idx1[0] != 0 or idx1[-1] != len(v1) - 1 or any(a >= b for a, b in zip(idx1, idx1[1:])):
        return False, "v1 is not of the form Z0..X1..Z1..Xm..Zm"
    if any(z not in v2 for z in s.zs):
        return False, "v2 misses a Z letter"
    idx2 = [v2.index(z) for z in s.zs]
    if idx2[0] != 0 or idx2[-1] != len(v2) - 1 or any(a >= b for a, b in zip(idx2, idx2[1:])):
        return False, "v2 is not of the form Z0..Z1..Zm"
    for j, x in enumerate(s.xs, start=1):
        if x in v2[: idx2[j] + 1]:
            return False, f"X{j} appears in v2 before Z{j}"
    return True, "interleaved"
