"""Signed walks over plus-minus D and their combinatorial bookkeeping.

Indices are 1-based throughout, matching the usual ``d_1, ..., d_R`` and
``b_1, ..., b_{R+1}`` notation. An index pair ``(i, j)`` names the prime of
layer ``j`` dividing ``d_i``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .arith import ShiftSet

Index = tuple[int, int]


@dataclass(frozen=True)
class SignedWalk:
    """A walk ``d`` with optional per-step factor tuples and partial sums.

    ``partials[k]`` holds ``b_{k+1}``, so ``partials[0] == 0`` and
    ``partials[R] == sum(d)``.
    """

    steps: tuple[int, ...]
    factors: tuple[tuple[int, ...], ...] | None = field(default=None, repr=False)
    partials: tuple[int, ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if not self.partials:
            object.__setattr__(self, "partials", tuple(itertools.accumulate(self.steps, initial=0)))
        if self.factors is not None:
            if len(self.factors) != len(self.steps):
                raise ValueError("one factor tuple per step is required")
            for d, f in zip(self.steps, self.factors):
                if math.prod(f) != abs(d):
                    raise ValueError(f"factor tuple {f} does not multiply to |{d}|")

    @property
    def R(self) -> int:
        return len(self.steps)

    @property
    def J(self) -> int:
        if self.factors is None:
            raise ValueError("walk carries no factorization")
        return len(self.factors[0]) if self.factors else 0

    @property
    def closed(self) -> bool:
        return self.partials[-1] == 0

    def d(self, i: int) -> int:
        return self.steps[i - 1]

    def b(self, i: int) -> int:
        return self.partials[i - 1]

    def p(self, i: int, j: int) -> int:
        if self.factors is None:
            raise ValueError("walk carries no factorization")
        return self.factors[i - 1][j - 1]

    def indices(self) -> list[Index]:
        return [(i, j) for i in range(1, self.R + 1) for j in range(1, self.J + 1)]

    def primes(self) -> set[int]:
        """Distinct primes dividing f(d) = prod |d_i|."""
        return {p for f in (self.factors or ()) for p in f}

    def f(self, index_set: Sequence[Index] | None = None) -> int:
        """Product of the distinct primes at the given indices (all if None)."""
        if index_set is None:
            return math.prod(self.primes())
        return math.prod({self.p(i, j) for i, j in index_set})

    def sub(self, positions: Sequence[int]) -> "SignedWalk":
        """Walk made of the steps at the given 1-based positions, in order."""
        steps = tuple(self.steps[k - 1] for k in positions)
        factors = None if self.factors is None else tuple(self.factors[k - 1] for k in positions)
        return SignedWalk(steps, factors)

    def negated(self) -> "SignedWalk":
        return SignedWalk(tuple(-d for d in self.steps), self.factors)

    def concat(self, other: "SignedWalk") -> "SignedWalk":
        if (self.factors is None) != (other.factors is None):
            raise ValueError("cannot concatenate factored and unfactored walks")
        factors = None if self.factors is None else self.factors + other.factors
        return SignedWalk(self.steps + other.steps, factors)


def build_walk(steps: Sequence[int], shifts: ShiftSet) -> SignedWalk:
    """Attach factor tuples from ``shifts``; every ``|d_i|`` must lie in D."""
    steps = tuple(int(d) for d in steps)
    factors = tuple(shifts.factor_tuple(d) for d in steps)
    return SignedWalk(steps, factors)


# ---------------------------------------------------------------------------
# single / lit / unlit


@dataclass(frozen=True)
class IndexPartition:
    single: frozenset[Index]
    lit: frozenset[Index]
    unlit: frozenset[Index]

    def check(self, w: SignedWalk) -> None:
        """Raise ValueError unless this is a partition with the right singles."""
        everything = set(w.indices())
        parts = (self.single, self.lit, self.unlit)
        if sum(len(p) for p in parts) != len(everything) or set().union(*parts) != everything:
            raise ValueError("single, lit and unlit must partition [R] x [J]")
        if self.single != single_indices(w):
            raise ValueError("single set does not match the walk")


def single_indices(w: SignedWalk) -> frozenset[Index]:
    """Indices whose prime occurs at no other index of the walk."""
    counts: dict[int, int] = {}
    for f in w.factors or ():
        for p in f:
            counts[p] = counts.get(p, 0) + 1
    return frozenset((i, j) for i, j in w.indices() if counts[w.p(i, j)] == 1)


def lit_unlit_splits(
    w: SignedWalk, single: frozenset[Index] | None = None, max_unlit: int | None = None
) -> Iterator[IndexPartition]:
    """Lazily enumerate every (lit, unlit) split of the repeated indices.

    Splits are produced in order of increasing ``|unlit|``; ``max_unlit``
    caps that size (inclusive).
    """
    single = single_indices(w) if single is None else frozenset(single)
    rest = [ij for ij in w.indices() if ij not in single]
    top = len(rest) if max_unlit is None else min(max_unlit, len(rest))
    for size in range(top + 1):
        for unlit in itertools.combinations(rest, size):
            u = frozenset(unlit)
            yield IndexPartition(single, frozenset(rest) - u, u)


def classify_indices(
    w: SignedWalk, max_unlit: int | None = None
) -> tuple[frozenset[Index], Iterator[IndexPartition]]:
    """Single set plus a lazy enumerator of admissible splits."""
    single = single_indices(w)
    return single, lit_unlit_splits(w, single, max_unlit)


def bad_single_indices(w: SignedWalk, s: frozenset[Index]) -> set[Index]:
    """Single indices that are bad in any of the three senses.

    1. another single index ``(i', j')`` with ``b_i = b_i'``, ``i != i'``;
    2. another single index with ``b_{i+1} = b_{i'+1}``, ``i != i'``;
    3. some ``i'`` in ``[R]`` with ``p_ij | b_i' - b_i`` and
       ``b_i'`` not in ``{b_i, b_{i+1}}``.
    """
    if frozenset(s) != single_indices(w):
        raise ValueError("s is not the single set of w")
    rows = {i for i, _ in s}
    bad: set[Index] = set()
    for i, j in s:
        if any(i2 != i and w.b(i2) == w.b(i) for i2 in rows):
            bad.add((i, j))
        elif any(i2 != i and w.b(i2 + 1) == w.b(i + 1) for i2 in rows):
            bad.add((i, j))
        else:
            p = w.p(i, j)
            for i2 in range(1, w.R + 1):
                if (w.b(i2) - w.b(i)) % p == 0 and w.b(i2) not in (w.b(i), w.b(i + 1)):
                    bad.add((i, j))
                    break
    return bad


# ---------------------------------------------------------------------------
# lit conditions


def lit_condition_1(w: SignedWalk, lit: frozenset[Index]) -> bool:
    """Equal primes at lit indices force ``p | b_i' - b_i``."""
    by_prime: dict[int, list[int]] = {}
    for i, j in lit:
        by_prime.setdefault(w.p(i, j), []).append(i)
    return all(
        (w.b(i2) - w.b(rows[0])) % p == 0 for p, rows in by_prime.items() for i2 in rows[1:]
    )


def lit_prime_counts(w: SignedWalk, lit: frozenset[Index]) -> list[int]:
    """For each k, the number of distinct lit primes ``p_ij`` with ``p | b_i - b_k``."""
    counts = []
    for k in range(1, w.R + 1):
        hits = {w.p(i, j) for i, j in lit if (w.b(i) - w.b(k)) % w.p(i, j) == 0}
        counts.append(len(hits))
    return counts


def lit_condition_2(w: SignedWalk, lit: frozenset[Index], bound: float) -> bool:
    """Every k sees at most ``bound`` distinct lit primes dividing ``b_i - b_k``."""
    return all(c <= bound for c in lit_prime_counts(w, lit))


# ---------------------------------------------------------------------------
# reduction and backtracking decomposition


def _reduce_positions(steps: Sequence[int]) -> tuple[list[int], list[tuple[int, int]]]:
    """Stack reduction; returns surviving 1-based positions and matched pairs."""
    stack: list[int] = []
    pairs: list[tuple[int, int]] = []
    for k, d in enumerate(steps, start=1):
        if stack and steps[stack[-1] - 1] == -d:
            pairs.append((stack.pop(), k))
        else:
            stack.append(k)
    return stack, pairs


def reduce_walk(w: SignedWalk) -> SignedWalk:
    """Remove backtracking pairs ``(a, -a)`` until none is left."""
    survivors, _ = _reduce_positions(w.steps)
    return w.sub(survivors)


def reduce_with_map(w: SignedWalk) -> tuple[SignedWalk, list[int]]:
    """Reduced walk and the injection iota as a list of original positions."""
    survivors, _ = _reduce_positions(w.steps)
    return w.sub(survivors), survivors


def tau(seq: Sequence, h: int) -> list:
    """Cyclic shift: the last ``h`` entries move to the front."""
    n = len(seq)
    if not 0 <= h <= n:
        raise ValueError(f"shift {h} out of range for length {n}")
    return list(seq[n - h :]) + list(seq[: n - h])


@dataclass(frozen=True)
class ExtensionStep:
    shift: int
    appended: int
    jn: frozenset[int] = frozenset()
    jl: frozenset[int] = frozenset()
    ju: frozenset[int] = frozenset()


@dataclass(frozen=True)
class Decomposition:
    """Output of :func:`decompose_backtracking`.

    ``stages[m]`` lists the original positions making up ``d^(m)``, so
    ``stages[0]`` is the reduced walk and ``tau_{h_M}`` of the last stage is
    ``1..R``.
    """

    reduced: SignedWalk
    shifts: tuple[int, ...]
    appended: tuple[int, ...]
    stages: tuple[tuple[int, ...], ...]

    @property
    def M(self) -> int:
        return len(self.appended)


def decompose_backtracking(w: SignedWalk, *, allow_open: bool = False) -> Decomposition:
    """Canonical decomposition of a closed walk into reduced part and extensions.

    Right parentheses of the matching are taken in decreasing position
    ``e_1 > ... > e_M`` with ``e_0 = R`` and ``e_{M+1} = 0``; the shifts are
    ``h_m = e_m - e_{m+1}`` and extension ``m`` appends ``(-x, x)`` with
    ``x = d_{e_{m+1}}``. The construction never uses closedness; pass
    ``allow_open=True`` to decompose an open walk.
    """
    if not (w.closed or allow_open):
        raise ValueError("decomposition needs a closed walk")
    survivors, pairs = _reduce_positions(w.steps)
    pairs.sort(key=lambda lr: -lr[1])
    e = [w.R] + [r for _, r in pairs] + [0]
    shifts = tuple(e[m] - e[m + 1] for m in range(len(e) - 1))
    current = list(survivors)
    stages = [tuple(current)]
    for m, (left, right) in enumerate(pairs):
        current = tau(current, shifts[m]) + [left, right]
        stages.append(tuple(current))
    final = tau(current, shifts[-1])
    if final != list(range(1, w.R + 1)):
        raise AssertionError("replay failed to reproduce the walk")
    appended = tuple(w.d(left) for left, _ in pairs)
    return Decomposition(w.sub(survivors), shifts, appended, tuple(stages))


def replay(reduced: Sequence[int], shifts: Sequence[int], appended: Sequence[int]) -> list[int]:
    """Rebuild a walk from its decomposition data."""
    if len(shifts) != len(appended) + 1:
        raise ValueError("need exactly one more shift than appended steps")
    cur = list(reduced)
    for h, a in zip(shifts, appended):
        cur = tau(cur, h) + [a, -a]
    return tau(cur, shifts[-1])


def induced_partition(w: SignedWalk, positions: Sequence[int], part: IndexPartition) -> tuple[SignedWalk, IndexPartition]:
    """Sub-walk at ``positions`` with inherited lit/unlit sets.

    Singles are recomputed on the sub-walk; a repeated index ``(k, j)`` is lit
    (unlit) when ``(iota(k), j)`` is lit (unlit) in the original walk.
    """
    sub = w.sub(positions)
    single = single_indices(sub)
    lit, unlit = set(), set()
    for k, orig in enumerate(positions, start=1):
        for j in range(1, w.J + 1):
            if (k, j) in single:
                continue
            if (orig, j) in part.lit:
                lit.add((k, j))
            elif (orig, j) in part.unlit:
                unlit.add((k, j))
            else:
                raise ValueError(f"index ({orig}, {j}) is single in w but repeated in the sub-walk")
    return sub, IndexPartition(single, frozenset(lit), frozenset(unlit))


def extension_types(w: SignedWalk, part: IndexPartition) -> list[ExtensionStep]:
    """Type ``(J_N, J_L, J_U)`` of every extension in the canonical decomposition."""
    dec = decompose_backtracking(w)
    out: list[ExtensionStep] = []
    for m in range(dec.M):
        sub, sub_part = induced_partition(w, dec.stages[m + 1], part)
        R = sub.R
        jn, jl, ju = set(), set(), set()
        for j in range(1, w.J + 1):
            p = sub.p(R, j)
            earlier = [i for i in range(1, R - 1) if sub.p(i, j) == p]
            if not earlier:
                jn.add(j)
            elif (R, j) in sub_part.lit and any((i, j) in sub_part.lit for i in earlier):
                jl.add(j)
            else:
                ju.add(j)
        out.append(ExtensionStep(dec.shifts[m], dec.appended[m], frozenset(jn), frozenset(jl), frozenset(ju)))
    return out


# ---------------------------------------------------------------------------
# divisibility triples


def divisibility_triples(w: SignedWalk) -> list[tuple[int, int, int]]:
    """All ``(x, y, p)`` with ``p | d_x``, ``p | d_y`` and a gap strictly between."""
    out = []
    for p in sorted(w.primes()):
        rows = [i for i in range(1, w.R + 1) if w.d(i) % p == 0]
        for x, y in itertools.combinations(rows, 2):
            if any(w.d(i) % p for i in range(x + 1, y)):
                out.append((x, y, p))
    return out


def minimal_divisibility_triples(w: SignedWalk) -> list[tuple[int, int, int]]:
    """Triples with no other triple nested in ``[x, y]`` of smaller span."""
    triples = divisibility_triples(w)
    minimal = [
        (x, y, p)
        for x, y, p in triples
        if not any(x <= x2 < y2 <= y and y2 - x2 < y - x for x2, y2, _ in triples)
    ]
    return sorted(minimal)
