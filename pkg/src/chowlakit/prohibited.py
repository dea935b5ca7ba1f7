"""Prohibited sequences, primitivity, prohibited progressions and the set Y."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .arith import ResourceError, ShiftSet, crt, prime_divisors
from .walks import IndexPartition, SignedWalk, induced_partition, reduce_with_map

MAX_ENUMERATION = 10_000_000


@lru_cache(maxsize=None)
def _primes_of(d: int) -> tuple[int, ...]:
    return prime_divisors(abs(d))


@dataclass(frozen=True)
class ProhibitedCertificate:
    p: int | None
    ell0: int | None
    non_backtracking: bool
    consecutive: bool
    pattern: bool

    @property
    def valid(self) -> bool:
        return self.non_backtracking and self.consecutive and self.pattern


def _non_backtracking(seq: Sequence[int]) -> bool:
    return all(b != -a for a, b in zip(seq, seq[1:]))


def _consecutive(seq: Sequence[int]) -> bool:
    """Every prime divides a contiguous block of entries."""
    for q in {q for d in seq for q in _primes_of(d)}:
        hits = [i for i, d in enumerate(seq) if d % q == 0]
        if hits[-1] - hits[0] + 1 != len(hits):
            return False
    return True


def _pattern(seq: Sequence[int]) -> tuple[int, int] | None:
    """Smallest ``(p, ell0)`` with p | d_1, p !| d_ell, p | d_ell0 + ... + d_ell."""
    ell = len(seq)
    for p in _primes_of(seq[0]):
        if seq[-1] % p == 0:
            continue
        tail = 0
        hits = []
        for ell0 in range(ell, 1, -1):
            tail += seq[ell0 - 1]
            if ell0 < ell and tail % p == 0:
                hits.append(ell0)
        if hits:
            return p, min(hits)
    return None


def certify(seq: Sequence[int]) -> ProhibitedCertificate:
    """Evaluate all three clauses without any length check."""
    hit = _pattern(seq)
    return ProhibitedCertificate(
        p=hit[0] if hit else None,
        ell0=hit[1] if hit else None,
        non_backtracking=_non_backtracking(seq),
        consecutive=_consecutive(seq),
        pattern=hit is not None,
    )


def is_prohibited(seq: Sequence[int], L: int) -> bool:
    """Non-raising test; sequences of length outside ``(2, L]`` are not prohibited."""
    return 2 < len(seq) <= L and certify(seq).valid


def check_prohibited(seq: Sequence[int], L: int) -> tuple[bool, ProhibitedCertificate]:
    """Decide whether ``seq`` is prohibited and explain the verdict.

    Raises:
        ValueError: if the length is not in ``(2, L]``.
    """
    seq = tuple(int(d) for d in seq)
    if not 2 < len(seq) <= L:
        raise ValueError(f"length {len(seq)} outside (2, {L}]")
    cert = certify(seq)
    return cert.valid, cert


def check_primitive(seq: Sequence[int], L: int | None = None) -> bool:
    """True iff no shorter consecutive block of ``seq`` or its reversal is prohibited."""
    seq = tuple(int(d) for d in seq)
    L = len(seq) if L is None else L
    ok, _ = check_prohibited(seq, L)
    if not ok:
        raise ValueError("sequence is not prohibited")
    ell = len(seq)
    for s in (seq, seq[::-1]):
        for length in range(3, ell):
            for start in range(ell - length + 1):
                if is_prohibited(s[start : start + length], L):
                    return False
    return True


@dataclass(frozen=True)
class ProhibitedProgression:
    residue: int | None
    modulus: int
    source: tuple[int, ...]

    @property
    def empty(self) -> bool:
        return self.residue is None

    def __contains__(self, n: int) -> bool:
        return self.residue is not None and n % self.modulus == self.residue


def to_progression(seq: Sequence[int]) -> ProhibitedProgression:
    """Solve d_1 | n, d_2 | n + d_1, ... by CRT; incompatible chains give an empty result."""
    seq = tuple(int(d) for d in seq)
    if len(seq) <= 2:
        raise ValueError("prohibited sequences have length > 2")
    modulus = math.lcm(*(abs(d) for d in seq))
    partial = 0
    congruences = []
    for d in seq:
        congruences.append((-partial, abs(d)))
        partial += d
    sol = crt(congruences)
    return ProhibitedProgression(None if sol is None else sol[0], modulus, seq)


def _candidates(shifts: ShiftSet, L: int) -> Iterator[tuple[int, ...]]:
    """Non-backtracking consecutive sequences over plus-minus D, length 3..L."""
    alphabet = shifts.signed
    total = sum(len(alphabet) ** ell for ell in range(3, L + 1))
    if total > MAX_ENUMERATION:
        raise ResourceError(f"{total} candidate sequences exceed the guard {MAX_ENUMERATION}")

    def grow(prefix: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        if len(prefix) >= 3:
            yield prefix
        if len(prefix) == L:
            return
        for d in alphabet:
            if prefix and d == -prefix[-1]:
                continue
            nxt = prefix + (d,)
            if _consecutive(nxt):
                yield from grow(nxt)

    yield from grow(())


def enumerate_primitive(shifts: ShiftSet, L: int) -> list[tuple[int, ...]]:
    """All primitive prohibited sequences over plus-minus D of length at most L."""
    return [s for s in _candidates(shifts, L) if is_prohibited(s, L) and check_primitive(s, L)]


def prohibited_progressions(shifts: ShiftSet, L: int) -> list[ProhibitedProgression]:
    """Non-empty progressions of all primitive prohibited sequences."""
    progs = (to_progression(s) for s in enumerate_primitive(shifts, L))
    return [p for p in progs if not p.empty]


def y_filter(lo: int, hi: int, shifts: ShiftSet, L: int) -> np.ndarray:
    """Boolean membership of Y for n in ``(lo, hi]`` (True means n is in Y)."""
    n = np.arange(lo + 1, hi + 1, dtype=np.int64)
    keep = np.ones(len(n), dtype=bool)
    for prog in prohibited_progressions(shifts, L):
        keep &= n % prog.modulus != prog.residue
    return keep


def y_filter_direct(lo: int, hi: int, shifts: ShiftSet, L: int) -> np.ndarray:
    """Reference Y membership testing every chained divisibility for each n."""
    n = np.arange(lo + 1, hi + 1, dtype=np.int64)
    keep = np.ones(len(n), dtype=bool)
    for seq in enumerate_primitive(shifts, L):
        hit = np.ones(len(n), dtype=bool)
        partial = 0
        for d in seq:
            hit &= (n + partial) % d == 0
            partial += d
        keep &= ~hit
    return keep


def lit_condition_3(w: SignedWalk, part: IndexPartition, L: int) -> bool:
    """No fully lit short window of the reduced walk, nor its reversal, is prohibited."""
    reduced, iota = reduce_with_map(w)
    _, red_part = induced_partition(w, iota, part)
    J = w.J
    R = reduced.R
    for k1 in range(1, R + 1):
        for k2 in range(k1 + 1, min(R, k1 + L - 1) + 1):
            if not all((k, j) in red_part.lit for k in range(k1, k2 + 1) for j in range(1, J + 1)):
                break
            window = reduced.steps[k1 - 1 : k2]
            if is_prohibited(window, L) or is_prohibited(window[::-1], L):
                return False
    return True
