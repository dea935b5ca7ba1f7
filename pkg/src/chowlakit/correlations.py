"""Correlation sums S1, S2, the S(I) expansion, and the log-weighted Chowla sum.

Ranges are half-open on the left: ``(lo, hi]`` means ``lo < n <= hi``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .arith import LiouvilleTable, PrimeLayers, ShiftSet

Number = Union[int, Fraction, float]


@dataclass(frozen=True)
class CorrelationReport:
    lo: int
    hi: int
    value: Number
    term_count: int


def _check_range(lo: int, hi: int, shifts: ShiftSet, table: LiouvilleTable) -> None:
    if len(shifts) == 0:
        raise ValueError("shift set is empty")
    if lo < 0:
        raise ValueError("range must start at a non-negative integer")
    if hi > lo:
        table.require(lo + 1, hi + max(shifts.elements))


def _products(lo: int, hi: int, d: int, table: LiouvilleTable) -> tuple[np.ndarray, np.ndarray]:
    """n in (lo, hi] and lambda(n)lambda(n+d) as int64 arrays."""
    n = np.arange(lo + 1, hi + 1, dtype=np.int64)
    lam = table.window(lo + 1, hi + d).astype(np.int64)
    return n, lam[: hi - lo] * lam[d:]


def s1_sum(lo: int, hi: int, shifts: ShiftSet, table: LiouvilleTable) -> CorrelationReport:
    """S1 = sum over n in (lo, hi] and d in D with d | n of lambda(n)lambda(n+d)."""
    _check_range(lo, hi, shifts, table)
    total = 0
    count = 0
    if hi > lo:
        for d in shifts.elements:
            n, prod = _products(lo, hi, d, table)
            mask = n % d == 0
            total += int(prod[mask].sum())
            count += int(mask.sum())
    return CorrelationReport(lo, hi, total, count)


def _pattern_sums(n: np.ndarray, prod: np.ndarray, primes: tuple[int, ...]) -> dict[tuple[bool, ...], int]:
    """Sum of ``prod`` grouped by which of ``primes`` divide ``n``."""
    code = np.zeros(len(n), dtype=np.int64)
    for k, p in enumerate(primes):
        code |= (n % p == 0).astype(np.int64) << k
    out: dict[tuple[bool, ...], int] = {}
    for c in np.unique(code):
        pattern = tuple(bool(int(c) >> k & 1) for k in range(len(primes)))
        out[pattern] = int(prod[code == c].sum())
    return out


def s2_sum(
    lo: int,
    hi: int,
    shifts: ShiftSet,
    table: LiouvilleTable,
    *,
    exact: bool = True,
) -> CorrelationReport:
    """S2 with the balanced weight prod_{p | d} (1_{p|n} - 1/p).

    Computed by grouping n according to its divisibility pattern by the primes
    of d; ``exact=False`` switches the weights to floats.
    """
    _check_range(lo, hi, shifts, table)
    one = Fraction(1) if exact else 1.0
    total: Number = Fraction(0) if exact else 0.0
    count = 0
    if hi > lo:
        for d in shifts.elements:
            primes = shifts.factor_tuple(d)
            n, prod = _products(lo, hi, d, table)
            count += len(n)
            for pattern, s in _pattern_sums(n, prod, primes).items():
                w = one
                for hit, p in zip(pattern, primes):
                    w *= (1 if hit else 0) - one / p
                total += w * s
    return CorrelationReport(lo, hi, total, count)


def expansion_terms(
    lo: int,
    hi: int,
    shifts: ShiftSet,
    table: LiouvilleTable,
) -> dict[tuple[int, ...], Fraction]:
    """S(I) for every non-empty I of 1-based layer indices.

    S(I) = sum_n sum_d prod_{i in I} (-1/p_i) * 1[prod_{i not in I} p_i | n]
    * lambda(n)lambda(n+d), so that S2 - S1 is the sum of all S(I).
    """
    _check_range(lo, hi, shifts, table)
    J = shifts.J
    subsets = [I for r in range(1, J + 1) for I in itertools.combinations(range(1, J + 1), r)]
    terms = {I: Fraction(0) for I in subsets}
    if hi <= lo:
        return terms
    for d in shifts.elements:
        primes = shifts.factor_tuple(d)
        n, prod = _products(lo, hi, d, table)
        for I in subsets:
            modulus = math.prod(primes[i - 1] for i in range(1, J + 1) if i not in I)
            s = int(prod[n % modulus == 0].sum())
            if s:
                coeff = Fraction((-1) ** len(I), math.prod(primes[i - 1] for i in I))
                terms[I] += coeff * s
    return terms


def s2_sum_and_expansion(
    lo: int,
    hi: int,
    shifts: ShiftSet,
    layers: PrimeLayers | None,
    table: LiouvilleTable,
) -> tuple[CorrelationReport, dict[tuple[int, ...], Fraction]]:
    """S2 computed directly, together with the family S(I).

    ``layers`` is accepted for symmetry with the other entry points; the
    factor tuples stored in ``shifts`` already carry the layer structure.
    """
    if layers is not None and layers.J != shifts.J:
        raise ValueError("layers and shift set disagree on J")
    return s2_sum(lo, hi, shifts, table), expansion_terms(lo, hi, shifts, table)


def quadratic_form_boundary(lo: int, hi: int, shifts: ShiftSet, table: LiouvilleTable) -> Fraction:
    """Balanced-weight terms of S2 whose partner n + d leaves (lo, hi].

    With this correction, <lambda, A lambda> = 2 * (S2 - boundary) exactly,
    where A is the G0 adjacency matrix on (lo, hi].
    """
    _check_range(lo, hi, shifts, table)
    total = Fraction(0)
    for d in shifts.elements:
        primes = shifts.factor_tuple(d)
        for n in range(max(lo + 1, hi - d + 1), hi + 1):
            w = Fraction(1)
            for p in primes:
                w *= (1 if n % p == 0 else 0) - Fraction(1, p)
            total += w * table[n] * table[n + d]
    return total


def log_chowla_sum(x: int, table: LiouvilleTable) -> float:
    """sum_{n <= x} lambda(n)lambda(n+1)/n with compensated summation."""
    if x < 1:
        raise ValueError("x must be positive")
    if not table.covers(1, x + 1):
        raise ValueError(f"table must cover [1, {x + 1}]")
    lam = table.window(1, x + 1).astype(np.float64)
    terms = lam[:-1] * lam[1:] / np.arange(1, x + 1, dtype=np.float64)
    return math.fsum(terms.tolist())


def log_chowla_dyadic(x: int, table: LiouvilleTable) -> float:
    """Same sum as :func:`log_chowla_sum`, by Abel summation on dyadic blocks.

    Diagnostic second route: on each block (M, 2M] the unweighted partial sums
    A(n) are formed first and then converted with
    sum a_n/n = A(b)/b + sum_{n<b} A(n) (1/n - 1/(n+1)).
    """
    if x < 1:
        raise ValueError("x must be positive")
    if not table.covers(1, x + 1):
        raise ValueError(f"table must cover [1, {x + 1}]")
    lam = table.window(1, x + 1).astype(np.int64)
    a = lam[:-1] * lam[1:]
    parts: list[float] = []
    start = 1
    while start <= x:
        end = min(x, 2 * start - 1)
        block = a[start - 1 : end]
        partial = np.cumsum(block)
        n = np.arange(start, end + 1, dtype=np.float64)
        parts.append(float(partial[-1]) / end)
        if len(block) > 1:
            diffs = 1.0 / n[:-1] - 1.0 / (n[:-1] + 1.0)
            parts.extend((partial[:-1] * diffs).tolist())
        start = end + 1
    return math.fsum(parts)


def log_chowla_exact(x: int, table: LiouvilleTable) -> Fraction:
    """Exact rational value of the log-weighted sum (small x only)."""
    table.require(1, x + 1)
    return sum((Fraction(table[n] * table[n + 1], n) for n in range(1, x + 1)), Fraction(0))


def rescaled_log_sum(x: int, d: int, table: LiouvilleTable) -> Fraction:
    """d * sum_{m <= d x, d | m} lambda(m)lambda(m+d)/m, exactly."""
    table.require(d, d * x + d)
    return d * sum(
        (Fraction(table[m] * table[m + d], m) for m in range(d, d * x + 1, d)),
        Fraction(0),
    )
