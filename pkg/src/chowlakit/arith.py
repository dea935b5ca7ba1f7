"""Exact integer substrate: Liouville tables, layered prime sets, shift sets.

Everything here is immutable once built. Rational quantities are kept as
:class:`fractions.Fraction`; floats only appear when a caller asks for them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

DEFAULT_SEGMENT = 1 << 20
DEFAULT_MAX_LENGTH = 200_000_000


class ResourceError(RuntimeError):
    """A configured size guard would be exceeded."""


# ---------------------------------------------------------------------------
# small number-theory helpers


def primes_up_to(n: int) -> np.ndarray:
    """All primes ``<= n`` as an int64 array (plain Eratosthenes)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def primes_in(lo: int, hi: int) -> list[int]:
    """Primes ``p`` with ``lo <= p <= hi``."""
    if hi < 2 or hi < lo:
        return []
    return [int(p) for p in primes_up_to(hi) if p >= lo]


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorization of ``|n|`` (n != 0)."""
    if n == 0:
        raise ValueError("cannot factor 0")
    n = abs(n)
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def prime_divisors(n: int) -> tuple[int, ...]:
    """Distinct primes dividing ``n``, sorted."""
    return tuple(sorted(factorize(n)))


def omega(n: int) -> int:
    """Number of distinct prime factors of ``n``."""
    return len(factorize(n)) if n != 0 else 0


def is_squarefree(n: int) -> bool:
    return n != 0 and all(e == 1 for e in factorize(n).values())


def crt_pair(a1: int, q1: int, a2: int, q2: int) -> tuple[int, int] | None:
    """Intersect ``a1 mod q1`` and ``a2 mod q2``; None when incompatible."""
    g = math.gcd(q1, q2)
    if (a2 - a1) % g:
        return None
    l = q1 // g * q2
    if g == q2:
        return a1 % l, l
    # solve a1 + q1*k = a2 (mod q2)
    m = q2 // g
    k = ((a2 - a1) // g) * pow(q1 // g, -1, m) % m
    return (a1 + q1 * k) % l, l


def crt(congruences: Iterable[tuple[int, int]]) -> tuple[int, int] | None:
    """Solve a list of ``(a, q)`` congruences; ``(0, 1)`` for the empty list."""
    a, q = 0, 1
    for ai, qi in congruences:
        res = crt_pair(a, q, ai, qi)
        if res is None:
            return None
        a, q = res
    return a, q


# ---------------------------------------------------------------------------
# Liouville function


@dataclass(frozen=True)
class LiouvilleTable:
    """Values of lambda on the integer interval ``[lo, hi]``."""

    lo: int
    hi: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if len(self.values) != self.hi - self.lo + 1:
            raise ValueError("values length does not match [lo, hi]")

    def __getitem__(self, n: int) -> int:
        if not self.lo <= n <= self.hi:
            raise IndexError(f"n={n} outside table range [{self.lo}, {self.hi}]")
        return int(self.values[n - self.lo])

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    def covers(self, lo: int, hi: int) -> bool:
        return self.lo <= lo and hi <= self.hi

    def require(self, lo: int, hi: int) -> None:
        """Raise ValueError unless ``[lo, hi]`` is inside the table."""
        if lo <= hi and not self.covers(lo, hi):
            raise ValueError(
                f"table [{self.lo}, {self.hi}] does not cover [{lo}, {hi}]"
            )

    def window(self, lo: int, hi: int) -> np.ndarray:
        self.require(lo, hi)
        return self.values[lo - self.lo : hi - self.lo + 1]

    @classmethod
    def constant(cls, lo: int, hi: int, sign: int = 1) -> "LiouvilleTable":
        """A fake table with every value equal to ``sign`` (test hook)."""
        return cls(lo, hi, np.full(hi - lo + 1, sign, dtype=np.int8))


def _segment_big_omega(a: int, b: int, primes: np.ndarray) -> np.ndarray:
    """Omega(n) for n in [a, b] via prime-power striking; primes cover sqrt(b)."""
    rem = np.arange(a, b + 1, dtype=np.int64)
    cnt = np.zeros(b - a + 1, dtype=np.int16)
    for p in primes:
        p = int(p)
        if p * p > b:
            break
        pk = p
        while pk <= b:
            start = -(-a // pk) * pk
            if start <= b:
                sl = slice(start - a, None, pk)
                rem[sl] //= p
                cnt[sl] += 1
            pk *= p
    cnt += rem > 1
    return cnt


def liouville_sieve(
    lo: int,
    hi: int,
    *,
    segment: int = DEFAULT_SEGMENT,
    max_length: int = DEFAULT_MAX_LENGTH,
) -> LiouvilleTable:
    """Segmented Omega-counting sieve for lambda on ``[lo, hi]``.

    Args:
        lo: first integer, at least 1.
        hi: last integer.
        segment: number of values processed per segment.
        max_length: guard on ``hi - lo + 1``.

    Raises:
        ValueError: if ``lo < 1`` or ``lo > hi``.
        ResourceError: if the range exceeds ``max_length``.
    """
    if lo < 1 or lo > hi:
        raise ValueError(f"need 1 <= lo <= hi, got ({lo}, {hi})")
    if hi - lo + 1 > max_length:
        raise ResourceError(f"range of {hi - lo + 1} values exceeds cap {max_length}")
    primes = primes_up_to(math.isqrt(hi))
    out = np.empty(hi - lo + 1, dtype=np.int8)
    for a in range(lo, hi + 1, segment):
        b = min(hi, a + segment - 1)
        big_omega = _segment_big_omega(a, b, primes)
        out[a - lo : b - lo + 1] = 1 - 2 * (big_omega & 1)
    return LiouvilleTable(lo, hi, out)


def liouville_trial(n: int) -> int:
    """lambda(n) by trial division; slow reference implementation."""
    return -1 if sum(factorize(n).values()) % 2 else 1


def liouville_spf(hi: int) -> np.ndarray:
    """lambda(1..hi) via a smallest-prime-factor table and repeated division.

    Independent of :func:`liouville_sieve`; used as a cross-check. Index 0 is
    unused and set to 0.
    """
    spf = np.zeros(hi + 1, dtype=np.int64)
    for p in range(2, hi + 1):
        if p * p > hi:
            break
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    rest = np.flatnonzero(spf == 0)
    spf[rest] = rest
    n = np.arange(hi + 1, dtype=np.int64)
    n[0] = 1
    count = np.zeros(hi + 1, dtype=np.int64)
    active = n > 1
    while active.any():
        idx = np.flatnonzero(active)
        n[idx] //= spf[n[idx]]
        count[idx] += 1
        active[idx] = n[idx] > 1
    lam = (1 - 2 * (count & 1)).astype(np.int8)
    lam[0] = 0
    return lam


# ---------------------------------------------------------------------------
# prime layers and shift sets


@dataclass(frozen=True)
class PrimeLayers:
    """``J`` disjoint sorted prime lists with their exact Mertens sums."""

    layers: tuple[tuple[int, ...], ...]
    mertens: tuple[Fraction, ...]
    lmax: Fraction

    @classmethod
    def from_lists(cls, layers: Sequence[Iterable[int]]) -> "PrimeLayers":
        ls = tuple(tuple(sorted(set(int(p) for p in layer))) for layer in layers)
        seen: set[int] = set()
        for layer in ls:
            if seen.intersection(layer):
                raise ValueError("prime layers must be pairwise disjoint")
            seen.update(layer)
        mertens = tuple(sum((Fraction(1, p) for p in layer), Fraction(0)) for layer in ls)
        return cls(ls, mertens, max(mertens, default=Fraction(0)))

    @property
    def J(self) -> int:
        return len(self.layers)

    @property
    def primes(self) -> frozenset[int]:
        return frozenset(p for layer in self.layers for p in layer)

    def layer_of(self, p: int) -> int:
        """0-based layer index holding ``p``; ValueError if absent."""
        for j, layer in enumerate(self.layers):
            if p in layer:
                return j
        raise ValueError(f"{p} is in no layer")


def formula_layer_windows(h0: float, h: float, j: int) -> list[tuple[float, float]]:
    """Open windows ``(lo, hi)`` for ``log p`` from the layer inequality.

    The exponent eps1 is recovered from ``H0 = exp((log H)^(1 - eps1))`` and
    ``C = exp(eps1 * loglog H / (2J))``.
    """
    if not (1 < h0 < h) or j < 1:
        raise ValueError("need 1 < h0 < h and j >= 1")
    log_h0, log_h = math.log(h0), math.log(h)
    if log_h0 <= 1:
        raise ValueError("need log h0 > 1 so that eps1 is well defined")
    eps1 = 1 - math.log(log_h0) / math.log(log_h)
    c = math.exp(eps1 * math.log(log_h) / (2 * j))
    return [(c ** (2 * i - 2) * log_h0, c ** (2 * i - 1) * log_h0) for i in range(1, j + 1)]


def build_prime_layers(
    h0: float | None = None,
    h: float | None = None,
    j: int | None = None,
    *,
    mode: str = "layer-formula",
    windows: Sequence[tuple[int, int]] | None = None,
) -> PrimeLayers:
    """Build layered prime sets.

    In ``layer-formula`` mode layer ``i`` holds the primes with
    ``C^(2i-2) < log p / log h0 < C^(2i-1)`` (strict). In ``explicit-windows``
    mode layer ``i`` holds the primes in the open interval ``windows[i]``.
    """
    if mode == "layer-formula":
        if h0 is None or h is None or j is None:
            raise ValueError("layer-formula mode needs h0, h and j")
        log_windows = formula_layer_windows(h0, h, j)
        top = math.ceil(math.exp(log_windows[-1][1]))
        candidates = primes_up_to(top)
        logs = np.log(candidates.astype(np.float64))
        layers = [
            [int(p) for p, lp in zip(candidates, logs) if a < lp < b]
            for a, b in log_windows
        ]
        return PrimeLayers.from_lists(layers)
    if mode == "explicit-windows":
        if not windows:
            raise ValueError("explicit-windows mode needs at least one window")
        ws = [(int(a), int(b)) for a, b in windows]
        for (a, b), (c, _) in zip(ws, ws[1:]):
            if b > c:
                raise ValueError("windows must be disjoint and ordered")
        for a, b in ws:
            if a > b:
                raise ValueError(f"bad window ({a}, {b})")
        return PrimeLayers.from_lists([primes_in(a + 1, b - 1) for a, b in ws])
    raise ValueError(f"unknown mode {mode!r}")


def omega_layer(n: int, layers: PrimeLayers) -> int:
    """Number of distinct primes of the layers dividing ``n``."""
    if n < 1:
        raise ValueError("n must be positive")
    return sum(1 for layer in layers.layers for p in layer if n % p == 0)


@dataclass(frozen=True)
class ShiftSet:
    """All products of one prime per layer, with stored factor tuples."""

    elements: tuple[int, ...]
    factors: dict[int, tuple[int, ...]] = field(repr=False)
    layers: PrimeLayers = field(repr=False)

    def __contains__(self, d: int) -> bool:
        return d in self.factors

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def J(self) -> int:
        return self.layers.J

    @property
    def signed(self) -> tuple[int, ...]:
        """The set plus-minus D, negatives first."""
        return tuple(-d for d in reversed(self.elements)) + self.elements

    def factor_tuple(self, d: int) -> tuple[int, ...]:
        """Per-layer primes of ``|d|``; ValueError when ``|d|`` is not in D."""
        try:
            return self.factors[abs(d)]
        except KeyError:
            raise ValueError(f"{abs(d)} is not in the shift set") from None


def generate_shift_set(layers: PrimeLayers) -> ShiftSet:
    """Cartesian product of the layers."""
    if layers.J == 0 or any(len(layer) == 0 for layer in layers.layers):
        raise ValueError("every layer must be non-empty")
    factors = {math.prod(t): t for t in itertools.product(*layers.layers)}
    return ShiftSet(tuple(sorted(factors)), factors, layers)


def shift_set_from_lists(layers: Sequence[Iterable[int]]) -> ShiftSet:
    """Convenience: ``generate_shift_set(PrimeLayers.from_lists(layers))``."""
    return generate_shift_set(PrimeLayers.from_lists(layers))
