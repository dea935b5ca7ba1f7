"""Truncated inclusion-exclusion for square-free moduli, the exact Kubilius
model, the smooth cutoff W and the fourth-moment Parseval identity."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate

from .arith import PrimeLayers, ResourceError, crt, is_squarefree, omega

MAX_PROGRESSIONS = 12
MAX_OMEGA = 20
KUBILIUS_GUARD = 10**12


@dataclass(frozen=True, order=True)
class Progression:
    """``residue + modulus * Z`` with the residue reduced into ``[0, modulus)``."""

    modulus: int
    residue: int

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        object.__setattr__(self, "residue", self.residue % self.modulus)

    @classmethod
    def of(cls, residue: int, modulus: int) -> "Progression":
        return cls(modulus, residue)

    def __contains__(self, n: int) -> bool:
        return n % self.modulus == self.residue

    def contains_progression(self, other: "Progression") -> bool:
        """``other`` is a subset of ``self``."""
        return other.modulus % self.modulus == 0 and other.residue % self.modulus == self.residue

    def __str__(self) -> str:
        return f"{self.residue} mod {self.modulus}"


INTEGERS = Progression(1, 0)


def intersect_progressions(ps: Iterable[Progression]) -> Progression | None:
    """CRT intersection; None when empty. The empty family gives Z."""
    sol = crt((p.residue, p.modulus) for p in ps)
    return None if sol is None else Progression(sol[1], sol[0])


# ---------------------------------------------------------------------------
# Rota-type cancellation


def rota_sum(omega_set: Iterable, family: Iterable[Iterable]) -> int:
    """sum over sub-families B with union Omega of (-1)^{|B|}.

    Computed by Moebius inversion over W subset of Omega: the inner alternating
    sum over B inside {A : A subset of W} is 1 when that collection is empty
    and 0 otherwise.
    """
    omega_list = list(dict.fromkeys(omega_set))
    if len(omega_list) > MAX_OMEGA:
        raise ResourceError(f"|Omega| = {len(omega_list)} exceeds {MAX_OMEGA}")
    pos = {x: k for k, x in enumerate(omega_list)}
    masks = set()
    for A in family:
        mask = 0
        for x in A:
            if x not in pos:
                raise ValueError(f"{x!r} is not in Omega")
            mask |= 1 << pos[x]
        masks.add(mask)
    n = len(omega_list)
    total = 0
    for W in range(1 << n):
        if not any(m & ~W == 0 for m in masks):
            total += (-1) ** (n - bin(W).count("1"))
    return total


def rota_sum_direct(omega_set: Iterable, family: Iterable[Iterable]) -> int:
    """Literal enumeration of all sub-families (small families only)."""
    target = frozenset(omega_set)
    fam = list(dict.fromkeys(frozenset(A) for A in family))
    total = 0
    for r in range(len(fam) + 1):
        for B in itertools.combinations(fam, r):
            if frozenset().union(*B) == target:
                total += (-1) ** r
    return total


# ---------------------------------------------------------------------------
# truncated inclusion-exclusion


@dataclass(frozen=True)
class SieveExpansion:
    coefficients: dict[Progression, int]
    boundary: dict[Progression, int]  # R -> 3^omega(q_R)
    closure: frozenset[Progression]  # Y^cap without the empty set

    def main(self, n: int) -> int:
        return sum(c for P, c in self.coefficients.items() if n in P)

    def remainder_bound(self, n: int) -> int:
        return sum(wt for R, wt in self.boundary.items() if n in R)


def _subsets_with_intersections(Y: Sequence[Progression]) -> list[tuple[tuple[int, ...], Progression]]:
    out = []
    for r in range(len(Y) + 1):
        for S in itertools.combinations(range(len(Y)), r):
            P = intersect_progressions(Y[i] for i in S)
            if P is not None:
                out.append((S, P))
    return out


def sieve_expansion(
    Y: Sequence[Progression], X: Callable[[Progression], bool] | Iterable[Progression]
) -> SieveExpansion:
    """Coefficients c_P for P in X and the boundary of X inside Y^cap.

    ``X`` is a predicate or an explicit collection; it must contain Z and be
    closed under taking larger progressions of Y^cap.
    """
    Y = list(dict.fromkeys(Y))
    if len(Y) > MAX_PROGRESSIONS:
        raise ResourceError(f"|Y| = {len(Y)} exceeds {MAX_PROGRESSIONS}")
    for P in Y:
        if not is_squarefree(P.modulus):
            raise ValueError(f"modulus {P.modulus} is not square-free")
    in_X = X if callable(X) else frozenset(X).__contains__
    subsets = _subsets_with_intersections(Y)
    closure = frozenset(P for _, P in subsets)
    members = {P for P in closure if in_X(P)}
    if INTEGERS not in members:
        raise ValueError("X must contain Z")
    for P in members:
        for Q in closure:
            if Q.contains_progression(P) and Q not in members:
                raise ValueError(f"X is not closed under containment: {P} in X but {Q} is not")
    coeffs: dict[Progression, int] = {P: 0 for P in members}
    for S, P in subsets:
        if P in members:
            coeffs[P] += (-1) ** len(S)
    boundary = {}
    for P in members:
        for Q in Y:
            R = intersect_progressions((P, Q))
            if R is not None and R not in members:
                boundary[R] = 3 ** omega(R.modulus)
    return SieveExpansion(coeffs, boundary, closure)


def sieve_identity_check(
    Y: Sequence[Progression],
    X: Callable[[Progression], bool] | Iterable[Progression] | SieveExpansion,
    n: int,
) -> tuple[int, int, int]:
    """``(indicator, main term, remainder bound)`` at n."""
    exp = X if isinstance(X, SieveExpansion) else sieve_expansion(Y, X)
    lhs = int(all(n not in P for P in Y))
    return lhs, exp.main(n), exp.remainder_bound(n)


def sum_two_omega(m: int) -> int:
    """sum over d | m of 2^omega(d)."""
    return sum(2 ** omega(d) for d in range(1, m + 1) if m % d == 0)


# ---------------------------------------------------------------------------
# Kubilius model


def _as_primes(primes: PrimeLayers | Iterable[int]) -> list[int]:
    if isinstance(primes, PrimeLayers):
        return sorted(primes.primes)
    return sorted(set(int(p) for p in primes))


def local_count(p: int, X_p: frozenset[int], b: Sequence[int]) -> int:
    """Residues r mod p with ``{i : p | r + b_i}`` equal to ``X_p`` (1-based i)."""
    count = 0
    for r in range(p):
        hit = frozenset(i for i, bi in enumerate(b, start=1) if (r + bi) % p == 0)
        count += hit == X_p
    return count


def kubilius_density(
    X: Iterable[tuple[int, int]], b: Sequence[int], primes: PrimeLayers | Iterable[int]
) -> Fraction:
    """P(p | n + b_i exactly when (p, i) in X) for n uniform modulo the primes.

    Computed prime by prime and multiplied; inconsistent X gives 0.
    """
    ps = _as_primes(primes)
    if math.prod(ps) > KUBILIUS_GUARD:
        raise ResourceError(f"product of primes exceeds {KUBILIUS_GUARD}")
    X = set(X)
    if any(p not in ps or not 1 <= i <= len(b) for p, i in X):
        raise ValueError("X mentions a prime or index outside the model")
    out = Fraction(1)
    for p in ps:
        X_p = frozenset(i for q, i in X if q == p)
        out *= Fraction(local_count(p, X_p, b), p)
        if out == 0:
            break
    return out


# ---------------------------------------------------------------------------
# smooth cutoff


def _bump(x: float) -> float:
    return math.exp(2.0 / (x * x - 1.0)) if -1.0 < x < 1.0 else 0.0


@lru_cache(maxsize=1)
def _bump_mass() -> float:
    return integrate.quad(_bump, -1.0, 1.0, epsabs=1e-14, epsrel=1e-14)[0]


@lru_cache(maxsize=4096)
def _bump_cdf(u: float) -> float:
    """Normalized integral of the bump over [-1, u]."""
    if u <= -1.0:
        return 0.0
    if u >= 1.0:
        return 1.0
    if u <= 0.0:
        val = integrate.quad(_bump, -1.0, u, epsabs=1e-14, epsrel=1e-14)[0]
        return val / _bump_mass()
    return 1.0 - _bump_cdf(-u)


@dataclass(frozen=True)
class SmoothCutoff:
    """Normalized bump of width T/4 convolved with the indicator of [T/4, 7T/4]."""

    T: float

    def __post_init__(self) -> None:
        if not self.T > 0:
            raise ValueError("T must be positive")

    @property
    def plateau(self) -> tuple[float, float]:
        return self.T / 2, 3 * self.T / 2

    @property
    def support(self) -> tuple[float, float]:
        return 0.0, 2 * self.T

    def __call__(self, x: float) -> float:
        s = 4.0 * x / self.T
        hi, lo = min(1.0, s - 1.0), max(-1.0, s - 7.0)
        if hi <= lo:
            return 0.0
        return min(1.0, max(0.0, _bump_cdf(round(hi, 15)) - _bump_cdf(round(lo, 15))))

    def power(self, m: int) -> Callable[[float], float]:
        return lambda x: self(x) ** m

    def difference_ratios(self, orders: Sequence[int] = (1, 2, 3), samples: int = 2000) -> dict[int, float]:
        """max |T^k Delta_h^k W / h^k| over a grid of the support, per order k.

        Reported only; these estimate the constants in derivative bounds of
        the form |W^(k)| <= C_k T^-k.
        """
        h = 2 * self.T / samples
        xs = np.linspace(0.0, 2 * self.T, samples + 1)
        vals = np.array([self(float(x)) for x in xs])
        out = {}
        for k in orders:
            diffs = np.diff(vals, n=k)
            out[k] = float(np.max(np.abs(diffs))) * (self.T / h) ** k
        return out


def smooth_cutoff(T: float) -> SmoothCutoff:
    return SmoothCutoff(float(T))


# ---------------------------------------------------------------------------
# fourth moment of the exponential sum over shifts


def shift_pair_counts(ds: Sequence[int]) -> dict[int, float]:
    """m -> sum over d1 - d2 = m of 1/(d1 d2)."""
    out: dict[int, float] = {}
    for d1 in ds:
        for d2 in ds:
            out[d1 - d2] = out.get(d1 - d2, 0.0) + 1.0 / (d1 * d2)
    return out


def dyadic_shifts(shifts: Iterable[int], M: float) -> list[int]:
    return sorted(d for d in shifts if M / 2 < d <= M)


def fourth_moment_parseval(ds: Sequence[int]) -> float:
    """Integral of |Q|^4 over [0, 1] through the Parseval expansion."""
    return math.fsum(v * v for v in shift_pair_counts(ds).values())


def fourth_moment_quadrature(ds: Sequence[int]) -> float:
    """Integral of |Q|^4 by adaptive quadrature of the trigonometric sum."""
    d = np.asarray(ds, dtype=np.float64)
    inv = 1.0 / d

    def q4(a: float) -> float:
        z = np.sum(inv * np.exp(2j * np.pi * a * d))
        return float(abs(z) ** 4)

    top = int(max(ds)) if len(ds) else 1
    points = np.linspace(0, 1, 4 * top + 1)
    total = 0.0
    for lo, hi in zip(points[:-1], points[1:]):
        total += integrate.quad(q4, lo, hi, epsabs=1e-13, epsrel=1e-12)[0]
    return total
