"""Rank of shifted prohibited progressions relative to the lit progression,
and the checks that wire the rank cut-off into the combinatorial sieve."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .arith import ResourceError, ShiftSet, omega, prime_divisors
from .constraints import Constraint, prime_status
from .prohibited import ProhibitedProgression
from .sieve import Progression, SieveExpansion, intersect_progressions, sieve_expansion
from .walks import Index, SignedWalk, build_walk

MAX_RANK_FAMILY = 12
PERIOD_GUARD = 2_000_000

INFINITE = math.inf


def lit_progression(w: SignedWalk, lit: Iterable[Index]) -> Progression | None:
    """``{n : p_{i,j} | n + b_i for (i, j) in lit}``; None when the congruences clash."""
    return intersect_progressions(Progression.of(-w.b(i), w.p(i, j)) for i, j in lit)


def shifted_family(progressions: Iterable[Progression | ProhibitedProgression], w: SignedWalk) -> tuple[Progression, ...]:
    """``{P - b_i}`` over the progressions and every step index, deduplicated and sorted."""
    out = set()
    for P in progressions:
        if isinstance(P, ProhibitedProgression):
            if P.empty:
                continue
            P = Progression(P.modulus, P.residue)
        for i in range(1, w.R + 1):
            out.add(Progression(P.modulus, P.residue - w.b(i)))
    return tuple(sorted(out))


@dataclass(frozen=True)
class RankContext:
    walk: SignedWalk
    lit: frozenset[Index]
    A: Progression | None
    family: tuple[Progression, ...]
    single: frozenset[Index] = frozenset()

    @classmethod
    def build(
        cls,
        w: SignedWalk,
        lit: Iterable[Index],
        progressions: Iterable[Progression | ProhibitedProgression],
        single: Iterable[Index] = (),
    ) -> "RankContext":
        lit = frozenset(lit)
        for i, j in lit:
            if not (1 <= i <= w.R and 1 <= j <= w.J):
                raise ValueError(f"lit index {(i, j)} outside the walk")
        return cls(w, lit, lit_progression(w, lit), shifted_family(progressions, w), frozenset(single))

    def meets_A(self, R: Progression | None) -> bool:
        return R is not None and self.A is not None and intersect_progressions((R, self.A)) is not None

    def containing(self, R: Progression) -> list[Progression]:
        return [Q for Q in self.family if Q.contains_progression(R)]


def _independent(A_mod: int, qs: Sequence[Progression]) -> bool:
    """No modulus divides A_mod times the product of the others."""
    for t, Q in enumerate(qs):
        rest = A_mod * math.prod(P.modulus for s, P in enumerate(qs) if s != t)
        if rest % Q.modulus == 0:
            return False
    return True


def rank_of(ctx: RankContext, R: Progression | None) -> float | int:
    """Largest T with independent Q_1..Q_T in the family all containing R.

    Infinite when R misses A. Independence is inherited by subsets, so the
    search grows sizes until none works.
    """
    if not ctx.meets_A(R):
        return INFINITE
    cands = ctx.containing(R)
    if len(cands) > MAX_RANK_FAMILY:
        raise ResourceError(f"{len(cands)} containing progressions exceed {MAX_RANK_FAMILY}")
    best = 0
    for size in range(1, len(cands) + 1):
        if any(_independent(ctx.A.modulus, qs) for qs in itertools.combinations(cands, size)):
            best = size
        else:
            break
    return best


def rank_representation(ctx: RankContext, R: Progression) -> tuple[Progression, ...]:
    """Inclusion-minimal Q's from the family with ``R & A == (Q_1 & ... & Q_T) & A``."""
    if not ctx.meets_A(R):
        raise ValueError("R misses A, so its rank is infinite")
    target = intersect_progressions((R, ctx.A))
    chosen = ctx.containing(R)
    if intersect_progressions([*chosen, ctx.A]) != target:
        raise ValueError("R is not an intersection of family members")
    k = 0
    while k < len(chosen):
        trial = chosen[:k] + chosen[k + 1 :]
        if intersect_progressions([*trial, ctx.A]) == target:
            chosen = trial
        else:
            k += 1
    return tuple(chosen)


def family_closure(family: Sequence[Progression]) -> frozenset[Progression]:
    """Non-empty intersections of sub-families, Z included."""
    if len(family) > MAX_RANK_FAMILY:
        raise ResourceError(f"family of size {len(family)} exceeds {MAX_RANK_FAMILY}")
    out = set()
    for r in range(len(family) + 1):
        for sub in itertools.combinations(family, r):
            P = intersect_progressions(sub)
            if P is not None:
                out.add(P)
    return frozenset(out)


@dataclass
class RankReport:
    closure_size: int = 0
    x_size: int = 0
    boundary_size: int = 0
    period: int = 1
    main_term_sum: Fraction = Fraction(0)
    remainder_term_sum: Fraction = Fraction(0)
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def _inv_radical(m: int) -> Fraction:
    return Fraction(1, math.prod(prime_divisors(m))) if m > 1 else Fraction(1)


def existencerank_properties(
    ctx: RankContext,
    threshold: float,
    L: int,
    X: Callable[[Progression], bool] | Iterable[Progression] | None = None,
) -> RankReport:
    """Check the rank properties on every progression of the closure.

    ``X`` defaults to ``{R : rank(R) < threshold}``; passing another set is
    how closure failures are exercised.
    """
    w = ctx.walk
    K, J = w.R, w.J
    rep = RankReport()
    closure = family_closure(ctx.family)
    rep.closure_size = len(closure)
    ranks = {R: rank_of(ctx, R) for R in closure}
    s_primes = {w.p(i, j) for i, j in ctx.single}
    for R, rk in sorted(ranks.items()):
        if rk == INFINITE:
            continue
        if omega(R.modulus) > L * J * rk + K * J:
            rep.failures.append(f"omega bound fails at {R}: rank {rk}")
        if sum(1 for p in prime_divisors(R.modulus) if p in s_primes) > L * J * rk:
            rep.failures.append(f"single-prime bound fails at {R}: rank {rk}")
        qs = rank_representation(ctx, R)
        if len(qs) > rk:
            rep.failures.append(f"representation of {R} needs {len(qs)} > rank {rk} progressions")
    if X is None:
        members = {R for R, rk in ranks.items() if rk < threshold}
    elif callable(X):
        members = {R for R in closure if X(R)}
    else:
        members = set(X) & closure
    rep.x_size = len(members)
    try:
        exp = sieve_expansion(list(ctx.family), members)
    except ValueError as err:
        rep.failures.append(f"sieve hypotheses: {err}")
        return rep
    rep.boundary_size = len(exp.boundary)
    for P, c in exp.coefficients.items():
        if abs(c) > 2 ** omega(P.modulus):
            rep.failures.append(f"coefficient {c} at {P} exceeds 2^omega")
    fd = w.f()
    rep.main_term_sum = sum(
        (_inv_radical(P.modulus // math.gcd(P.modulus, fd)) for P in members), Fraction(0)
    )
    rep.remainder_term_sum = sum(
        (_inv_radical(math.lcm(P.modulus, fd)) for P in exp.boundary if ctx.meets_A(P)), Fraction(0)
    )
    if ctx.A is None:
        return rep
    rep.period = math.lcm(ctx.A.modulus, *(P.modulus for P in ctx.family))
    if rep.period > PERIOD_GUARD:
        raise ResourceError(f"period {rep.period} exceeds {PERIOD_GUARD}")
    bad = _pointwise_failures(ctx, exp, rep.period)
    if bad:
        rep.failures.append(f"sieve identity fails at n = {bad[:5]}")
    return rep


def _pointwise_failures(ctx: RankContext, exp: SieveExpansion, period: int) -> list[int]:
    bad = []
    for n in range(ctx.A.residue, period, ctx.A.modulus):
        lhs = int(all(n not in P for P in ctx.family))
        main = exp.main(n)
        if abs(lhs - main) > exp.remainder_bound(n):
            bad.append(n)
    return bad


# ---------------------------------------------------------------------------
# involved primes in primitive prohibited sequences


def interval_constraints(w: SignedWalk) -> list[Constraint]:
    """All satisfied constraints with an interval index set, any pivot and kappa 0."""
    out = []
    for a in range(1, w.R + 1):
        for b in range(a, w.R + 1):
            s = sum(w.steps[a - 1 : b])
            for i0 in range(1, w.R + 1):
                for j0 in range(1, w.J + 1):
                    if s % w.p(i0, j0) == 0:
                        out.append(Constraint.interval(a, b, (i0, j0)))
    return out


def involved_prime_cases(seq: Sequence[int], shifts: ShiftSet) -> dict[int, str | None]:
    """For each prime of the sequence: ``"1"`` if it is involved in a satisfied
    interval constraint, ``"2"`` if some other involved prime q separates it,
    None if neither."""
    w = build_walk(seq, shifts)
    gamma = interval_constraints(w)
    involved: list[tuple[int, Constraint]] = []
    direct: set[int] = set()
    for con in gamma:
        for q in w.primes():
            st = prime_status(w, con, q)
            if isinstance(st, tuple):
                involved.append((q, con))
                direct.add(q)
    out: dict[int, str | None] = {}
    for p in sorted(w.primes()):
        if p in direct:
            out[p] = "1"
            continue
        out[p] = None
        for q in sorted({q for q, _ in involved}):
            for i2 in range(1, w.R + 1):
                if w.d(i2) % q:
                    continue
                s = sum(w.d(i) for i in range(1, i2) if w.d(i) % p == 0)
                if s % q:
                    out[p] = "2"
                    break
            if out[p]:
                break
    return out
