"""Divisibility constraints on walks and triangular systems.

A constraint ``C_{I, i0, j0, kappa}`` is the predicate
``p_{i0,j0} | sum_{i in I} d_i + kappa``. Index sets are stored as maximal
runs of consecutive integers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .arith import ResourceError, ShiftSet, prime_divisors
from .walks import (
    Index,
    IndexPartition,
    SignedWalk,
    build_walk,
    lit_condition_1,
    minimal_divisibility_triples,
    single_indices,
)
from .words import compress, separated_repetitions

ORACLE_GUARD = 10_000_000


def _runs(indices: Iterable[int]) -> tuple[tuple[int, int], ...]:
    out: list[list[int]] = []
    for i in sorted(set(indices)):
        if out and out[-1][1] == i - 1:
            out[-1][1] = i
        else:
            out.append([i, i])
    return tuple((a, b) for a, b in out)


@dataclass(frozen=True)
class Constraint:
    intervals: tuple[tuple[int, int], ...]
    pivot: Index
    kappa: int = 0

    @classmethod
    def make(cls, indices: Iterable[int], pivot: Index, kappa: int = 0) -> "Constraint":
        return cls(_runs(indices), tuple(pivot), int(kappa))

    @classmethod
    def interval(cls, a: int, b: int, pivot: Index, kappa: int = 0) -> "Constraint":
        """Index set ``[a, b]`` (empty when b < a)."""
        return cls.make(range(a, b + 1), pivot, kappa)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(i for a, b in self.intervals for i in range(a, b + 1))

    @property
    def c(self) -> int:
        return len(self.intervals)

    def _check(self, w: SignedWalk) -> None:
        i0, j0 = self.pivot
        if not (1 <= i0 <= w.R and 1 <= j0 <= w.J):
            raise ValueError(f"pivot {self.pivot} outside the walk")
        if self.intervals and (self.intervals[0][0] < 1 or self.intervals[-1][1] > w.R):
            raise ValueError("index set outside [1, R]")


def evaluate_constraint(w: SignedWalk, con: Constraint) -> bool:
    con._check(w)
    p = w.p(*con.pivot)
    return (sum(w.d(i) for i in con.indices) + con.kappa) % p == 0


def is_absent(w: SignedWalk, con: Constraint, p: int) -> bool:
    return p != w.p(*con.pivot) and all(w.d(i) % p for i in con.indices)


def involvement_cases(w: SignedWalk, con: Constraint, p: int) -> tuple[str, ...]:
    """Which of the three involvement clauses hold for ``p``."""
    con._check(w)
    pivot = w.p(*con.pivot)
    ds = [w.d(i) for i in con.indices]
    hit = sum(d for d in ds if d % p == 0)
    miss = sum(d for d in ds if d % p)
    cases = []
    if con.kappa == 0 and sum(ds) == 0 and hit != 0:
        cases.append("i")
    if con.kappa == 0 and p == pivot and miss != 0:
        cases.append("ii")
    if p != pivot and hit % pivot != 0:
        cases.append("iii")
    return tuple(cases)


def prime_status(w: SignedWalk, con: Constraint, p: int) -> str | tuple[str, tuple[str, ...]]:
    """``"absent"``, ``("involved", cases)`` or ``"neither"``."""
    if p not in w.primes():
        raise ValueError(f"{p} does not divide any step")
    if is_absent(w, con, p):
        return "absent"
    cases = involvement_cases(w, con, p)
    return ("involved", cases) if cases else "neither"


@dataclass(frozen=True)
class TriangularSystem:
    constraints: tuple[Constraint, ...]
    witnesses: tuple[int, ...] | None = None

    @property
    def T(self) -> int:
        return len(self.constraints)

    @property
    def complexity(self) -> tuple[int, int, int]:
        """``(T, c, B)`` with c the largest interval count and B = |kappa|."""
        kappas = {con.kappa for con in self.constraints}
        if len(kappas) > 1:
            raise ValueError("constraints do not share kappa")
        c = max((con.c for con in self.constraints), default=0)
        return self.T, c, abs(kappas.pop()) if kappas else 0


@dataclass(frozen=True)
class StepCertificate:
    t: int
    prime: int | None
    cases: tuple[str, ...]
    source: str
    reason: str = ""


def verify_triangular(
    w: SignedWalk, system: TriangularSystem
) -> tuple[bool, list[StepCertificate]]:
    """Check every constraint holds and has a fresh involved prime.

    Supplied witnesses are checked as given; otherwise the smallest qualifying
    prime is used. The certificate stops at the first failing step.
    """
    cert: list[StepCertificate] = []
    primes = sorted(w.primes())
    for t, con in enumerate(system.constraints, start=1):
        try:
            holds = evaluate_constraint(w, con)
        except ValueError as exc:
            cert.append(StepCertificate(t, None, (), "-", str(exc)))
            return False, cert
        if not holds:
            cert.append(StepCertificate(t, None, (), "-", "constraint does not hold"))
            return False, cert
        earlier = system.constraints[: t - 1]

        def qualifies(p: int) -> tuple[str, ...]:
            if not all(is_absent(w, prev, p) for prev in earlier):
                return ()
            return involvement_cases(w, con, p)

        if system.witnesses is not None:
            p = system.witnesses[t - 1]
            cases = qualifies(p) if p in w.primes() else ()
            if not cases:
                cert.append(StepCertificate(t, p, (), "supplied", "witness not involved or not fresh"))
                return False, cert
            cert.append(StepCertificate(t, p, cases, "supplied"))
            continue
        found = next(((p, cs) for p in primes if (cs := qualifies(p))), None)
        if found is None:
            cert.append(StepCertificate(t, None, (), "scan", "no involved prime absent from earlier constraints"))
            return False, cert
        cert.append(StepCertificate(t, found[0], found[1], "scan"))
    return True, cert


def weighted_count_oracle(
    R: int, shifts: ShiftSet, predicate: Callable[[SignedWalk], bool] | None
) -> Fraction:
    """Exact sum over d in (+-D)^R passing ``predicate`` of prod_{p | f(d)} 1/p."""
    if len(shifts) ** R > ORACLE_GUARD:
        raise ResourceError(f"|D|^R = {len(shifts) ** R} exceeds {ORACLE_GUARD}")
    if predicate is None:
        return Fraction(0)
    total = Fraction(0)
    for steps in itertools.product(shifts.signed, repeat=R):
        w = build_walk(steps, shifts)
        if predicate(w):
            total += Fraction(1, w.f())
    return total


# ---------------------------------------------------------------------------
# extraction from bad single indices


def bad_single_systems(w: SignedWalk) -> dict[str, TriangularSystem]:
    """One triangular system per bad-single case, using the most popular layer.

    Cases: ``"1"`` equal ``b_i``, ``"2"`` equal ``b_{i+1}``, ``"3<"`` and
    ``"3>"`` a divisibility ``p_ij | b_i' - b_i`` with ``i' < i`` or ``i' > i``.
    """
    S = single_indices(w)
    rows = sorted({i for i, _ in S})
    R = w.R
    by_case: dict[str, dict[int, list[tuple[int, Constraint, int]]]] = {}

    def add(case: str, j: int, i: int, con: Constraint, witness: int) -> None:
        by_case.setdefault(case, {}).setdefault(j, []).append((i, con, witness))

    for i, j in sorted(S):
        p = w.p(i, j)
        later = [i2 for i2 in rows if i2 > i and w.b(i2) == w.b(i)]
        if later:
            add("1", j, i, Constraint.interval(i, later[0] - 1, (R, 1)), p)
        earlier = [i2 for i2 in rows if i2 < i and w.b(i2 + 1) == w.b(i + 1)]
        if earlier:
            add("2", j, i, Constraint.interval(earlier[0] + 1, i, (1, 1)), p)
        for i2 in range(1, R + 1):
            diff = w.b(i2) - w.b(i)
            if i2 == i or diff % p or w.b(i2) in (w.b(i), w.b(i + 1)):
                continue
            if i2 < i:
                add("3<", j, i, Constraint.interval(i2, i - 1, (i, j)), p)
            else:
                add("3>", j, i, Constraint.interval(i, i2 - 1, (i, j)), p)
            break
    out = {}
    for case, groups in by_case.items():
        j0 = max(sorted(groups), key=lambda j: len(groups[j]))
        items = sorted(groups[j0], key=lambda x: x[0], reverse=case in ("1", "3>"))
        out[case] = TriangularSystem(tuple(c for _, c, _ in items), tuple(p for _, _, p in items))
    return out


# ---------------------------------------------------------------------------
# extraction from separated repetitions


@dataclass(frozen=True)
class RepetitionRoutes:
    triples: tuple[tuple[int, int, int], ...]
    q: tuple[int, ...]
    systems: dict[str, TriangularSystem]
    chosen: str | None


def layer_word(w: SignedWalk, j: int) -> tuple[tuple[int, ...], list[tuple[int, int]]]:
    """Compressed layer-j word and the walk positions covered by each letter."""
    letters = [w.p(i, j) for i in range(1, w.R + 1)]
    word = compress(letters)
    spans = []
    start = 1
    for k, (_, grp) in enumerate(itertools.groupby(letters)):
        n = len(list(grp))
        spans.append((start, start + n - 1))
        start += n
    return word, spans


def repetition_triples(w: SignedWalk, j: int, unlit: frozenset[Index] = frozenset()) -> list[tuple[int, int, int]]:
    """Separated minimal divisibility triples coming from repetitions of the layer-j word.

    Windows meeting an unlit index are discarded.
    """
    word, spans = layer_word(w, j)
    _, pairs = separated_repetitions(word)
    minimal = minimal_divisibility_triples(w)
    out = []
    for k, l in pairs:
        x, y = spans[k - 1][1], spans[l - 1][0]
        inside = [t for t in minimal if x <= t[0] and t[1] <= y]
        best = min(inside, key=lambda t: (t[1] - t[0], t[0], t[2]))
        if any((z, jj) in unlit for z in range(best[0], best[1] + 1) for jj in range(1, w.J + 1)):
            continue
        out.append(best)
    return out


def _nonzero_prime(w: SignedWalk, x: int, y: int, p: int) -> int | None:
    """A prime q with sum over x<z<y, q | d_z of d_z not divisible by p.

    The minimal-interval prime of ``d_{y-1}`` is preferred; otherwise the
    smallest valid prime is returned.
    """

    def ok(q: int) -> bool:
        return sum(w.d(z) for z in range(x + 1, y) if w.d(z) % q == 0) % p != 0

    inner = lambda q: [z for z in range(x + 1, y) if w.d(z) % q == 0]
    preferred = sorted(prime_divisors(abs(w.d(y - 1))), key=lambda q: (len(inner(q)), q))
    for q in preferred[:1] + sorted(w.primes()):
        if ok(q):
            return q
    return None


def _layer_of(w: SignedWalk, i: int, p: int) -> int:
    return next(j for j in range(1, w.J + 1) if w.p(i, j) == p)


def repetition_systems(w: SignedWalk, j: int, part: IndexPartition) -> RepetitionRoutes:
    """The three routes for separated repetitions.

    ``"fresh"``: witnesses q_i absent from all earlier windows.
    ``"inner-single"``: a single index strictly inside the window.
    ``"left-single"``: a single index at x_i, with a constraint on q_i between
    an earlier window and the current one.
    """
    triples = repetition_triples(w, j, part.unlit)
    S = part.single
    m = len(triples)
    q = []
    for x, y, p in triples:
        qi = _nonzero_prime(w, x, y, p)
        if qi is None:
            raise ValueError(f"no prime with a nonzero sum in window ({x}, {y})")
        q.append(qi)
    cons = [Constraint.interval(x + 1, y - 1, (x, _layer_of(w, x, p))) for x, y, p in triples]

    def window_rows(k: int) -> range:
        return range(triples[k][0], triples[k][1] + 1)

    fresh = [
        i for i in range(m) if all(w.d(z) % q[i] for k in range(i) for z in window_rows(k))
    ]
    systems: dict[str, TriangularSystem] = {
        "fresh": TriangularSystem(tuple(cons[i] for i in fresh), tuple(q[i] for i in fresh))
    }
    inner, inner_wit = [], []
    for i, (x, y, _) in enumerate(triples):
        hit = next(((s, t) for s, t in sorted(S) if x < s < y), None)
        if hit:
            inner.append(i)
            inner_wit.append(w.p(*hit))
    systems["inner-single"] = TriangularSystem(tuple(cons[i] for i in inner), tuple(inner_wit))
    left, left_wit = [], []
    for i, (x, y, _) in enumerate(triples):
        if i in fresh:
            continue
        hit = next(((s, t) for s, t in sorted(S) if s == x), None)
        if hit is None or w.d(x) % q[i] == 0:
            continue
        zs = [z for k in range(i) for z in window_rows(k) if w.d(z) % q[i] == 0]
        us = [u for u in range(x + 1, y) if w.d(u) % q[i] == 0]
        z, u = max(zs), min(us)
        left.append(Constraint.interval(z + 1, u - 1, (u, _layer_of(w, u, q[i]))))
        left_wit.append(w.p(*hit))
    systems["left-single"] = TriangularSystem(tuple(left), tuple(left_wit))
    need = math.ceil(m / 4)
    chosen = next((name for name, s in systems.items() if s.T >= need and s.T > 0), None)
    return RepetitionRoutes(tuple(triples), tuple(q), systems, chosen)


def repetition_hypotheses(w: SignedWalk, part: IndexPartition, L: int) -> list[str]:
    """Reasons the separated-repetition extraction may not apply (empty = all hold)."""
    from .prohibited import lit_condition_3

    problems = []
    if any(a == -b for a, b in zip(w.steps, w.steps[1:])):
        problems.append("walk backtracks")
    try:
        part.check(w)
    except ValueError as exc:
        problems.append(str(exc))
        return problems
    if not lit_condition_1(w, part.lit):
        problems.append("lit condition 1 fails")
    if not lit_condition_3(w, part, L):
        problems.append("lit condition 3 fails")
    if L < w.R:
        problems.append("L < R leaves room for long lit windows")
    if w.R >= min(w.primes()):
        problems.append("R is not below the smallest prime")
    return problems


# ---------------------------------------------------------------------------
# extraction from the interleaved pattern (concatenation with -d)


@dataclass(frozen=True)
class Interleaving:
    """Positions ``k0 < x1 < k1 < ... < xm < km <= l0 < l1 < ... < lm`` in layer j."""

    j: int
    ks: tuple[int, ...]
    xs: tuple[int, ...]
    ls: tuple[int, ...]


def interleaving_hypotheses(w: SignedWalk, part: IndexPartition, L: int, pat: Interleaving) -> list[str]:
    from .prohibited import lit_condition_3

    problems = []
    ks, xs, ls, j = pat.ks, pat.xs, pat.ls, pat.j
    m = len(xs)
    if len(ks) != m + 1 or len(ls) != m + 1 or m < 1:
        return ["need m x-positions and m+1 k- and l-positions"]
    chain = [ks[0]]
    for x, k in zip(xs, ks[1:]):
        chain += [x, k]
    if any(a >= b for a, b in zip(chain, chain[1:])) or ks[-1] > ls[0]:
        problems.append("positions out of order")
    if any(a >= b for a, b in zip(ls, ls[1:])) or ls[-1] > w.R:
        problems.append("l positions out of order")
    if problems:
        return problems
    if any(w.p(k, j) != w.p(l, j) for k, l in zip(ks, ls)):
        problems.append("p_{k_i,j} != p_{l_i,j}")
    for i in range(1, m + 1):
        px = w.p(xs[i - 1], j)
        if any(w.d(z) % px == 0 for z in range(ls[0], ls[i] + 1)):
            problems.append(f"p_x{i} divides a step in [l0, l{i}]")
        if any(w.d(z) % px == 0 for z in range(ks[0], ks[i - 1] + 1)):
            problems.append(f"p_x{i} divides a step in [k0, k{i-1}]")
        if i < m and any(w.d(z) % w.p(ks[i + 1], j) == 0 for z in range(ks[i - 1], ks[i] + 1)):
            problems.append(f"p_k{i+1} divides a step in [k{i-1}, k{i}]")
    if any(a == -b for a, b in zip(w.steps, w.steps[1:])):
        problems.append("walk backtracks")
    if not lit_condition_1(w, part.lit):
        problems.append("lit condition 1 fails")
    if not lit_condition_3(w, part, L):
        problems.append("lit condition 3 fails")
    minimal = minimal_divisibility_triples(w)
    for i in range(1, m + 1):
        a, b = ks[i - 1], ks[i]
        rows = list(range(a, b + 1)) + list(range(ls[i - 1], ls[i] + 1))
        if any((z, jj) in part.unlit for z in rows for jj in range(1, w.J + 1)):
            problems.append(f"{i} unsuitable: unlit index")
        if b - a >= L or ls[i] - ls[i - 1] >= L:
            problems.append(f"{i} unsuitable: gap at least L")
        if any(a < x and y <= b for x, y, _ in minimal):
            problems.append(f"{i} unsuitable: divisibility triple inside")
    return problems


def interleaving_systems(w: SignedWalk, part: IndexPartition, pat: Interleaving) -> dict[str, TriangularSystem]:
    """Constraints on the concatenation of d and -d, in both routes.

    ``C_i``: ``p_{k_i,j} | kappa - sum_{k0<=z<k_i} d_z + sum_{l0<z<l_i} d_z``
    with ``kappa = sum_{k0<=z<=l0} d_z``; the negated steps sit at ``R + z``.
    """
    R, j = w.R, pat.j
    ks, xs, ls = pat.ks, pat.xs, pat.ls
    m = len(xs)
    kappa = sum(w.d(z) for z in range(ks[0], ls[0] + 1))

    def con(i: int) -> Constraint:
        idx = [R + z for z in range(ks[0], ks[i])] + list(range(ls[0] + 1, ls[i]))
        return Constraint.make(idx, (ks[i], j), kappa)

    S = sorted(part.single)
    with_single = {}
    for i in range(1, m + 1):
        hit = next(((s, t) for s, t in S if ks[i - 1] <= s <= ks[i]), None)
        if hit:
            with_single[i] = hit
    systems = {}
    for parity in (0, 1):
        chosen = [i for i in sorted(with_single) if i % 2 == parity and i + 1 <= m]
        systems[f"single-{parity}"] = TriangularSystem(
            tuple(con(i + 1) for i in chosen), tuple(w.p(*with_single[i]) for i in chosen)
        )
    rest = [i for i in range(1, m + 1) if i not in with_single]
    systems["x-primes"] = TriangularSystem(tuple(con(i) for i in rest), tuple(w.p(xs[i - 1], j) for i in rest))
    return systems


def doubled(w: SignedWalk) -> SignedWalk:
    """The concatenation of ``d`` and ``-d``."""
    return w.concat(w.negated())

