"""The fourteen acceptance checks, each with its own oracle and time limit.

Every check returns a :class:`CriterionResult`; ``run_all`` drives them in
order. The test suite and the ``selftest`` subcommand both call into here.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import arith, constraints, correlations, prohibited, sieve, spectral, walks, words

EXAMPLE_WALK = (5, -4, -1, 2, -2, 4, 5, -5, -4, -1, -9, -7, 7, 8, -8, 9)
EXAMPLE_REDUCED = (5, -4, -1, -1)
NEIGHBOUR_ROWS = (
    ("XAYZYAXAY", "constant"),
    ("XAYZYAYZXAY", "variable"),
    ("YAXYZAXA", "variable"),
)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    limit: float

    @property
    def within_time(self) -> bool:
        return self.seconds <= self.limit

    @property
    def ok(self) -> bool:
        return self.passed and self.within_time

    def line(self) -> str:
        verdict = "PASS" if self.ok else "FAIL"
        return (
            f"[{verdict}] {self.number:2d} {self.name}: {self.detail} "
            f"({self.seconds:.3f}s, limit {self.limit:g}s)"
        )


def _timed(number: int, name: str, limit: float, fn: Callable[[], tuple[bool, str]]) -> CriterionResult:
    t0 = time.perf_counter()
    passed, detail = fn()
    return CriterionResult(number, name, passed, detail, time.perf_counter() - t0, limit)


def _best_of(repeats: int, fn: Callable[[], tuple[bool, str]]) -> tuple[tuple[bool, str], float]:
    """Run ``fn`` several times; keep the fastest wall time (short checks only)."""
    best = math.inf
    out = (False, "")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


# ---------------------------------------------------------------------------
# 1, 2: worked examples


def _reduced_walk() -> tuple[bool, str]:
    w = walks.SignedWalk(EXAMPLE_WALK)
    reduced = walks.reduce_walk(w)
    dec = walks.decompose_backtracking(w, allow_open=True)
    rebuilt = walks.replay(dec.reduced.steps, dec.shifts, dec.appended)
    total = sum(dec.shifts)
    ok = reduced.steps == EXAMPLE_REDUCED and tuple(rebuilt) == EXAMPLE_WALK and total == 16
    return ok, f"reduced={list(reduced.steps)} replay_ok={tuple(rebuilt) == EXAMPLE_WALK} total_shift={total}"


def criterion_1() -> CriterionResult:
    (passed, detail), secs = _best_of(5, _reduced_walk)
    return CriterionResult(1, "reduced walk vector", passed, detail, secs, 1e-3)


def _neighbour_rows() -> tuple[bool, str]:
    got = [words.neighbour_class(w, "A") for w, _ in NEIGHBOUR_ROWS]
    want = [c for _, c in NEIGHBOUR_ROWS]
    return got == want, ", ".join(f"{w}:{c}" for (w, _), c in zip(NEIGHBOUR_ROWS, got))


def criterion_2() -> CriterionResult:
    (passed, detail), secs = _best_of(5, _neighbour_rows)
    return CriterionResult(2, "neighbour table", passed, detail, secs, 1e-3)


# ---------------------------------------------------------------------------
# 3, 4, 14: spectral


TOY_LAYERS = (
    [[2], [3]],
    [[2, 3], [5]],
    [[2], [3, 5]],
    [[2, 3, 5]],
    [[2, 3, 5], [7]],
    [[2], [3], [5]],
)


def random_toy_graph(rng: random.Random) -> spectral.CorrelationGraph:
    layers = rng.choice(TOY_LAYERS)
    shifts = arith.shift_set_from_lists(layers)
    N = rng.randint(min(max(shifts.elements) + 2, 60), 60)
    lo = rng.randint(0, 40)
    variant = rng.choice(spectral.VARIANTS)
    cutoff = sieve.smooth_cutoff(rng.choice([1, 2, 3]))
    yb = None
    if variant == "G":
        yb = prohibited.y_filter(lo, lo + N, shifts, 3)
    return spectral.build_graph(variant, lo, lo + N, shifts, cutoff=cutoff, ybitmap=yb)


def _trace_walks(seed: int = 0, graphs: int = 50) -> tuple[bool, str]:
    rng = random.Random(seed)
    mismatches = 0
    for _ in range(graphs):
        g = random_toy_graph(rng)
        for R in (2, 4, 6):
            if spectral.trace_power_walks(g, R) != spectral.dense_trace_power(g, R):
                mismatches += 1
    return mismatches == 0, f"{graphs} graphs x R in (2,4,6), {mismatches} mismatches"


def criterion_3() -> CriterionResult:
    return _timed(3, "trace-walk identity", 30, _trace_walks)


def random_symmetric(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.normal(size=(n, n))
    return (a + a.T) / 2


def _interlacing(seed: int = 0, count: int = 200) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    failures = 0
    for _ in range(count):
        n = int(rng.integers(1, 13))
        a = random_symmetric(rng, n)
        m = spectral.BandedHermitianMatrix.from_dense(a)
        keep = [k for k in range(n) if rng.random() < 0.6]
        ok, viol = spectral.interlacing_verify(m, keep)
        failures += not ok
        worst = max(worst, viol)
    return failures == 0, f"{count} matrices, {failures} failures, max violation {worst:.2e}"


def criterion_4() -> CriterionResult:
    return _timed(4, "Cauchy interlacing", 10, _interlacing)


def localisation_instances(rng: np.random.Generator) -> list[tuple[np.ndarray, int, float, float]]:
    """(matrix, H, alpha, eps) covering both outcomes."""
    out = []
    N, H, eps = 120, 2, 0.5
    out.append((np.zeros((N, N)), H, 1.0, eps))
    a = np.zeros((N, N))
    a[10, 11] = a[11, 10] = 4.0
    out.append((a, H, 1.0, eps))
    t = np.zeros((N, N))
    for i in range(N - 1):
        t[i, i + 1] = t[i + 1, i] = 2.0
    out.append((t, 1, 1.0, eps))
    for _ in range(6):
        H = int(rng.integers(1, 4))
        n = int(10 * H / eps**2) + int(rng.integers(0, 40))
        b = np.zeros((n, n))
        for k in range(1, H + 1):
            v = rng.normal(scale=float(rng.choice([0.1, 1.0])), size=n - k)
            b += np.diag(v, k) + np.diag(v, -k)
        b += np.diag(rng.normal(scale=0.2, size=n))
        out.append((b, H, 1.0, eps))
    return out


def _localisation(seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    cases = {1: 0, 2: 0}
    bad = []
    for idx, (a, H, alpha, eps) in enumerate(localisation_instances(rng)):
        m = spectral.BandedHermitianMatrix.from_dense(a, 1, H)
        R = 2 * int(rng.integers(1, 4))
        res = spectral.localize_eigenvalues(m, alpha, eps, R=R)
        cases[res.case] += 1
        if res.case == 1:
            rest = [k for k in m.labels if k not in res.removed]
            spec = spectral.eigen_spectrum(spectral.BandedHermitianMatrix.from_dense(m.restrict(rest))) if rest else []
            if len(spec) and float(np.max(np.abs(spec))) > alpha + 1e-9:
                bad.append(idx)
        else:
            exact = np.trace(np.linalg.matrix_power(a, R))
            if exact < res.trace_lower_bound:
                bad.append(idx)
    return not bad and cases[1] > 0 and cases[2] > 0, f"case1={cases[1]} case2={cases[2]} failures={bad}"


def criterion_14() -> CriterionResult:
    return _timed(14, "localize_eigenvalues", 30, _localisation)


# ---------------------------------------------------------------------------
# 5, 6, 9: sieve


SIEVE_PRIMES = (2, 3, 5, 7, 11)


def random_progressions(rng: random.Random, count: int) -> list[sieve.Progression]:
    out = []
    for _ in range(count):
        k = rng.randint(1, 2)
        q = math.prod(rng.sample(SIEVE_PRIMES, k))
        out.append(sieve.Progression(q, rng.randrange(q)))
    return out


def random_upset(rng: random.Random, closure: frozenset[sieve.Progression]) -> set[sieve.Progression]:
    """Z plus everything containing a few random members of the closure."""
    seeds = [P for P in sorted(closure) if rng.random() < 0.3]
    return {Q for Q in closure if Q == sieve.INTEGERS or any(Q.contains_progression(P) for P in seeds)}


def _combinatorial_sieve(seed: int = 0, families: int = 500, points: int = 20) -> tuple[bool, str]:
    rng = random.Random(seed)
    violations = coeff_bad = exact_bad = 0
    checked = 0
    for _ in range(families):
        Y = random_progressions(rng, rng.randint(1, 5))
        closure = sieve.sieve_expansion(Y, lambda P: True).closure
        X = random_upset(rng, closure)
        exp = sieve.sieve_expansion(Y, X)
        for P, c in exp.coefficients.items():
            if abs(c) > 2 ** arith.omega(P.modulus):
                coeff_bad += 1
        period = math.lcm(*(P.modulus for P in Y))
        for _ in range(points):
            n = rng.randrange(-period, 2 * period)
            lhs, main, bound = sieve.sieve_identity_check(Y, exp, n)
            violations += abs(lhs - main) > bound
            checked += 1
        full = sieve.sieve_expansion(Y, closure)
        if full.boundary:
            exact_bad += 1
        for n in range(period):
            lhs, main, _ = sieve.sieve_identity_check(Y, full, n)
            exact_bad += lhs != main
    ok = violations == coeff_bad == exact_bad == 0
    return ok, f"{checked} points, {violations} remainder violations, {coeff_bad} coefficient violations, {exact_bad} exact-case errors"


def criterion_5() -> CriterionResult:
    return _timed(5, "combinatorial sieve", 60, _combinatorial_sieve)


def _rota() -> tuple[bool, str]:
    worst = 0
    bad = 0
    mismatch = 0
    total = 0
    for size in range(0, 5):
        omega_set = tuple(range(size))
        subsets = [frozenset(c) for r in range(size + 1) for c in itertools.combinations(omega_set, r)]
        for mask in range(1 << len(subsets)):
            fam = [subsets[k] for k in range(len(subsets)) if mask >> k & 1]
            val = sieve.rota_sum(omega_set, fam)
            total += 1
            worst = max(worst, abs(val))
            bad += abs(val) > 2**size
            if size <= 3 and val != sieve.rota_sum_direct(omega_set, fam):
                mismatch += 1
    return bad == 0 and mismatch == 0, f"{total} families, max |sum| {worst}, {bad} bound violations, {mismatch} route mismatches"


def criterion_6() -> CriterionResult:
    return _timed(6, "Rota bound", 60, _rota)


KUBILIUS_POOL = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97)


def _group_count(primes: list[int], X: set[tuple[int, int]], b: list[int]) -> int:
    """Residues n mod prod(primes) whose divisibility pattern matches X on these primes."""
    q = math.prod(primes)
    n = np.arange(q, dtype=np.int64)
    ok = np.ones(q, dtype=bool)
    for p in primes:
        for i, bi in enumerate(b, start=1):
            hit = (n + bi) % p == 0
            ok &= hit if (p, i) in X else ~hit
    return int(ok.sum())


def _split(primes: list[int]) -> tuple[list[int], list[int]]:
    a, c = [], []
    for p in sorted(primes, reverse=True):
        (a if math.prod(a) <= math.prod(c) else c).append(p)
    return a, c


def _kubilius(seed: int = 0, count: int = 100) -> tuple[bool, str]:
    rng = random.Random(seed)
    bad = 0
    biggest = 0
    for _ in range(count):
        while True:
            ps = sorted(rng.sample(KUBILIUS_POOL, rng.randint(1, 6)))
            if math.prod(ps) <= 10**9:
                break
        b = [rng.randint(0, 60) for _ in range(rng.randint(1, 4))]
        if rng.random() < 0.7:
            n0 = rng.randrange(10**6)
            X = {(p, i) for p in ps for i, bi in enumerate(b, start=1) if (n0 + bi) % p == 0}
        else:
            X = {(rng.choice(ps), rng.randint(1, len(b))) for _ in range(rng.randint(0, 3))}
        period = math.prod(ps)
        biggest = max(biggest, period)
        dens = sieve.kubilius_density(X, b, ps)
        g1, g2 = _split(ps)
        count_direct = _group_count(g1, X, b) * _group_count(g2, X, b)
        if dens * period != count_direct:
            bad += 1
    return bad == 0, f"{count} instances, largest period {biggest}, {bad} mismatches"


def criterion_9() -> CriterionResult:
    return _timed(9, "Kubilius exact density", 30, _kubilius)


# ---------------------------------------------------------------------------
# 7, 8, 13: arithmetic and correlations


CORRELATION_POOL = (2, 3, 5, 7, 11, 13, 17, 19, 23)


def random_layers(rng: random.Random, J: int) -> list[list[int]]:
    pool = list(CORRELATION_POOL)
    rng.shuffle(pool)
    out = []
    for _ in range(J):
        k = rng.randint(1, 2)
        out.append(sorted(pool[:k]))
        pool = pool[k:]
    return out


def _expansion(seed: int = 0, profiles: int = 20) -> tuple[bool, str]:
    rng = random.Random(seed)
    table = arith.liouville_sieve(1, 10**4 + 23**3 * 2)
    bad = 0
    for _ in range(profiles):
        shifts = arith.shift_set_from_lists(random_layers(rng, rng.randint(1, 3)))
        hi = rng.randint(100, 10**4)
        lo = rng.randint(0, hi - 1)
        s1 = correlations.s1_sum(lo, hi, shifts, table).value
        s2 = correlations.s2_sum(lo, hi, shifts, table).value
        terms = correlations.expansion_terms(lo, hi, shifts, table)
        if s2 - s1 != sum(terms.values(), Fraction(0)):
            bad += 1
    return bad == 0, f"{profiles} profiles, {bad} mismatches"


def criterion_7() -> CriterionResult:
    return _timed(7, "S2 - S1 expansion", 60, _expansion)


def _rescaling(seed: int = 0, tuples: int = 10) -> tuple[bool, str]:
    rng = random.Random(seed)
    table = arith.liouville_sieve(1, 10**6 + 10**3 + 1)
    bad = 0
    seen = []
    while len(seen) < tuples:
        J = rng.randint(1, 3)
        ps = rng.sample([p for p in CORRELATION_POOL + (29, 31, 37)], J)
        d = math.prod(ps)
        if d > 10**3:
            continue
        x = rng.randint(1, 10**3)
        seen.append((x, d))
        if correlations.rescaled_log_sum(x, d, table) != correlations.log_chowla_exact(x, table):
            bad += 1
    return bad == 0, f"tuples {seen}, {bad} mismatches"


def criterion_8() -> CriterionResult:
    return _timed(8, "multiplicative rescaling", 30, _rescaling)


def liouville_by_trial_division(hi: int) -> np.ndarray:
    """lambda(n) for 1 <= n <= hi by dividing out each prime up to sqrt(hi), vectorised."""
    rem = np.arange(1, hi + 1, dtype=np.int64)
    cnt = np.zeros(hi, dtype=np.int64)
    for p in range(2, math.isqrt(hi) + 1):
        if any(p % q == 0 for q in range(2, math.isqrt(p) + 1)):
            continue
        active = np.nonzero(rem % p == 0)[0]
        while len(active):
            rem[active] //= p
            cnt[active] += 1
            active = active[rem[active] % p == 0]
    cnt += rem > 1
    return (1 - 2 * (cnt & 1)).astype(np.int8)


def _liouville() -> tuple[bool, str]:
    hi = 10**6
    sieved = arith.liouville_sieve(1, hi).values
    trial = liouville_by_trial_division(hi)
    diff = int(np.sum(sieved != trial))
    s100 = int(sieved[:100].astype(np.int64).sum())
    return diff == 0 and s100 == -2, f"n <= {hi}: {diff} disagreements, sum to 100 = {s100}"


def criterion_13() -> CriterionResult:
    return _timed(13, "Liouville oracle agreement", 30, _liouville)


# ---------------------------------------------------------------------------
# 10: prohibited pipeline


Y_FILTER_CASES = (
    ([[2, 3, 5], [7]], 4, 10**5),
    ([[2, 3], [5]], 4, 10**5),
    ([[2], [3, 5]], 3, 10**5),
    ([[3], [5], [7]], 4, 10**5),
    ([[2, 3], [5, 7]], 4, 10**5),
    ([[11, 13], [17, 19]], 4, 10**5),
)


def _prohibited() -> tuple[bool, str]:
    ok, cert = prohibited.check_prohibited((35, 14, 21), 3)
    prim = prohibited.check_primitive((35, 14, 21), 3)
    prog = prohibited.to_progression((35, 14, 21))
    head = ok and cert.p == 5 and cert.ell0 == 2 and prim and (prog.residue, prog.modulus) == (35, 210)
    mism = 0
    for layers, L, hi in Y_FILTER_CASES:
        shifts = arith.shift_set_from_lists(layers)
        if not np.array_equal(prohibited.y_filter(0, hi, shifts, L), prohibited.y_filter_direct(0, hi, shifts, L)):
            mism += 1
    return head and mism == 0, (
        f"(35,14,21): prohibited={ok} p={cert.p} ell0={cert.ell0} primitive={prim} "
        f"progression={prog.residue} mod {prog.modulus}; y_filter mismatches {mism}/{len(Y_FILTER_CASES)}"
    )


def criterion_10() -> CriterionResult:
    return _timed(10, "prohibited pipeline", 60, _prohibited)


# ---------------------------------------------------------------------------
# 11: triangular systems


def definitional_status(steps: tuple[int, ...], factors: tuple[tuple[int, ...], ...], I: tuple[int, ...], pivot: tuple[int, int], kappa: int, p: int) -> str:
    """Absent / involved / neither straight from the definitions, on raw tuples."""
    q = factors[pivot[0] - 1][pivot[1] - 1]
    ds = [steps[i - 1] for i in I]
    if p != q and all(d % p != 0 for d in ds):
        return "absent"
    with_p = sum(d for d in ds if d % p == 0)
    without_p = sum(d for d in ds if d % p != 0)
    c1 = kappa == 0 and sum(ds) == 0 and with_p != 0
    c2 = kappa == 0 and p == q and without_p != 0
    c3 = p != q and with_p % q != 0
    return "involved" if (c1 or c2 or c3) else "neither"


def constrained_walk(rng: random.Random, shifts: arith.ShiftSet, R: int) -> walks.SignedWalk | None:
    """Random non-backtracking walk whose repeated primes satisfy p | b_i - b_i0."""
    steps: list[int] = []
    b = [0]
    while len(steps) < R:
        cands = []
        for d in shifts.signed:
            if steps and d == -steps[-1]:
                continue
            if all(
                not (s % p == 0 and (b[-1] - b[i0]) % p)
                for p in shifts.factor_tuple(d)
                for i0, s in enumerate(steps)
            ):
                cands.append(d)
        if not cands:
            return None
        d = rng.choice(cands)
        steps.append(d)
        b.append(b[-1] + d)
    return walks.build_walk(steps, shifts)


def _triangular(seed: int = 0) -> tuple[bool, str]:
    rng = random.Random(seed)
    D = arith.shift_set_from_lists([[11, 13, 17], [19, 23]])
    bad_total = bad_ok = 0
    for _ in range(1500):
        w = walks.build_walk([rng.choice(D.signed) for _ in range(rng.randint(2, 8))], D)
        for s in constraints.bad_single_systems(w).values():
            bad_total += 1
            bad_ok += constraints.verify_triangular(w, s)[0]
    rep_total = rep_ok = 0
    for _ in range(3000):
        w = constrained_walk(rng, D, rng.randint(4, 10))
        if w is None:
            continue
        S = walks.single_indices(w)
        part = walks.IndexPartition(S, frozenset(set(w.indices()) - S), frozenset())
        if constraints.repetition_hypotheses(w, part, w.R):
            continue
        for j in range(1, w.J + 1):
            if not constraints.repetition_triples(w, j):
                continue
            r = constraints.repetition_systems(w, j, part)
            if r.chosen is None:
                continue
            rep_total += 1
            rep_ok += constraints.verify_triangular(w, r.systems[r.chosen])[0]
    # exhaustive classification scan
    D6 = arith.shift_set_from_lists([[11, 13, 17], [19, 23]])
    disagreements = scanned = 0
    for R in range(1, 4):
        subsets = [tuple(c) for r in range(R + 1) for c in itertools.combinations(range(1, R + 1), r)]
        for steps in itertools.product(D6.signed, repeat=R):
            w = walks.build_walk(steps, D6)
            primes = sorted(w.primes())
            for I in subsets:
                for pivot in itertools.product(range(1, R + 1), range(1, w.J + 1)):
                    con = constraints.Constraint.make(I, pivot, 0)
                    for p in primes:
                        got = constraints.prime_status(w, con, p)
                        got = got if isinstance(got, str) else got[0]
                        want = definitional_status(w.steps, w.factors, I, pivot, 0, p)
                        scanned += 1
                        disagreements += got != want
    ok = bad_ok == bad_total > 0 and rep_ok == rep_total > 0 and disagreements == 0
    return ok, (
        f"bad-single {bad_ok}/{bad_total}, separated-repetition {rep_ok}/{rep_total}, "
        f"classification {scanned} checks with {disagreements} disagreements"
    )


def criterion_11() -> CriterionResult:
    return _timed(11, "triangular systems", 120, _triangular)


# ---------------------------------------------------------------------------
# 12: words


def max_separated_dp(w: tuple) -> int:
    """Exact maximum by dynamic programming over suffixes."""
    n = len(w)
    f = [0] * (n + 2)
    for i in range(n - 1, -1, -1):
        f[i] = f[i + 1]
        nxt = next((l for l in range(i + 1, n) if w[l] == w[i]), None)
        if nxt is not None:
            f[i] = max(f[i], 1 + f[nxt + 1])
    return f[0]


def random_word(rng: random.Random, n: int, k: int) -> list[int]:
    w = [rng.randrange(k)]
    while len(w) < n:
        a = rng.randrange(k)
        if a != w[-1]:
            w.append(a)
    return w


def _words(seed: int = 0) -> tuple[bool, str]:
    rep_bad = rep_n = 0
    for n in range(1, 15):
        for w in words.canonical_words(n, 4):
            rep_n += 1
            rep_bad += words.separated_repetitions(w)[0] != max_separated_dp(w)
    rec_bad = rec_n = 0
    for n in range(1, 13):
        for w in words.canonical_words(n, 5):
            anchors = words.anchor_letters(w)
            got = words.reconstruct_positions(n, [sorted(words.positions(w, a)) for a in sorted(anchors)])
            rec_n += 1
            rec_bad += got != words.position_partition(w)
    rng = random.Random(seed)
    struct_bad = done = 0
    while done < 500:
        w = random_word(rng, rng.randint(10, 200), rng.randint(3, 8))
        t = rng.randint(1, 5)
        if words.is_t_predictable(w, t)[0]:
            continue
        done += 1
        s = words.unpredictable_structure(w, t)
        struct_bad += not words.verify_structure(w, t, s)[0]
    ok = rep_bad == rec_bad == struct_bad == 0
    return ok, (
        f"repetitions {rep_n} words/{rep_bad} bad, reconstruction {rec_n} words/{rec_bad} bad, "
        f"structures {done}/{struct_bad} bad"
    )


def criterion_12() -> CriterionResult:
    return _timed(12, "words suite", 120, _words)


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
    12: criterion_12,
    13: criterion_13,
    14: criterion_14,
}


def run_all(which: list[int] | None = None, echo: Callable[[str], None] | None = None) -> list[CriterionResult]:
    out = []
    for k in which or sorted(CRITERIA):
        res = CRITERIA[k]()
        if echo:
            echo(res.line())
        out.append(res)
    return out
