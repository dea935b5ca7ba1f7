"""Correlation graphs G0, G1, G with exact weights, the closed-walk trace,
a hand-written symmetric eigensolver, Cauchy interlacing and block
localisation of large eigenvalues.

Vertex ranges follow the rest of the package: ``(lo, hi]``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .arith import PrimeLayers, ResourceError, ShiftSet
from .sieve import Progression, SmoothCutoff, kubilius_density, local_count
from .walks import Index, SignedWalk

MAX_DIMENSION = 4096
WALK_GUARD = 10**7
EXPECTATION_GUARD = 10**6
CUTOFF_PRECISION = 10**12

VARIANTS = ("G0", "G1", "G")


# ---------------------------------------------------------------------------
# banded symmetric matrices


@dataclass(frozen=True)
class BandedHermitianMatrix:
    """Real symmetric matrix indexed by ``index_lo..index_hi`` with bandwidth H.

    ``bands[k, i]`` holds ``a[i + k, i]`` (0-based positions), so only the
    lower triangle inside the band is stored.
    """

    index_lo: int
    H: int
    bands: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.H < 0:
            raise ValueError("bandwidth must be non-negative")
        if self.bands.ndim != 2 or self.bands.shape[0] != self.H + 1:
            raise ValueError("bands must have shape (H + 1, N)")
        n = self.bands.shape[1]
        for k in range(1, self.H + 1):
            if np.any(self.bands[k, max(0, n - k) :] != 0):
                raise ValueError("band storage has entries outside the matrix")

    @property
    def N(self) -> int:
        return self.bands.shape[1]

    @property
    def index_hi(self) -> int:
        return self.index_lo + self.N - 1

    @property
    def labels(self) -> range:
        return range(self.index_lo, self.index_hi + 1)

    @classmethod
    def from_dense(cls, a: np.ndarray | Sequence[Sequence[float]], index_lo: int = 0, H: int | None = None) -> "BandedHermitianMatrix":
        a = np.asarray(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        if not np.array_equal(a, a.T):
            raise ValueError("matrix must be symmetric")
        n = a.shape[0]
        nz = np.nonzero(a)
        width = int(np.max(np.abs(nz[0] - nz[1]))) if len(nz[0]) else 0
        if H is None:
            H = width
        elif width > H:
            raise ValueError(f"entry at distance {width} exceeds bandwidth {H}")
        bands = np.zeros((H + 1, n), dtype=a.dtype)
        for k in range(min(H, n - 1) + 1):
            bands[k, : n - k] = np.diagonal(a, -k)
        return cls(index_lo, H, bands)

    def dense(self) -> np.ndarray:
        n = self.N
        a = np.zeros((n, n), dtype=self.bands.dtype)
        for k in range(min(self.H, n - 1) + 1):
            idx = np.arange(n - k)
            a[idx + k, idx] = self.bands[k, : n - k]
            a[idx, idx + k] = self.bands[k, : n - k]
        return a

    def dense_float(self) -> np.ndarray:
        return self.dense().astype(np.float64)

    def positions(self, keep: Iterable[int]) -> list[int]:
        """0-based positions of the labels in ``keep``, sorted."""
        out = sorted({int(k) - self.index_lo for k in keep})
        if out and (out[0] < 0 or out[-1] >= self.N):
            raise ValueError("keep set leaves the index range")
        return out

    def restrict(self, keep: Iterable[int]) -> np.ndarray:
        """Dense float principal submatrix on the labels in ``keep``."""
        pos = self.positions(keep)
        return self.dense_float()[np.ix_(pos, pos)]


# ---------------------------------------------------------------------------
# eigensolver: Householder tridiagonalisation and implicit-shift QL


def tridiagonalize(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and sub-diagonal of a tridiagonal matrix similar to ``a``.

    The sub-diagonal is returned with a trailing zero so both arrays have
    length n.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    e = np.zeros(n)
    for k in range(n - 2):
        x = a[k + 1 :, k].copy()
        sigma = np.linalg.norm(x)
        if sigma == 0.0:
            e[k] = 0.0
            continue
        alpha = -math.copysign(sigma, x[0])
        v = x
        v[0] -= alpha
        vn = np.linalg.norm(v)
        if vn == 0.0:
            e[k] = x[0]
            continue
        v /= vn
        sub = a[k + 1 :, k + 1 :]
        p = sub @ v
        q = p - (v @ p) * v
        sub -= 2.0 * (np.outer(v, q) + np.outer(q, v))
        e[k] = alpha
    if n >= 2:
        e[n - 2] = a[n - 1, n - 2]
    return np.diagonal(a).copy(), e


def tridiagonal_eigenvalues(d: np.ndarray, e: np.ndarray, max_iter: int = 60) -> np.ndarray:
    """Eigenvalues of the symmetric tridiagonal matrix by implicit QL sweeps."""
    d = [float(x) for x in d]
    e = [float(x) for x in e]
    n = len(d)
    tiny = np.finfo(np.float64).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= tiny * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise ArithmeticError("QL iteration did not converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            restart = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    restart = True
                    break
                s, c = f / r, g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if restart:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.array(d)


def symmetric_eigenvalues(a: np.ndarray) -> np.ndarray:
    """Eigenvalues of a dense real symmetric matrix, sorted descending."""
    a = np.asarray(a, dtype=np.float64)
    if a.shape[0] > MAX_DIMENSION:
        raise ResourceError(f"dimension {a.shape[0]} exceeds {MAX_DIMENSION}")
    if a.shape[0] == 0:
        return np.zeros(0)
    d, e = tridiagonalize(a)
    return np.sort(tridiagonal_eigenvalues(d, e))[::-1]


def eigen_spectrum(m: BandedHermitianMatrix) -> np.ndarray:
    """Eigenvalues of ``m`` sorted descending."""
    if m.N > MAX_DIMENSION:
        raise ResourceError(f"dimension {m.N} exceeds {MAX_DIMENSION}")
    return symmetric_eigenvalues(m.dense_float())


def interlacing_verify(m: BandedHermitianMatrix, keep: Iterable[int]) -> tuple[bool, float]:
    """Check alpha_j >= beta_j >= alpha_{j+r} for the principal submatrix on ``keep``.

    Returns ``(ok, max_violation)`` with tolerance ``1e-8 * ||A||`` (spectral norm).
    """
    pos = m.positions(keep)
    full = m.dense_float()
    alpha = symmetric_eigenvalues(full)
    beta = symmetric_eigenvalues(full[np.ix_(pos, pos)])
    r = m.N - len(pos)
    norm = float(np.max(np.abs(alpha))) if len(alpha) else 0.0
    tol = 1e-8 * norm
    worst = 0.0
    for j, bj in enumerate(beta):
        worst = max(worst, bj - alpha[j], alpha[j + r] - bj)
    return worst <= tol, max(worst, 0.0)


# ---------------------------------------------------------------------------
# block localisation


@dataclass(frozen=True)
class Localization:
    case: int
    blocks: tuple[tuple[int, int], ...]  # B_i as inclusive label intervals
    separators: tuple[tuple[int, int], ...]  # E_i
    exceeding: tuple[int, ...]  # block indices with an eigenvalue above alpha
    removed: frozenset[int] | None = None  # case 1
    residual_max: float | None = None  # case 1: max |eigenvalue| off E
    R: int | None = None  # case 2
    trace_lower_bound: float | None = None  # case 2


def block_layout(lo: int, N: int, H: int, eps: float) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Consecutive intervals B_0, E_0, ..., E_{q-1}, B_q starting at label ``lo``."""
    b = math.floor(1 / eps) * H
    q = N // (b + H)
    blocks, seps = [], []
    start = lo
    for _ in range(q):
        blocks.append((start, start + b - 1))
        seps.append((start + b, start + b + H - 1))
        start += b + H
    blocks.append((start, lo + N - 1))
    return blocks, seps


def localize_eigenvalues(
    m: BandedHermitianMatrix, alpha: float, eps: float, R: int = 2
) -> Localization:
    """Either a small removed set E leaving all eigenvalues within alpha, or a trace lower bound.

    Case 1 is re-verified on the complement of E with the eigensolver.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if R < 2 or R % 2:
        raise ValueError("R must be an even integer >= 2")
    H = max(m.H, 1)
    N = m.N
    if N < 10 * H / eps**2:
        raise ValueError(f"need N >= 10H/eps^2 = {10 * H / eps**2:g}, got N = {N}")
    blocks, seps = block_layout(m.index_lo, N, H, eps)
    full = m.dense_float()
    exceeding = []
    count = 0
    for i, (a, b) in enumerate(blocks):
        if b < a:
            continue
        sub = full[a - m.index_lo : b - m.index_lo + 1, a - m.index_lo : b - m.index_lo + 1]
        spec = symmetric_eigenvalues(sub)
        big = int(np.sum(np.abs(spec) > alpha))
        if big:
            exceeding.append(i)
            count += big
    if len(exceeding) <= eps**2 * N / H:
        removed = set()
        for a, b in seps:
            removed.update(range(a, b + 1))
        for i in exceeding:
            a, b = blocks[i]
            removed.update(range(a, b + 1))
        rest = [k for k in m.labels if k not in removed]
        spec = symmetric_eigenvalues(m.restrict(rest)) if rest else np.zeros(0)
        worst = float(np.max(np.abs(spec))) if len(spec) else 0.0
        if worst > alpha * (1 + 1e-9):
            raise ArithmeticError("case 1 certificate failed spectral re-verification")
        return Localization(1, tuple(blocks), tuple(seps), tuple(exceeding), frozenset(removed), worst)
    bound = eps**2 / H * alpha**R * N
    return Localization(2, tuple(blocks), tuple(seps), tuple(exceeding), R=R, trace_lower_bound=bound)


# ---------------------------------------------------------------------------
# correlation graphs


def _round_rational(x: float) -> Fraction:
    return Fraction(round(x * CUTOFF_PRECISION), CUTOFF_PRECISION)


@dataclass(frozen=True)
class CorrelationGraph:
    """Weighted graph on ``(lo, hi]`` with edges at distances in D.

    ``vertex_factor[k]`` is the rounded ``W(omega_P(n))^(1/2) 1_Y(n)`` for
    ``n = lo + 1 + k`` (identically 1 for G0).
    """

    variant: str
    lo: int
    hi: int
    shifts: ShiftSet = field(repr=False)
    vertex_factor: tuple[Fraction, ...] = field(repr=False)
    in_y: tuple[bool, ...] | None = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return self.hi - self.lo

    @property
    def H(self) -> int:
        return max(self.shifts.elements)

    def contains(self, n: int) -> bool:
        return self.lo < n <= self.hi

    def balanced(self, d: int, n: int) -> Fraction:
        """prod over p | d of (1_{p | n} - 1/p)."""
        out = Fraction(1)
        for p in self.shifts.factor_tuple(d):
            out *= (1 if n % p == 0 else 0) - Fraction(1, p)
        return out

    def w(self, m: int, n: int) -> Fraction:
        if not (self.contains(m) and self.contains(n)):
            return Fraction(0)
        d = abs(m - n)
        if d not in self.shifts:
            return Fraction(0)
        f = self.vertex_factor
        return self.balanced(d, n) * f[m - self.lo - 1] * f[n - self.lo - 1]

    def edges(self) -> Iterable[tuple[int, int, Fraction]]:
        """Ordered pairs (m, n) with a possibly non-zero weight."""
        for m in range(self.lo + 1, self.hi + 1):
            for d in self.shifts.signed:
                if self.contains(m + d):
                    yield m, m + d, self.w(m, m + d)

    def dense_fraction(self) -> list[list[Fraction]]:
        a = [[Fraction(0)] * self.N for _ in range(self.N)]
        for m, n, v in self.edges():
            a[m - self.lo - 1][n - self.lo - 1] = v
        return a

    def banded(self) -> BandedHermitianMatrix:
        a = np.array([[float(x) for x in row] for row in self.dense_fraction()], dtype=np.float64)
        return BandedHermitianMatrix.from_dense(a, self.lo + 1, self.H)

    def integer_weights(self) -> tuple[int, dict[int, list[int]]]:
        """Common denominator Q and, per signed shift d, ``Q * w(v, v + d)`` by position."""
        raw = {d: [Fraction(0)] * self.N for d in self.shifts.signed}
        for m, n, v in self.edges():
            raw[n - m][m - self.lo - 1] = v
        Q = 1
        for vec in raw.values():
            for v in vec:
                Q = math.lcm(Q, v.denominator)
        return Q, {d: [int(v * Q) for v in vec] for d, vec in raw.items()}


def build_graph(
    variant: str,
    lo: int,
    hi: int,
    shifts: ShiftSet,
    layers: PrimeLayers | None = None,
    cutoff: SmoothCutoff | Callable[[float], float] | None = None,
    ybitmap: Sequence[bool] | np.ndarray | None = None,
) -> CorrelationGraph:
    """G0 (balanced weights), G1 (with the smooth cutoff) or G (cutoff and Y).

    ``layers`` defaults to the layers of ``shifts`` and is used for omega_P.
    ``ybitmap[k]`` says whether ``lo + 1 + k`` lies in Y.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if hi <= lo or lo < 0:
        raise ValueError("need 0 <= lo < hi")
    if len(shifts) == 0:
        raise ValueError("shift set is empty")
    layers = shifts.layers if layers is None else layers
    N = hi - lo
    if variant == "G0":
        return CorrelationGraph(variant, lo, hi, shifts, (Fraction(1),) * N)
    if cutoff is None:
        raise ValueError(f"{variant} needs a cutoff")
    in_y = None
    if variant == "G":
        if ybitmap is None:
            raise ValueError("G needs a Y bitmap")
        in_y = tuple(bool(x) for x in ybitmap)
        if len(in_y) != N:
            raise ValueError(f"Y bitmap has length {len(in_y)}, expected {N}")
    primes = sorted(layers.primes)
    cache: dict[int, Fraction] = {}
    factors = []
    for k, n in enumerate(range(lo + 1, hi + 1)):
        om = sum(1 for p in primes if n % p == 0)
        if om not in cache:
            cache[om] = _round_rational(math.sqrt(max(0.0, float(cutoff(om)))))
        v = cache[om]
        if in_y is not None and not in_y[k]:
            v = Fraction(0)
        factors.append(v)
    return CorrelationGraph(variant, lo, hi, shifts, tuple(factors), in_y)


def l1_distance(g1: CorrelationGraph, g2: CorrelationGraph) -> Fraction:
    """sum over ordered pairs of |w1(m, n) - w2(m, n)|."""
    if (g1.lo, g1.hi) != (g2.lo, g2.hi):
        raise ValueError("graphs live on different ranges")
    ds = set(g1.shifts.signed) | set(g2.shifts.signed)
    total = Fraction(0)
    for m in range(g1.lo + 1, g1.hi + 1):
        for d in ds:
            if g1.contains(m + d):
                total += abs(g1.w(m, m + d) - g2.w(m, m + d))
    return total


def l1_support(g1: CorrelationGraph, g2: CorrelationGraph) -> set[int]:
    """Vertices touching an edge on which the two weights differ."""
    out = set()
    ds = set(g1.shifts.signed) | set(g2.shifts.signed)
    for m in range(g1.lo + 1, g1.hi + 1):
        for d in ds:
            if g1.contains(m + d) and g1.w(m, m + d) != g2.w(m, m + d):
                out.update((m, m + d))
    return out


# ---------------------------------------------------------------------------
# traces


def trace_power_walks(g: CorrelationGraph, R: int) -> Fraction:
    """Tr(Ad^R) as the total weight of closed walks with steps in plus-minus D.

    For each closed step sequence the start vertex is summed out; shared
    prefixes carry their partial products so the search visits every prefix
    once.
    """
    if R < 1:
        raise ValueError("R must be positive")
    steps = g.shifts.signed
    if len(steps) ** R > WALK_GUARD:
        raise ResourceError(f"{len(steps)}^{R} step sequences exceed the guard {WALK_GUARD}")
    Q, weights = g.integer_weights()
    N = g.N
    top = max(g.shifts.elements)
    shifted_cache: dict[tuple[int, int], np.ndarray] = {}

    def shifted(d: int, b: int) -> np.ndarray:
        # start position s picks up Q * w(s + b, s + b + d)
        key = (d, b)
        if key not in shifted_cache:
            vec = np.zeros(N, dtype=object)
            src = weights[d]
            for s in range(max(0, -b), min(N, N - b)):
                vec[s] = src[s + b]
            shifted_cache[key] = vec
        return shifted_cache[key]

    total = 0

    def grow(depth: int, b: int, prod: np.ndarray) -> None:
        nonlocal total
        if depth == R:
            if b == 0:
                total += int(sum(prod))
            return
        left = R - depth - 1
        for d in steps:
            nb = b + d
            if abs(nb) > left * top or abs(nb) >= N:
                continue
            nxt = prod * shifted(d, b)
            if not any(nxt):
                continue
            grow(depth + 1, nb, nxt)

    grow(0, 0, np.ones(N, dtype=object))
    return Fraction(total, Q**R)


def dense_trace_power(g: CorrelationGraph, R: int) -> Fraction:
    """Tr(Ad^R) by exact integer matrix powers (oracle for the walk sum)."""
    if R < 1:
        raise ValueError("R must be positive")
    Q, weights = g.integer_weights()
    N = g.N
    a = np.zeros((N, N), dtype=object)
    for d, vec in weights.items():
        for s, v in enumerate(vec):
            if v:
                a[s, s + d] = v
    result = None
    base = a
    e = R
    while e:
        if e & 1:
            result = base if result is None else result.dot(base)
        e >>= 1
        if e:
            base = base.dot(base)
    return Fraction(int(np.trace(result)), Q**R)


def quadratic_form(g: CorrelationGraph, values: Sequence[int]) -> Fraction:
    """<v, Ad v> for ``values[k]`` attached to vertex ``lo + 1 + k``."""
    total = Fraction(0)
    for m, n, wt in g.edges():
        total += wt * values[m - g.lo - 1] * values[n - g.lo - 1]
    return total


def trace_ratio(g: CorrelationGraph, K: int, trace: Fraction | None = None) -> float:
    """Tr(Ad^K) divided by (Lmax^(2J/3))^K N, reported without any claim."""
    trace = trace_power_walks(g, K) if trace is None else trace
    scale = float(g.shifts.layers.lmax) ** (2 * g.shifts.J / 3)
    return float(trace) / (scale**K * g.N)


# ---------------------------------------------------------------------------
# expectations in the Kubilius model


def _expectation_term(
    w: SignedWalk,
    divides: Callable[[int, int], bool],
    omegas: Sequence[int],
    S: Iterable[Index],
    lit: Iterable[Index],
    unlit: Iterable[Index],
    W: Callable[[float], float],
) -> float:
    if any(not divides(w.p(i, j), i) for i, j in lit) or any(divides(w.p(i, j), i) for i, j in unlit):
        return 0.0
    val = math.prod(W(k) for k in omegas)
    for i, j in S:
        p = w.p(i, j)
        val *= (1.0 if divides(p, i) else 0.0) - 1.0 / p
    return val


def _model_primes(w: SignedWalk, primes: PrimeLayers | Iterable[int]) -> list[int]:
    ps = sorted(primes.primes) if isinstance(primes, PrimeLayers) else sorted(set(primes))
    if not w.primes() <= set(ps):
        raise ValueError("the walk uses primes outside the model")
    return ps


def walk_expectation(
    w: SignedWalk,
    S: Iterable[Index],
    lit: Iterable[Index],
    unlit: Iterable[Index],
    primes: PrimeLayers | Iterable[int],
    W: Callable[[float], float],
    R: Progression | None = None,
) -> float:
    """E[1_{n in R} prod_i W(omega(n + b_i)) prod_S (1_{p | n + b_i} - 1/p) 1_lit 1_unlit]
    by direct enumeration of n over a full period."""
    ps = _model_primes(w, primes)
    S, lit, unlit = list(S), list(lit), list(unlit)
    period = math.prod(ps) if R is None else math.lcm(math.prod(ps), R.modulus)
    if period > EXPECTATION_GUARD:
        raise ResourceError(f"period {period} exceeds {EXPECTATION_GUARD}")
    total = 0.0
    for n in range(period):
        if R is not None and n not in R:
            continue
        omegas = [sum(1 for p in ps if (n + w.b(i)) % p == 0) for i in range(1, w.R + 1)]
        total += _expectation_term(w, lambda p, i: (n + w.b(i)) % p == 0, omegas, S, lit, unlit, W)
    return total / period


def walk_expectation_by_patterns(
    w: SignedWalk,
    S: Iterable[Index],
    lit: Iterable[Index],
    unlit: Iterable[Index],
    primes: PrimeLayers | Iterable[int],
    W: Callable[[float], float],
) -> float:
    """The same expectation with R = Z, summed over divisibility patterns
    weighted by their exact Kubilius densities."""
    ps = _model_primes(w, primes)
    S, lit, unlit = list(S), list(lit), list(unlit)
    bs = [w.b(i) for i in range(1, w.R + 1)]
    options = []
    for p in ps:
        seen = {frozenset(i for i, b in enumerate(bs, start=1) if (r + b) % p == 0) for r in range(p)}
        options.append([X_p for X_p in seen if local_count(p, X_p, bs)])
    total = 0.0
    for choice in itertools.product(*options):
        X = {(p, i) for p, X_p in zip(ps, choice) for i in X_p}
        omegas = [sum(1 for X_p in choice if i in X_p) for i in range(1, w.R + 1)]
        term = _expectation_term(w, lambda p, i: (p, i) in X, omegas, S, lit, unlit, W)
        if term:
            total += float(kubilius_density(X, bs, ps)) * term
    return total
