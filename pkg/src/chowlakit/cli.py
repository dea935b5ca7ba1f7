"""Command-line driver: ``chowlakit <subcommand> [options]``.

Exit status: 0 on success, 1 when a verification fails or a guard trips,
2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from . import (
    arith,
    constraints,
    correlations,
    prohibited,
    rank,
    selftest,
    sieve,
    spectral,
    walks,
    words,
)
from .arith import ResourceError
from .profiles import BUILTIN, Profile, load_profile

SPECTRAL_COLUMNS = ["variant", "range", "R_or_alpha", "value", "oracle_value", "residual"]


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output


def _plain(x: Any) -> Any:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted((_plain(v) for v in x), key=repr)
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


def _emit(args: argparse.Namespace, payload: dict | list[dict], default: str) -> None:
    fmt = args.format or default
    buf = io.StringIO()
    if fmt == "json":
        json.dump(_plain(payload), buf, indent=2, sort_keys=False)
        buf.write("\n")
    else:
        rows = payload if isinstance(payload, list) else [
            {"key": k, "value": json.dumps(_plain(v)) if isinstance(v, (dict, list)) else _plain(v)}
            for k, v in payload.items()
        ]
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _plain(v) for k, v in row.items()})
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _indices(text: str) -> list[tuple[int, int]]:
    out = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        i, sep, j = part.partition(":")
        if not sep:
            raise UsageError(f"index {part!r} is not of the form i:j")
        out.append((int(i), int(j)))
    return out


def _profile(args: argparse.Namespace) -> Profile:
    try:
        return load_profile(args.profile, args.config)
    except (OSError, ValueError) as err:
        raise UsageError(str(err)) from None


# ---------------------------------------------------------------------------
# subcommands


def cmd_correlate(args: argparse.Namespace) -> int:
    prof = _profile(args)
    shifts = prof.shifts
    hi = args.x or prof.x
    lo = args.lo
    if hi <= lo:
        raise UsageError("need x > lo")
    if hi > prof.max_range:
        raise ResourceError(f"x = {hi} exceeds the profile range cap {prof.max_range}")
    table = arith.liouville_sieve(1, hi + max(shifts.elements))
    s1 = correlations.s1_sum(lo, hi, shifts, table).value
    s2 = correlations.s2_sum(lo, hi, shifts, table).value
    terms = correlations.expansion_terms(lo, hi, shifts, table)
    total = sum(terms.values(), Fraction(0))
    residual = s2 - s1 - total
    row = {
        "profile": prof.name,
        "lo": lo,
        "hi": hi,
        "s1": s1,
        "s2": float(s2),
        "sum_S_I": float(total),
        "residual": residual,
    }
    _emit(args, [row], "csv")
    return 0 if residual == 0 else 1


def _graph(args: argparse.Namespace, prof: Profile) -> spectral.CorrelationGraph:
    shifts = prof.shifts
    if args.hi - args.lo > spectral.MAX_DIMENSION:
        raise ResourceError(f"range of {args.hi - args.lo} vertices exceeds {spectral.MAX_DIMENSION}")
    T = args.T if args.T is not None else shifts.J * float(shifts.layers.lmax)
    cutoff = sieve.smooth_cutoff(T) if args.variant != "G0" else None
    yb = prohibited.y_filter(args.lo, args.hi, shifts, prof.L) if args.variant == "G" else None
    return spectral.build_graph(args.variant, args.lo, args.hi, shifts, cutoff=cutoff, ybitmap=yb)


def cmd_spectrum(args: argparse.Namespace) -> int:
    prof = _profile(args)
    g = _graph(args, prof)
    m = g.banded()
    ours = spectral.eigen_spectrum(m)
    oracle = np.sort(np.linalg.eigvalsh(m.dense_float()))[::-1]
    norm = float(np.max(np.abs(oracle))) if len(oracle) else 0.0
    rng_label = f"{args.lo}..{args.hi}"
    rows = [
        {"variant": g.variant, "range": rng_label, "R_or_alpha": j, "value": float(a), "oracle_value": float(b), "residual": float(a - b)}
        for j, (a, b) in enumerate(zip(ours, oracle), start=1)
    ]
    ok = all(abs(r["residual"]) <= 1e-9 * max(norm, 1.0) for r in rows)
    if args.alpha is not None:
        res = spectral.localize_eigenvalues(m, args.alpha, args.eps, R=args.R)
        summary = {
            "variant": g.variant,
            "range": rng_label,
            "alpha": args.alpha,
            "eps": args.eps,
            "case": res.case,
            "exceeding_blocks": list(res.exceeding),
            "removed": len(res.removed) if res.removed is not None else None,
            "residual_max": res.residual_max,
            "R": res.R,
            "trace_lower_bound": res.trace_lower_bound,
            "spectrum_matches_oracle": ok,
        }
        _emit(args, summary, "json")
    else:
        _emit(args, rows, "csv")
    return 0 if ok else 1


def cmd_trace(args: argparse.Namespace) -> int:
    prof = _profile(args)
    g = _graph(args, prof)
    rows = []
    ok = True
    for R in args.R:
        walk = spectral.trace_power_walks(g, R)
        dense = spectral.dense_trace_power(g, R)
        ok &= walk == dense
        rows.append(
            {
                "variant": g.variant,
                "range": f"{args.lo}..{args.hi}",
                "R_or_alpha": R,
                "value": float(walk),
                "oracle_value": float(dense),
                "residual": walk - dense,
                "ratio": spectral.trace_ratio(g, R, walk),
            }
        )
    _emit(args, rows, "csv")
    return 0 if ok else 1


def cmd_walks(args: argparse.Namespace) -> int:
    steps = _ints(args.reduce)
    if not steps:
        raise UsageError("--reduce needs at least one step")
    w = walks.SignedWalk(tuple(steps))
    reduced = walks.reduce_walk(w)
    dec = walks.decompose_backtracking(w, allow_open=True)
    rebuilt = walks.replay(dec.reduced.steps, dec.shifts, dec.appended)
    ok = tuple(rebuilt) == w.steps
    _emit(
        args,
        {
            "steps": list(w.steps),
            "closed": w.closed,
            "reduced": list(reduced.steps),
            "shifts": list(dec.shifts),
            "appended": list(dec.appended),
            "total_shift": sum(dec.shifts),
            "replay_ok": ok,
        },
        "json",
    )
    return 0 if ok else 1


def _structure_json(s: words.RepetitionStructure | words.InterleavedStructure) -> dict:
    if isinstance(s, words.RepetitionStructure):
        return {"kind": "repetitions", "m": s.m, "pairs": [list(p) for p in s.pairs]}
    return {
        "kind": "interleaved",
        "route": s.route,
        "m": s.m,
        "v1": list(s.v1),
        "v2": list(s.v2),
        "xs": list(s.xs),
        "zs": list(s.zs),
        "v1_reversed": s.v1_reversed,
        "v2_reversed": s.v2_reversed,
    }


def cmd_words(args: argparse.Namespace) -> int:
    if args.word is None and not args.random:
        raise UsageError("give --word or --random N")
    if args.word is not None:
        w = tuple(args.word)
        if not words.in_W(w):
            raise UsageError("the word has equal adjacent letters")
        pred, witness = words.is_t_predictable(w, args.t)
        count, pairs = words.separated_repetitions(w)
        out: dict[str, Any] = {
            "word": args.word,
            "t": args.t,
            "predictable": pred,
            "witness": witness,
            "neighbours": {a: words.neighbour_class(w, a) for a in dict.fromkeys(w)},
            "separated_repetitions": {"count": count, "pairs": [list(p) for p in pairs]},
        }
        ok = True
        if not pred:
            s = words.unpredictable_structure(w, args.t)
            ok, why = words.verify_structure(w, args.t, s)
            out["structure"] = _structure_json(s)
            out["verified"] = ok
            out["reason"] = why
        _emit(args, out, "json")
        return 0 if ok else 1
    rng = random.Random(args.seed)
    rows = []
    while len(rows) < args.random:
        n, k, t = rng.randint(10, 200), rng.randint(3, 8), rng.randint(1, 5)
        w = selftest.random_word(rng, n, k)
        if words.is_t_predictable(w, t)[0]:
            continue
        s = words.unpredictable_structure(w, t)
        ok, why = words.verify_structure(w, t, s)
        rows.append({"n": n, "alphabet": k, "t": t, "kind": _structure_json(s)["kind"], "m": s.m, "ok": ok, "reason": why})
    _emit(args, rows, "csv")
    return 0 if all(r["ok"] for r in rows) else 1


def cmd_sieve_check(args: argparse.Namespace) -> int:
    rng = random.Random(args.seed)
    violations = coeff = points = 0
    for _ in range(args.instances):
        Y = selftest.random_progressions(rng, rng.randint(1, 5))
        closure = sieve.sieve_expansion(Y, lambda P: True).closure
        X = selftest.random_upset(rng, closure)
        exp = sieve.sieve_expansion(Y, X)
        coeff += sum(abs(c) > 2 ** arith.omega(P.modulus) for P, c in exp.coefficients.items())
        period = math.lcm(*(P.modulus for P in Y))
        for n in range(period):
            lhs, main, bound = sieve.sieve_identity_check(Y, exp, n)
            violations += abs(lhs - main) > bound
            points += 1
    out = {"instances": args.instances, "points": points, "remainder_violations": violations, "coefficient_violations": coeff}
    _emit(args, out, "json")
    return 0 if violations == coeff == 0 else 1


def cmd_prohibited(args: argparse.Namespace) -> int:
    prof = _profile(args)
    L = args.L or prof.L
    if args.seq:
        seq = _ints(args.seq)
        if not 2 < len(seq) <= L:
            raise UsageError(f"sequence length must lie in (2, {L}]")
        ok, cert = prohibited.check_prohibited(seq, L)
        out: dict[str, Any] = {
            "sequence": seq,
            "prohibited": ok,
            "p": cert.p,
            "ell0": cert.ell0,
            "non_backtracking": cert.non_backtracking,
            "consecutive": cert.consecutive,
            "pattern": cert.pattern,
        }
        if ok:
            prog = prohibited.to_progression(seq)
            out["primitive"] = prohibited.check_primitive(seq, L)
            out["progression"] = {"residue": prog.residue, "modulus": prog.modulus}
        _emit(args, out, "json")
        return 0
    shifts = prof.shifts
    rows = []
    for seq in prohibited.enumerate_primitive(shifts, L):
        prog = prohibited.to_progression(seq)
        rows.append(
            {"sequence": " ".join(map(str, seq)), "modulus": prog.modulus, "residue": "" if prog.empty else prog.residue}
        )
    status = 0
    if args.y_check:
        agree = np.array_equal(
            prohibited.y_filter(0, args.y_check, shifts, L), prohibited.y_filter_direct(0, args.y_check, shifts, L)
        )
        print(f"y_filter agrees with the direct oracle on (0, {args.y_check}]: {agree}", file=sys.stderr)
        status = 0 if agree else 1
    if rows:
        _emit(args, rows, "csv")
    return status


def cmd_constraints(args: argparse.Namespace) -> int:
    prof = _profile(args)
    try:
        w = walks.build_walk(_ints(args.walk), prof.shifts)
    except ValueError as err:
        raise UsageError(str(err)) from None
    out: dict[str, Any] = {"walk": list(w.steps), "single": sorted(walks.single_indices(w))}
    ok = True
    systems = {}
    for case, system in constraints.bad_single_systems(w).items():
        good, cert = constraints.verify_triangular(w, system)
        ok &= good
        systems[case] = {
            "constraints": [{"intervals": [list(iv) for iv in c.intervals], "pivot": list(c.pivot), "kappa": c.kappa} for c in system.constraints],
            "complexity": list(system.complexity),
            "accepted": good,
            "certificate": [{"t": c.t, "prime": c.prime, "cases": list(c.cases), "source": c.source, "reason": c.reason} for c in cert],
        }
    out["bad_single_systems"] = systems
    S = walks.single_indices(w)
    part = walks.IndexPartition(S, frozenset(set(w.indices()) - S), frozenset())
    problems = constraints.repetition_hypotheses(w, part, prof.L)
    out["repetition_hypotheses"] = problems or "all hold"
    if not problems:
        routes = {}
        for j in range(1, w.J + 1):
            if not constraints.repetition_triples(w, j):
                continue
            r = constraints.repetition_systems(w, j, part)
            entry = {"triples": [list(t) for t in r.triples], "chosen": r.chosen}
            if r.chosen:
                good, _ = constraints.verify_triangular(w, r.systems[r.chosen])
                ok &= good
                entry["accepted"] = good
            routes[j] = entry
        out["repetition_routes"] = routes
    _emit(args, out, "json")
    return 0 if ok else 1


def cmd_rank_check(args: argparse.Namespace) -> int:
    prof = _profile(args)
    L = args.L or prof.L
    try:
        w = walks.build_walk(_ints(args.walk), prof.shifts)
    except ValueError as err:
        raise UsageError(str(err)) from None
    lit = _indices(args.lit) if args.lit else []
    if args.seq:
        progs = [prohibited.to_progression(_ints(s)) for s in args.seq]
    else:
        progs = prohibited.prohibited_progressions(prof.shifts, L)
    ctx = rank.RankContext.build(w, lit, progs, walks.single_indices(w) - set(lit))
    threshold = args.threshold if args.threshold is not None else prof.rank_threshold
    rep = rank.existencerank_properties(ctx, threshold, L)
    out = {
        "walk": list(w.steps),
        "lit": lit,
        "A": None if ctx.A is None else str(ctx.A),
        "family": [str(P) for P in ctx.family],
        "threshold": threshold,
        "closure_size": rep.closure_size,
        "x_size": rep.x_size,
        "boundary_size": rep.boundary_size,
        "period": rep.period,
        "main_term_sum": rep.main_term_sum,
        "remainder_term_sum": rep.remainder_term_sum,
        "failures": rep.failures,
        "passed": rep.passed,
    }
    _emit(args, out, "json")
    return 0 if rep.passed else 1


def cmd_selftest(args: argparse.Namespace) -> int:
    which = _ints(args.only) if args.only else None
    if which and any(k not in selftest.CRITERIA for k in which):
        raise UsageError(f"criteria are numbered 1..{len(selftest.CRITERIA)}")
    results = selftest.run_all(which, echo=lambda line: print(line, file=sys.stderr))
    rows = [
        {"criterion": r.number, "name": r.name, "passed": r.passed, "seconds": round(r.seconds, 6), "limit": r.limit, "detail": r.detail}
        for r in results
    ]
    _emit(args, rows, "csv")
    return 0 if all(r.ok for r in results) else 1


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--profile", default="toy1", help=f"built-in profile ({', '.join(BUILTIN)})")
    common.add_argument("--config", help="profile file with key=value lines")
    common.add_argument("--out", help="write output here instead of standard output")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1, help="accepted for compatibility; runs are sequential")
    common.add_argument("--format", choices=("csv", "json"))

    parser = argparse.ArgumentParser(prog="chowlakit", description="Desk-scale verification experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("correlate", parents=[common], help="S1, S2 and the S(I) expansion")
    p.add_argument("--x", type=int)
    p.add_argument("--lo", type=int, default=0)
    p.set_defaults(func=cmd_correlate)

    for name, func, helptext in (
        ("spectrum", cmd_spectrum, "eigenvalues of a correlation graph"),
        ("trace", cmd_trace, "closed-walk trace against dense powers"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--variant", choices=spectral.VARIANTS, default="G0")
        p.add_argument("--lo", type=int, default=0)
        p.add_argument("--hi", type=int, default=60)
        p.add_argument("--T", type=float, help="cutoff scale (default J times the largest layer sum)")
        if name == "spectrum":
            p.add_argument("--alpha", type=float)
            p.add_argument("--eps", type=float, default=0.5)
            p.add_argument("--R", type=int, default=2)
        else:
            p.add_argument("--R", type=lambda s: _ints(s), default=[2, 4])
        p.set_defaults(func=func)

    p = sub.add_parser("walks", parents=[common], help="reduce and decompose a walk")
    p.add_argument("--reduce", required=True, help="comma-separated steps")
    p.set_defaults(func=cmd_walks)

    p = sub.add_parser("words", parents=[common], help="predictability and structure of words")
    p.add_argument("--word")
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--random", type=int, default=0, help="check N random unpredictable words")
    p.set_defaults(func=cmd_words)

    p = sub.add_parser("sieve-check", parents=[common], help="random combinatorial sieve instances")
    p.add_argument("--instances", type=int, default=200)
    p.set_defaults(func=cmd_sieve_check)

    p = sub.add_parser("prohibited", parents=[common], help="prohibited sequences and progressions")
    p.add_argument("--seq", help="certify one sequence")
    p.add_argument("--L", type=int)
    p.add_argument("--y-check", type=int, help="compare y_filter with the direct oracle on (0, N]")
    p.set_defaults(func=cmd_prohibited)

    p = sub.add_parser("constraints", parents=[common], help="triangular systems of a walk")
    p.add_argument("--walk", required=True)
    p.set_defaults(func=cmd_constraints)

    p = sub.add_parser("rank-check", parents=[common], help="rank cut-off and sieve properties")
    p.add_argument("--walk", required=True)
    p.add_argument("--lit", help="lit indices as i:j,i:j")
    p.add_argument("--seq", action="append", help="prohibited sequence defining Y (repeatable)")
    p.add_argument("--L", type=int)
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=cmd_rank_check)

    p = sub.add_parser("selftest", parents=[common], help="run the acceptance checks")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.set_defaults(func=cmd_selftest)
    return parser


def dispatch(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be positive")
    try:
        return args.func(args)
    except (UsageError, ValueError) as err:
        parser.print_usage(sys.stderr)
        print(f"chowlakit: error: {err}", file=sys.stderr)
        return 2
    except ResourceError as err:
        print(f"chowlakit: resource limit: {err}", file=sys.stderr)
        return 1


def main(argv: Sequence[str] | None = None) -> int:
    try:
        return dispatch(argv)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
