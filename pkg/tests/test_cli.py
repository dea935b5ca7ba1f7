from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

import pytest

from chowlakit import arith, correlations
from chowlakit.cli import main

EXAMPLE = "5,-4,-1,2,-2,4,5,-5,-4,-1,-9,-7,7,8,-8,9"


def run(capsys, *argv):
    status = main(list(argv))
    out = capsys.readouterr()
    return status, out.out, out.err


def test_walks_reduce(capsys):
    status, out, _ = run(capsys, "walks", "--reduce", EXAMPLE)
    data = json.loads(out)
    assert status == 0
    assert data["reduced"] == [5, -4, -1, -1]
    assert data["total_shift"] == 16 and data["replay_ok"]


def test_correlate_toy1(capsys):
    status, out, _ = run(capsys, "correlate", "--profile", "toy1", "--x", "100000")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert status == 0 and len(rows) == 1
    row = rows[0]
    assert list(row) == ["profile", "lo", "hi", "s1", "s2", "sum_S_I", "residual"]
    assert row["residual"] == "0"
    from chowlakit.profiles import load_profile

    shifts = load_profile("toy1").shifts
    table = arith.liouville_sieve(1, 100_000 + max(shifts.elements))
    assert int(row["s1"]) == correlations.s1_sum(0, 100_000, shifts, table).value


def test_output_file_and_json_format(capsys, tmp_path):
    target = tmp_path / "out.json"
    status, out, _ = run(capsys, "correlate", "--x", "2000", "--format", "json", "--out", str(target))
    assert status == 0 and out == ""
    data = json.loads(target.read_text())
    assert data[0]["hi"] == 2000 and Fraction(data[0]["residual"]) == 0


@pytest.mark.parametrize("variant", ["G0", "G1", "G"])
def test_spectrum_matches_oracle(capsys, variant):
    status, out, _ = run(capsys, "spectrum", "--variant", variant, "--hi", "80", "--profile", "toy3")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert status == 0 and len(rows) == 80
    assert list(rows[0]) == ["variant", "range", "R_or_alpha", "value", "oracle_value", "residual"]
    assert max(abs(float(r["residual"])) for r in rows) < 1e-9


def test_spectrum_localisation(capsys):
    status, out, _ = run(capsys, "spectrum", "--profile", "toy3", "--hi", "1400", "--alpha", "3", "--eps", "0.9")
    data = json.loads(out)
    assert status == 0 and data["case"] in (1, 2) and data["spectrum_matches_oracle"]


def test_trace(capsys):
    status, out, _ = run(capsys, "trace", "--variant", "G1", "--hi", "50", "--R", "2,4")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert status == 0 and [r["residual"] for r in rows] == ["0", "0"]
    assert "ratio" in rows[0]


def test_words_single(capsys):
    status, out, _ = run(capsys, "words", "--word", "ABCABCBA", "--t", "1")
    data = json.loads(out)
    assert status == 0 and not data["predictable"] and data["verified"]


def test_words_random_batch(capsys):
    status, out, _ = run(capsys, "words", "--random", "20", "--seed", "0")
    assert status == 0 and len(list(csv.DictReader(io.StringIO(out)))) == 20


def test_sieve_check(capsys):
    status, out, _ = run(capsys, "sieve-check", "--instances", "30")
    data = json.loads(out)
    assert status == 0 and data["remainder_violations"] == 0


def test_prohibited_sequence(capsys):
    status, out, _ = run(capsys, "prohibited", "--seq", "35,14,21")
    data = json.loads(out)
    assert status == 0 and data["prohibited"] and data["primitive"]
    assert data["progression"] == {"residue": 35, "modulus": 210} and (data["p"], data["ell0"]) == (5, 2)


def test_prohibited_enumeration(capsys):
    status, out, err = run(capsys, "prohibited", "--profile", "toy2", "--y-check", "3000")
    assert status == 0 and "True" in err
    assert out.startswith("sequence,modulus,residue")


def test_constraints_and_rank_check(capsys, tmp_path):
    cfg = tmp_path / "p.cfg"
    cfg.write_text("windows = 1..6, 6..8\n")
    status, out, _ = run(capsys, "constraints", "--config", str(cfg), "--walk", "14,21,-35")
    assert status == 0 and json.loads(out)["walk"] == [14, 21, -35]
    status, out, _ = run(
        capsys, "rank-check", "--config", str(cfg), "--walk", "14,21,-35", "--lit", "1:2", "--seq", "35,14,21"
    )
    data = json.loads(out)
    assert status == 0 and data["passed"] and data["A"] == "0 mod 7"


def test_resource_error_exit(capsys, tmp_path):
    cfg = tmp_path / "p.cfg"
    cfg.write_text("windows = 1..6, 6..8\n")
    status, _, err = run(capsys, "rank-check", "--config", str(cfg), "--walk", "14,21,-35", "--lit", "1:2")
    assert status == 1 and "resource limit" in err
    status, _, err = run(capsys, "spectrum", "--hi", "5000")
    assert status == 1 and "resource limit" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        [],
        ["walks"],
        ["walks", "--reduce", "1,x"],
        ["correlate", "--profile", "nope"],
        ["prohibited", "--seq", "35,14"],
        ["spectrum", "--hi", "100", "--alpha", "1"],
        ["words"],
        ["selftest", "--only", "99"],
        ["walks", "--reduce", "1", "--threads", "0"],
    ],
)
def test_usage_errors(capsys, argv):
    assert main(argv) == 2


def test_deterministic_across_threads(capsys):
    _, first, _ = run(capsys, "words", "--random", "10", "--seed", "7")
    _, second, _ = run(capsys, "words", "--random", "10", "--seed", "7", "--threads", "4")
    assert first == second


def test_selftest_subset(capsys):
    status, out, err = run(capsys, "selftest", "--only", "1,2")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert status == 0 and [r["passed"] for r in rows] == ["True", "True"]
    assert err.count("[PASS]") == 2


def test_selftest_full(capsys):
    status, out, _ = run(capsys, "selftest")
    assert status == 0 and len(list(csv.DictReader(io.StringIO(out)))) == 14
