from __future__ import annotations

import pytest

from chowlakit import profiles
from chowlakit.profiles import Profile


def test_builtin_layers():
    toy1 = profiles.load_profile("toy1")
    assert toy1.layers.layers == ((3, 5), (7, 11))
    assert toy1.shifts.elements == (21, 33, 35, 55)
    assert profiles.load_profile() is toy1
    assert profiles.load_profile("toy3").shifts.elements == (70, 105)


def test_layer_formula_profile():
    prof = profiles.load_profile("formula-tiny")
    assert prof.layers.J == 2 and all(prof.layers.layers)


def test_unknown_profile():
    with pytest.raises(ValueError):
        profiles.load_profile("nope")


@pytest.mark.parametrize(
    "kwargs",
    [
        {},
        {"windows": ((2, 6),), "h0": 10.0, "h": 100.0, "J": 1},
        {"h0": 10.0},
        {"windows": ((2, 6),), "L": 0},
        {"windows": ((2, 6),), "rank_threshold": 0},
    ],
)
def test_profile_validation(kwargs):
    with pytest.raises(ValueError):
        Profile("bad", **kwargs)


def test_parse_profile(tmp_path):
    text = "# a custom profile\nwindows = 1..6, 6..8\nL = 3  # cap\nrank_threshold = 1.5\n\n"
    prof = profiles.parse_profile(text)
    assert prof.windows == ((1, 6), (6, 8)) and prof.L == 3 and prof.rank_threshold == 1.5
    assert prof.shifts.elements == (14, 21, 35)
    path = tmp_path / "mine.cfg"
    path.write_text(text)
    assert profiles.load_profile(config=path).name == "mine"


@pytest.mark.parametrize("text", ["windows = 1-6", "colour = red", "just words"])
def test_parse_profile_errors(text):
    with pytest.raises(ValueError):
        profiles.parse_profile(text)
