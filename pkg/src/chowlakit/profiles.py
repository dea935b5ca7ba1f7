"""Named parameter profiles and the ``key=value`` profile file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from .arith import PrimeLayers, ShiftSet, build_prime_layers, generate_shift_set


@dataclass(frozen=True)
class Profile:
    """Either explicit layer windows or the ``(h0, h, J)`` layer formula.

    ``L`` caps prohibited-sequence length; ``rank_threshold`` is the rank
    cut-off for the sieve; ``x`` is the default upper end of ranges.
    """

    name: str
    windows: tuple[tuple[int, int], ...] | None = None
    h0: float | None = None
    h: float | None = None
    J: int | None = None
    x: int = 10_000
    L: int = 3
    rank_threshold: float = 2
    max_range: int = 10_000_000

    def __post_init__(self) -> None:
        if (self.windows is None) == (self.h0 is None):
            raise ValueError("give either windows or h0/h/J")
        if self.windows is None and (self.h is None or self.J is None):
            raise ValueError("the layer formula needs h0, h and J")
        for key in ("x", "L", "max_range"):
            if getattr(self, key) <= 0:
                raise ValueError(f"{key} must be positive")
        if self.rank_threshold <= 0:
            raise ValueError("rank_threshold must be positive")

    @cached_property
    def layers(self) -> PrimeLayers:
        if self.windows is not None:
            return build_prime_layers(mode="explicit-windows", windows=self.windows)
        return build_prime_layers(self.h0, self.h, self.J)

    @cached_property
    def shifts(self) -> ShiftSet:
        return generate_shift_set(self.layers)


BUILTIN = {
    "toy1": Profile("toy1", windows=((2, 6), (6, 12)), x=100_000, L=3),
    "toy2": Profile("toy2", windows=((10, 14), (16, 20)), x=100_000, L=4),
    "toy3": Profile("toy3", windows=((1, 4), (4, 6), (6, 8)), x=10_000, L=3),
    "formula-tiny": Profile("formula-tiny", h0=10, h=10_000, J=2, x=100_000, L=3),
}


def _windows(text: str) -> tuple[tuple[int, int], ...]:
    out = []
    for part in text.split(","):
        lo, sep, hi = part.strip().partition("..")
        if not sep:
            raise ValueError(f"window {part!r} is not of the form lo..hi")
        out.append((int(lo), int(hi)))
    return tuple(out)


def parse_profile(text: str, default_name: str = "custom") -> Profile:
    """Read ``key=value`` lines; ``#`` starts a comment, windows are ``lo..hi`` lists."""
    fields = {f.name: f for f in dataclasses.fields(Profile)}
    values: dict[str, object] = {"name": default_name}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or key not in fields:
            raise ValueError(f"line {lineno}: unknown setting {line!r}")
        if key == "windows":
            values[key] = _windows(val)
        elif key == "name":
            values[key] = val
        elif key in ("h0", "h", "rank_threshold"):
            values[key] = float(val)
        else:
            values[key] = int(val)
    return Profile(**values)


def load_profile(name: str | None = None, config: str | Path | None = None) -> Profile:
    if config is not None:
        path = Path(config)
        return parse_profile(path.read_text(), default_name=path.stem)
    name = name or "toy1"
    if name not in BUILTIN:
        raise ValueError(f"unknown profile {name!r}; choose from {', '.join(BUILTIN)}")
    return BUILTIN[name]
