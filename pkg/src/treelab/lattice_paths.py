"""Walks with +1/-1 steps: bridges, excursions, the cyclic-shift map and
the reflection ("cut") map, and the level-crossing width of a path."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate

import numpy as np


@dataclass(frozen=True)
class LatticePath:
    start: int
    steps: tuple[int, ...]

    def __post_init__(self):
        for s in self.steps:
            if s not in (1, -1):
                raise ValueError(f"steps must be +1 or -1, got {s!r}")

    @classmethod
    def from_values(cls, values) -> "LatticePath":
        values = list(values)
        if not values:
            raise ValueError("need at least one value")
        return cls(values[0], tuple(b - a for a, b in zip(values, values[1:])))

    @classmethod
    def from_string(cls, text: str, start: int = 0) -> "LatticePath":
        """Parse 'UDD' or 'start:UDD'."""
        text = text.strip()
        if ":" in text:
            head, text = text.split(":", 1)
            start = int(head)
        table = {"U": 1, "D": -1}
        try:
            return cls(start, tuple(table[c] for c in text.upper()))
        except KeyError as exc:
            raise ValueError(f"bad step letter {exc.args[0]!r}") from None

    def to_string(self) -> str:
        return f"{self.start}:" + "".join("U" if s > 0 else "D" for s in self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def values(self) -> list[int]:
        return list(accumulate(self.steps, initial=self.start))

    @property
    def end(self) -> int:
        return self.start + sum(self.steps)

    def is_excursion(self) -> bool:
        """Starts at 0, stays >= 0 until the final step, ends at -1."""
        v = self.values
        return (self.start == 0 and v[-1] == -1 and len(self.steps) % 2 == 1
                and min(v[:-1]) >= 0)

    def concat(self, other: "LatticePath") -> "LatticePath":
        if other.start != self.end:
            raise ValueError("paths do not join up")
        return LatticePath(self.start, self.steps + other.steps)


def _check_bridge(b: LatticePath, end: int):
    if b.start != 0 or b.end != end:
        raise ValueError(f"expected a bridge from 0 to {end}, got {b.start} -> {b.end}")


def cycle_map(b: LatticePath) -> LatticePath:
    """Rotate a 0 -> -1 bridge so that it starts right after its first minimum.

    The result is an excursion, and every excursion of length 2n-1 has exactly
    2n-1 preimages.
    """
    _check_bridge(b, -1)
    k = len(b.steps)
    if k % 2 == 0:
        raise ValueError("a 0 -> -1 bridge has odd length")
    v = b.values
    tau = v.index(min(v)) % k
    return LatticePath(0, b.steps[tau:] + b.steps[:tau])


def cut_bijection(w: LatticePath, x: int | None = None) -> LatticePath:
    """Reflect w around the level floor(x/2) after its last visit there.

    With x the endpoint of w (the default), bridges 0 -> x are sent onto
    bridges ending at -(n mod 2) that visit floor(x/2). Applying the map twice
    with the same x is the identity.
    """
    if w.start != 0:
        raise ValueError("walk must start at 0")
    n = len(w.steps)
    if x is None:
        x = w.end
    if (x - n) % 2:
        raise ValueError(f"endpoint {x} and length {n} have different parity")
    level = x // 2
    v = w.values
    visits = [t for t, y in enumerate(v) if y == level]
    if not visits:
        raise ValueError(f"walk never visits level {level}")
    tau = visits[-1]
    return LatticePath(0, w.steps[:tau] + tuple(-s for s in w.steps[tau:]))


def path_width(c: LatticePath) -> Fraction:
    """Half the largest number of times the linear interpolation of c meets a
    horizontal line. For a tree contour this is the tree's width."""
    if len(c.steps) < 2:
        return Fraction(0)
    v = c.values
    visits: dict[int, int] = {}
    for y in v:
        visits[y] = visits.get(y, 0) + 1
    # crossings of the line y + 1/2, keyed by y
    cross: dict[int, int] = {}
    for a, b in zip(v, v[1:]):
        lo = min(a, b)
        cross[lo] = cross.get(lo, 0) + 1
    return Fraction(max(max(visits.values()), max(cross.values())), 2)


def uniform_bridge(length: int, endpoint: int, rng: np.random.Generator) -> LatticePath:
    if length < 0 or abs(endpoint) > length or (length + endpoint) % 2:
        raise ValueError(f"endpoint {endpoint} unreachable in {length} steps")
    ups = (length + endpoint) // 2
    steps = np.full(length, -1, dtype=np.int8)
    steps[rng.choice(length, size=ups, replace=False)] = 1
    return LatticePath(0, tuple(int(s) for s in steps))


def uniform_excursion(n: int, rng: np.random.Generator) -> LatticePath:
    """Uniform excursion of length 2n-1 (uniform bridge, then cycle_map)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return cycle_map(uniform_bridge(2 * n - 1, -1, rng))
