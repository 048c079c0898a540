from __future__ import annotations

import logging
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import pandas as pd

from src.core.services.words.word_lab import (
    NonPrimitiveWordError,
    Word,
    is_primitive,
    ptm_prefix,
)

log = logging.getLogger("orbits")


class NotPeriodicError(ValueError):
    """Angle is not periodic under doubling (even denominator)."""


@dataclass(frozen=True, order=True)
class Angle:
    """Exact point of the circle [0,1)."""

    value: Fraction

    def __post_init__(self):
        v = Fraction(self.value)
        object.__setattr__(self, "value", v - (v.numerator // v.denominator))

    @classmethod
    def parse(cls, text: str) -> "Angle":
        return cls(Fraction(text))

    @property
    def denominator(self) -> int:
        return self.value.denominator

    def __str__(self) -> str:
        return f"{self.value.numerator}/{self.value.denominator}"

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class PeriodicOrbit:
    """Doubling orbit listed along the dynamics: doubling(points[i]) = points[i+1]."""

    points: Tuple[Angle, ...]

    @property
    def period(self) -> int:
        return len(self.points)

    def __contains__(self, a: object) -> bool:
        return a in self.points


@dataclass(frozen=True)
class LambdaSet:
    """One doubling orbit per period of a finite period set."""

    orbits: Mapping[int, PeriodicOrbit] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "orbits", dict(sorted(self.orbits.items())))

    def __len__(self) -> int:
        return sum(o.period for o in self.orbits.values())

    def periods(self) -> List[int]:
        return list(self.orbits.keys())

    def points(self) -> List[Angle]:
        return sorted(a for o in self.orbits.values() for a in o.points)

    def period_of(self, a: Angle) -> int:
        for k, orbit in self.orbits.items():
            if a in orbit:
                return k
        raise KeyError(str(a))

    def __hash__(self) -> int:
        return hash(tuple(self.orbits.items()))


def word_to_angle(w: str) -> Angle:
    """Angle whose binary expansion is the repetition of w: int(w, 2) / (2^n − 1)."""
    word = Word(w)
    if not word:
        raise ValueError("empty word")
    return Angle(Fraction(int(word, 2), 2 ** len(word) - 1))


def doubling(a: Angle) -> Angle:
    return Angle(2 * a.value)


def rotate(w: str, k: int) -> Word:
    return Word(w).rotate(k)


def circular_distance(a: Angle, b: Angle) -> Fraction:
    d = abs(a.value - b.value)
    return min(d, 1 - d)


def orbit_of(a: Angle) -> PeriodicOrbit:
    """
    Full doubling orbit of a periodic angle.

    Raises:
        NotPeriodicError: even denominator
    """
    if a.denominator % 2 == 0:
        raise NotPeriodicError(f"{a} has even denominator; not periodic under doubling")
    points = [a]
    nxt = doubling(a)
    while nxt != a:
        points.append(nxt)
        nxt = doubling(nxt)
    return PeriodicOrbit(tuple(points))


def ptm_orbit(k: int) -> PeriodicOrbit:
    """
    Orbit of the angle coded by the first k Thue–Morse symbols.

    Raises:
        NonPrimitiveWordError
    """
    s_k = ptm_prefix(k)
    if not is_primitive(s_k):
        raise NonPrimitiveWordError(k, s_k)
    return orbit_of(word_to_angle(s_k))


def build_lambda(P: Iterable[int], n_max: int) -> LambdaSet:
    """
    One Thue–Morse orbit for each period in P.

    Raises:
        ValueError: max(P) > n_max or overlapping orbits
        NonPrimitiveWordError
    """
    periods = sorted(set(P))
    if periods and periods[-1] > n_max:
        raise ValueError(f"period {periods[-1]} exceeds n_max={n_max}")
    orbits: Dict[int, PeriodicOrbit] = {}
    seen: set = set()
    for k in periods:
        orbit = ptm_orbit(k)
        assert orbit.period == k, f"orbit of s_{k} has period {orbit.period}"
        if seen.intersection(orbit.points):
            raise ValueError(f"orbit of period {k} overlaps earlier orbits")
        seen.update(orbit.points)
        orbits[k] = orbit
    log.debug("lambda built for periods %s (%d points)", periods, len(seen))
    return LambdaSet(orbits)


def min_gap(lam: LambdaSet) -> Fraction:
    """
    Minimum circular distance between distinct points; a single point gets the whole circle.

    Raises:
        ValueError: empty set
    """
    pts = [a.value for a in lam.points()]
    if not pts:
        raise ValueError("min_gap of an empty set")
    if len(pts) == 1:
        return Fraction(1)
    gaps = [b - a for a, b in zip(pts, pts[1:])]
    gaps.append(1 - pts[-1] + pts[0])
    return min(gaps)


def periodic_angles(max_period: int) -> List[Tuple[Angle, int]]:
    """Every doubling-periodic angle of least period ≤ max_period, with its period."""
    out: Dict[Angle, int] = {}
    for p in range(1, max_period + 1):
        q = 2 ** p - 1
        for j in range(q):
            a = Angle(Fraction(j, q))
            if a not in out:
                out[a] = orbit_of(a).period
    return sorted(out.items())


@dataclass(frozen=True)
class SeparationRow:
    beta: Angle
    period: int
    distances: Tuple[Optional[Fraction], ...]
    floor: Optional[Fraction]
    flagged: bool


@dataclass(frozen=True)
class SeparationReport:
    n_max: int
    probe_period: int
    floor_threshold: float
    window: int
    rows: Tuple[SeparationRow, ...]

    @property
    def ok(self) -> bool:
        return not any(r.flagged for r in self.rows)

    def to_frame(self):
        data = {
            str(r.beta): [None if d is None else float(d) for d in r.distances]
            for r in self.rows
        }
        return pd.DataFrame(data, index=pd.RangeIndex(1, self.n_max + 1, name="n"))


def _nearest(sorted_pts: List[Fraction], x: Fraction) -> Fraction:
    i = bisect_left(sorted_pts, x)
    cands = [sorted_pts[i % len(sorted_pts)], sorted_pts[i - 1]]
    best = None
    for c in cands:
        d = abs(c - x)
        d = min(d, 1 - d)
        best = d if best is None else min(best, d)
    return best


def _is_vanishing(tail: List[Fraction], floor: float) -> bool:
    return all(b < a for a, b in zip(tail, tail[1:])) and float(tail[-1]) < floor


def separation_proxy(
    n_max: int,
    probe_period: int,
    floor: float = 1e-12,
    window: int = 8,
) -> SeparationReport:
    """
    Heuristic probe of "no accumulation point of Λ is periodic".

    For each periodic β of period ≤ probe_period record, for n ≤ n_max, the distance
    from β to the period-n Thue–Morse orbit (None when β lies on that orbit). A β is
    flagged when its last `window` distances decrease strictly and end below `floor`.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    probes = periodic_angles(probe_period) if probe_period > 0 else []
    orbit_points: List[List[Fraction]] = []
    for n in range(1, n_max + 1):
        orbit_points.append(sorted(a.value for a in ptm_orbit(n).points))

    rows: List[SeparationRow] = []
    for beta, period in probes:
        dists: List[Optional[Fraction]] = []
        for pts in orbit_points:
            d = _nearest(pts, beta.value)
            dists.append(None if d == 0 else d)
        known = [d for d in dists if d is not None]
        tail = known[-window:]
        flagged = len(tail) == window and window > 1 and _is_vanishing(tail, floor)
        rows.append(SeparationRow(beta, period, tuple(dists), min(known) if known else None, flagged))
        if flagged:
            log.warning("separation: distances from %s shrink below %g", beta, floor)
    return SeparationReport(n_max, probe_period, floor, window, tuple(rows))


__all__ = [
    "NotPeriodicError",
    "Angle",
    "PeriodicOrbit",
    "LambdaSet",
    "word_to_angle",
    "doubling",
    "rotate",
    "circular_distance",
    "orbit_of",
    "ptm_orbit",
    "build_lambda",
    "min_gap",
    "periodic_angles",
    "SeparationRow",
    "SeparationReport",
    "separation_proxy",
]
