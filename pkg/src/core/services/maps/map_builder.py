from __future__ import annotations

import logging
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.core.services.algebra.dold_core import (
    DoldCoefficients,
    format_coefficients,
    support_periods,
)
from src.core.services.circle.orbit_space import (
    Angle,
    LambdaSet,
    build_lambda,
    doubling,
    min_gap,
)
from src.models.registry import SectorKernel, get_kernel

log = logging.getLogger("maps")

GAP = "gap"
SECTOR = "sector"

# gap pieces run through the sector formula with m = 1 and the identity kernel
_IDENTITY = (0.0, 1.0, 0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class SectorParam:
    m: int
    sign: str

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"sector multiplicity must be >= 1, got {self.m}")
        if self.sign not in ("+", "-"):
            raise ValueError(f"sign must be '+' or '-', got {self.sign!r}")

    @property
    def contribution(self) -> int:
        """Signed number of turns one sector adds to the index."""
        return self.m * get_kernel(self.sign).sign


@dataclass(frozen=True)
class SectorParams:
    entries: Mapping[int, SectorParam] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(sorted(self.entries.items())))

    def __getitem__(self, k: int) -> SectorParam:
        return self.entries[k]

    def __contains__(self, k: object) -> bool:
        return k in self.entries

    def periods(self) -> List[int]:
        return list(self.entries.keys())

    def __hash__(self) -> int:
        return hash(tuple(self.entries.items()))


def assign_sector_params(coeffs: DoldCoefficients) -> SectorParams:
    """
    Multiplicity and sign of the sectors over the period-k orbit:
    k = 1: (a_1 − 1, +) if a_1 ≥ 2, (1 − a_1, −) if a_1 ≤ 0;
    k ≥ 2: (a_k, +) if a_k > 0, (−a_k, −) if a_k < 0.
    """
    out: Dict[int, SectorParam] = {}
    a1 = coeffs.get(1)
    if a1 >= 2:
        out[1] = SectorParam(a1 - 1, "+")
    elif a1 <= 0:
        out[1] = SectorParam(1 - a1, "-")
    for k, a in coeffs.items():
        if k < 2:
            continue
        out[k] = SectorParam(a, "+") if a > 0 else SectorParam(-a, "-")
    return SectorParams(out)


@dataclass(frozen=True)
class BlowupSchedule:
    """
    Blown circle: every α ∈ Λ replaced by J_α of base length `base_width`, then the
    circumference 1 + |Λ|·base_width renormalized to 1.
    """

    base_points: LambdaSet
    base_width: Fraction

    @cached_property
    def alphas(self) -> List[Angle]:
        return self.base_points.points()

    @property
    def circumference(self) -> Fraction:
        return 1 + len(self.alphas) * self.base_width

    @property
    def width(self) -> Fraction:
        """Width of each J_α in blown-circle units."""
        return self.base_width / self.circumference

    @cached_property
    def intervals(self) -> Dict[Angle, Tuple[Fraction, Fraction]]:
        c, w = self.circumference, self.base_width
        return {
            a: ((a.value + j * w) / c, (a.value + (j + 1) * w) / c)
            for j, a in enumerate(self.alphas)
        }

    def project(self, theta: Fraction) -> Angle:
        """π: collapses each J_α to α, order-preserving bijection on gaps."""
        u = Fraction(theta) * self.circumference
        w = self.base_width
        for j, a in enumerate(self.alphas):
            if u < a.value + j * w:
                return Angle(u - j * w)
            if u <= a.value + (j + 1) * w:
                return a
        return Angle(u - len(self.alphas) * w)

    def blow(self, x: Angle) -> Fraction:
        """Inverse of π off Λ."""
        if x in self.intervals:
            raise ValueError(f"{x} is blown up; use intervals[{x}]")
        j = sum(1 for a in self.alphas if a < x)
        return (x.value + j * self.base_width) / self.circumference


@dataclass(frozen=True)
class Piece:
    """Piece of the angular lift on [start, end]; gaps are affine, sectors carry m sub-sectors."""

    kind: str
    start: Fraction
    end: Fraction
    lift_start: Fraction
    lift_end: Fraction
    period: Optional[int] = None
    position: Optional[int] = None
    alpha: Optional[Angle] = None
    m: int = 1
    sign: Optional[str] = None

    @property
    def is_sector(self) -> bool:
        return self.kind == SECTOR

    @property
    def kernel(self) -> Optional[SectorKernel]:
        return get_kernel(self.sign) if self.sign else None

    def local(self, theta: Fraction) -> Tuple[int, Fraction]:
        """Sub-sector index i and local coordinate θ̂ ∈ [−1, 1]."""
        u = (Fraction(theta) - self.start) / (self.end - self.start) * self.m
        i = min(math.floor(u), self.m - 1)
        return i, 2 * (u - i) - 1

    def lift(self, theta: Fraction) -> Fraction:
        if not self.is_sector:
            t = (Fraction(theta) - self.start) / (self.end - self.start)
            return self.lift_start + t * (self.lift_end - self.lift_start)
        i, loc = self.local(theta)
        s = (i + (self.kernel.angular(loc) + 1) / 2) / self.m
        return self.lift_start + s * (self.lift_end - self.lift_start)

    def displacement(self, theta: Fraction) -> Fraction:
        """g(θ): 1 on gaps, 2θ̂² − 1 on sub-sectors."""
        if not self.is_sector:
            return RadialRule.gap_value
        _, loc = self.local(theta)
        return RadialRule.sector(loc)

    def grid(self) -> List[Tuple[Fraction, str]]:
        """Edges and centres of the m sub-sectors, with their radial kind."""
        span = self.end - self.start
        out = []
        for j in range(2 * self.m + 1):
            kind = "attracting" if j % 2 == 0 else "repelling"
            out.append((self.start + span * Fraction(j, 2 * self.m), kind))
        return out


class RadialRule:
    """f: (θ, r) ↦ (h(θ), r − g(θ))."""

    gap_value = Fraction(1)

    @staticmethod
    def sector(loc):
        return 2 * loc * loc - 1


@dataclass(frozen=True)
class AngularMap:
    """Degree-2 monotone lift h, as an ordered cover of [0, 1) by pieces."""

    pieces: Tuple[Piece, ...]

    @cached_property
    def starts(self) -> List[Fraction]:
        return [p.start for p in self.pieces]

    def piece_index(self, theta: Fraction) -> int:
        t = Fraction(theta)
        if not 0 <= t < 1:
            raise ValueError(f"angle {t} outside [0, 1)")
        return bisect_right(self.starts, t) - 1

    def piece_at(self, theta: Fraction) -> Piece:
        return self.pieces[self.piece_index(theta)]

    def lift_at(self, theta: Fraction) -> Fraction:
        return self.piece_at(theta).lift(theta)

    def breakpoints(self) -> List[Fraction]:
        return [p.start for p in self.pieces] + [self.pieces[-1].end]

    def sectors(self) -> List[Piece]:
        return [p for p in self.pieces if p.is_sector]


@dataclass(frozen=True)
class PlanePoint:
    """Polar point on the blown circle; the origin sits at r = −∞."""

    theta: float
    r: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta) % 1.0)
        object.__setattr__(self, "r", float(self.r))


@dataclass(frozen=True)
class SkewProductMap:
    coeffs: DoldCoefficients
    blowup: BlowupSchedule
    angular: AngularMap
    params: SectorParams

    @property
    def radial(self) -> type:
        return RadialRule

    @property
    def sectors(self) -> List[Piece]:
        return self.angular.sectors()

    @property
    def subsector_count(self) -> int:
        return sum(p.m for p in self.sectors)

    @cached_property
    def _tables(self) -> Dict[str, np.ndarray]:
        pieces = self.angular.pieces
        lo = np.array([float(p.start) for p in pieces])
        # outward rounding so boundary angles never fall between pieces
        lo[1:] = np.nextafter(lo[1:], -np.inf)
        kernels = np.array([
            [float(c) for c in p.kernel.angular_coeffs] if p.is_sector else _IDENTITY
            for p in pieces
        ])
        return {
            "lo": lo,
            "start": np.array([float(p.start) for p in pieces]),
            "end": np.array([float(p.end) for p in pieces]),
            "lift_start": np.array([float(p.lift_start) for p in pieces]),
            "lift_end": np.array([float(p.lift_end) for p in pieces]),
            "m": np.array([p.m for p in pieces], dtype=float),
            "sector": np.array([p.is_sector for p in pieces]),
            "kernel": kernels,
        }

    def step_lifted(self, theta: np.ndarray, r: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """One application of f on [0, 1) angles, returning the unreduced lift h(θ)."""
        t = self._tables
        theta = np.asarray(theta, dtype=float)
        r = np.asarray(r, dtype=float)
        idx = np.clip(np.searchsorted(t["lo"], theta, side="right") - 1, 0, len(t["lo"]) - 1)
        start, end, m = t["start"][idx], t["end"][idx], t["m"][idx]
        frac = np.clip((theta - start) / (end - start), 0.0, 1.0)
        u = frac * m
        i = np.minimum(np.floor(u), m - 1)
        loc = 2.0 * (u - i) - 1.0
        coeffs = t["kernel"][idx]
        phi = coeffs[:, -1]
        for j in range(coeffs.shape[1] - 2, -1, -1):
            phi = phi * loc + coeffs[:, j]
        s = (i + (phi + 1.0) / 2.0) / m
        lift = t["lift_start"][idx] + s * (t["lift_end"][idx] - t["lift_start"][idx])
        g = np.where(t["sector"][idx], 2.0 * loc * loc - 1.0, float(RadialRule.gap_value))
        return lift, r - g

    def step(self, theta: np.ndarray, r: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """One application of f to arrays of points."""
        lift, r = self.step_lifted(theta, r)
        new_theta = np.mod(lift, 1.0)
        return np.where(new_theta >= 1.0, 0.0, new_theta), r

    def step_exact(self, theta: Fraction, r: Fraction) -> Tuple[Fraction, Fraction]:
        theta = Fraction(theta)
        piece = self.angular.piece_at(theta)
        lift = piece.lift(theta)
        return lift - math.floor(lift), Fraction(r) - piece.displacement(theta)

    def lift_at(self, theta: Fraction) -> Fraction:
        return self.angular.lift_at(theta)

    def radial_at(self, theta: Fraction) -> Fraction:
        """Exact g(θ)."""
        return self.angular.piece_at(theta).displacement(theta)

    def project(self, theta: Fraction) -> Angle:
        return self.blowup.project(theta)


def _sector_pieces(blowup: BlowupSchedule, params: SectorParams) -> List[Piece]:
    lam = blowup.base_points
    out: List[Piece] = []
    for k, orbit in lam.orbits.items():
        param = params[k]
        for position, alpha in enumerate(orbit.points):
            left, right = blowup.intervals[alpha]
            image = doubling(alpha)
            turn = 1 if alpha.value >= Fraction(1, 2) else 0
            img_left, img_right = blowup.intervals[image]
            out.append(Piece(
                kind=SECTOR,
                start=left,
                end=right,
                lift_start=img_left + turn,
                lift_end=img_right + turn,
                period=k,
                position=position,
                alpha=alpha,
                m=param.m,
                sign=param.sign,
            ))
    return sorted(out, key=lambda p: p.start)


def _with_gaps(sectors: List[Piece]) -> List[Piece]:
    if not sectors:
        return [Piece(GAP, Fraction(0), Fraction(1), Fraction(0), Fraction(2))]
    pieces: List[Piece] = []
    first, last = sectors[0], sectors[-1]
    # the wrap-around gap runs from the last sector's right end to 1 + the first left end
    slope = (first.lift_start + 2 - last.lift_end) / (1 + first.start - last.end)
    lift_at_one = last.lift_end + slope * (1 - last.end)
    if first.start > 0:
        pieces.append(Piece(GAP, Fraction(0), first.start, lift_at_one - 2, first.lift_start))
    for a, b in zip(sectors, sectors[1:]):
        pieces.append(a)
        pieces.append(Piece(GAP, a.end, b.start, a.lift_end, b.lift_start))
    pieces.append(last)
    if last.end < 1:
        pieces.append(Piece(GAP, last.end, Fraction(1), last.lift_end, lift_at_one))
    return pieces


def build_from_parts(
    coeffs: DoldCoefficients,
    lam: LambdaSet,
    params: SectorParams,
    base_width: Fraction,
) -> SkewProductMap:
    """
    Assemble f from Λ, the sector parameters and the blown interval width.

    Raises:
        ValueError: parameters and Λ disagree on the period set
    """
    if set(params.periods()) != set(lam.periods()):
        raise ValueError(f"sector periods {params.periods()} do not match lambda periods {lam.periods()}")
    blowup = BlowupSchedule(lam, Fraction(base_width))
    pieces = _with_gaps(_sector_pieces(blowup, params))
    return SkewProductMap(coeffs, blowup, AngularMap(tuple(pieces)), params)


def build_map(coeffs: DoldCoefficients) -> SkewProductMap:
    """
    Build the skew product realizing the coefficients.

    Raises:
        NonPrimitiveWordError: propagated from the orbit selection
    """
    periods = support_periods(coeffs)
    lam = build_lambda(periods, max(periods, default=1))
    params = assign_sector_params(coeffs)
    base_width = min_gap(lam) / 4 if periods else Fraction(0)
    f = build_from_parts(coeffs, lam, params, base_width)
    log.info(
        "map built coeffs=%s periods=%s sectors=%d subsectors=%d",
        format_coefficients(coeffs) or "-",
        sorted(periods),
        len(f.sectors),
        f.subsector_count,
    )
    return f


def evaluate(f: SkewProductMap, p: PlanePoint) -> PlanePoint:
    theta, r = f.step(np.array([p.theta]), np.array([p.r]))
    return PlanePoint(float(theta[0]), float(r[0]))


def iterate_arrays(f: SkewProductMap, theta: np.ndarray, r: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    for _ in range(n):
        theta, r = f.step(theta, r)
    return theta, r


def iterate_lifted(f: SkewProductMap, theta: np.ndarray, r: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    n steps tracking the real lift of hⁿ: H(x + 1) = H(x) + 2, so hⁿ(θ + 1) = hⁿ(θ) + 2ⁿ.
    """
    lifted = np.asarray(theta, dtype=float)
    r = np.asarray(r, dtype=float)
    for _ in range(n):
        turns = np.floor(lifted)
        lift, r = f.step_lifted(lifted - turns, r)
        lifted = 2.0 * turns + lift
    return lifted, r


def iterate(f: SkewProductMap, p: PlanePoint, n: int) -> PlanePoint:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    theta, r = iterate_arrays(f, np.array([p.theta]), np.array([p.r]), n)
    return PlanePoint(float(theta[0]), float(r[0]))


def sector_cycles_fixed_by(f: SkewProductMap, n: int) -> List[Tuple[int, List[Piece]]]:
    """Sector cycles whose period divides n, as (k, sectors in orbit order)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    out = []
    for k in f.params.periods():
        if n % k == 0:
            cycle = sorted((p for p in f.sectors if p.period == k), key=lambda p: p.position)
            out.append((k, cycle))
    return out


@dataclass(frozen=True)
class PeriodicRay:
    theta: Fraction
    period: int
    kind: str


def periodic_rays(f: SkewProductMap) -> List[PeriodicRay]:
    """The 2m+1 periodic rays of every sector, edges attracting and centres repelling."""
    out = []
    for p in f.sectors:
        for theta, kind in p.grid():
            out.append(PeriodicRay(theta, p.period, kind))
    return out


@dataclass(frozen=True)
class EscapeReport:
    samples: int
    steps: int
    band: float
    escaped_up: int
    escaped_down: int
    suspects: Tuple[Tuple[float, int], ...]
    min_fraction: float = 0.99

    @property
    def escaped_fraction(self) -> float:
        return (self.escaped_up + self.escaped_down) / self.samples

    @property
    def ok(self) -> bool:
        return self.escaped_fraction >= self.min_fraction and not self.suspects


def _kronecker(count: int, seed: int) -> np.ndarray:
    offset = np.random.default_rng(seed).random()
    golden = (math.sqrt(5.0) - 1.0) / 2.0
    return np.mod(offset + golden * np.arange(count), 1.0)


def escape_scan(
    f: SkewProductMap,
    samples: int,
    steps: int,
    band: float,
    seeds: Sequence[float] = (),
    seed: int = 0,
    tol: float = 1e-9,
    min_fraction: float = 0.99,
) -> EscapeReport:
    """
    Iterate quasi-random starts on r = 0 and report radial escape and near-returns.

    A start is a periodicity suspect if some iterate comes within `tol` of it in both
    coordinates. A warning is logged when fewer than `min_fraction` of the starts
    leave the band |r| ≤ band.
    """
    if samples < 1 or steps < 1:
        raise ValueError("samples and steps must be >= 1")
    theta0 = np.concatenate([np.asarray(seeds, dtype=float), _kronecker(samples, seed)])
    r0 = np.zeros_like(theta0)
    theta, r = theta0.copy(), r0.copy()
    first_return = np.full(theta0.shape, -1)
    for t in range(1, steps + 1):
        theta, r = f.step(theta, r)
        d = np.abs(theta - theta0)
        d = np.minimum(d, 1.0 - d)
        back = (d < tol) & (np.abs(r - r0) < tol) & (first_return < 0)
        first_return[back] = t
    suspects = tuple((float(theta0[i]), int(first_return[i])) for i in np.flatnonzero(first_return >= 0))
    report = EscapeReport(
        samples=len(theta0),
        steps=steps,
        band=band,
        escaped_up=int(np.sum(r > band)),
        escaped_down=int(np.sum(r < -band)),
        suspects=suspects,
        min_fraction=min_fraction,
    )
    if suspects:
        log.warning("escape scan: %d periodicity suspects", len(suspects))
    if report.escaped_fraction < min_fraction:
        log.warning(
            "escape scan: only %.4f of %d starts reached |r| > %g after %d steps (expected >= %.4f)",
            report.escaped_fraction, report.samples, band, steps, min_fraction,
        )
    else:
        log.debug("escape scan: %.4f escaped beyond %g", report.escaped_fraction, band)
    return report


__all__ = [
    "GAP",
    "SECTOR",
    "SectorParam",
    "SectorParams",
    "assign_sector_params",
    "BlowupSchedule",
    "Piece",
    "RadialRule",
    "AngularMap",
    "PlanePoint",
    "SkewProductMap",
    "build_from_parts",
    "build_map",
    "evaluate",
    "iterate",
    "iterate_arrays",
    "iterate_lifted",
    "sector_cycles_fixed_by",
    "PeriodicRay",
    "periodic_rays",
    "EscapeReport",
    "escape_scan",
]
