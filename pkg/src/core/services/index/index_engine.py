from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.core.services.algebra.dold_core import DoldCoefficients, expand, format_coefficients
from src.core.services.maps.map_builder import (
    PlanePoint,
    SkewProductMap,
    build_map,
    iterate_lifted,
    sector_cycles_fixed_by,
)
from src.core.settings import get_settings

log = logging.getLogger("index")

TURN = 2.0 * math.pi
INTEGRALITY_TOL = 1e-6
# largest sweep of the angular drift hⁿ(θ) − θ allowed between adjacent samples
DRIFT_SWEEP = 0.25


class WindingRefinementError(RuntimeError):
    """Bisection hit max_depth with an unresolved pair of samples."""
    def __init__(self, n: int, ranges: List[Tuple[float, float]]):
        shown = ", ".join(f"[{a:.12g}, {b:.12g}]" for a, b in ranges[:5])
        super().__init__(f"winding refinement failed for n={n} on theta ranges {shown}")
        self.n = n
        self.ranges = ranges


class WindingIntegralityError(RuntimeError):
    """Total turning is not an integer multiple of 2π."""


def embed(p: PlanePoint, clamp: Optional[float] = None) -> Tuple[float, float]:
    """(θ, r) ↦ (e^r cos 2πθ, e^r sin 2πθ) with r clamped to ±clamp."""
    x, y = embed_arrays(np.array([p.theta]), np.array([p.r]), clamp)
    return float(x[0]), float(y[0])


def embed_arrays(theta: np.ndarray, r: np.ndarray, clamp: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    bound = get_settings().radial_clamp if clamp is None else clamp
    rho = np.exp(np.clip(r, -bound, bound))
    angle = TURN * np.asarray(theta, dtype=float)
    return rho * np.cos(angle), rho * np.sin(angle)


@dataclass(frozen=True)
class WindingComputation:
    n: int
    theta: np.ndarray
    vectors: np.ndarray
    increments: np.ndarray
    depth: int
    drift: Optional[np.ndarray] = None

    @property
    def total(self) -> float:
        return float(np.sum(self.increments))

    @property
    def result(self) -> int:
        return int(round(self.total / TURN))

    @property
    def samples(self) -> int:
        return len(self.theta)


def _displacement(
    f: SkewProductMap, theta: np.ndarray, n: int, r0: float, clamp: Optional[float]
) -> Tuple[np.ndarray, np.ndarray]:
    """v(θ) and the lifted angular drift hⁿ(θ) − θ."""
    r = np.full(theta.shape, r0, dtype=float)
    x0, y0 = embed_arrays(theta, r, clamp)
    lifted, r_n = iterate_lifted(f, theta, r, n)
    x1, y1 = embed_arrays(lifted, r_n, clamp)
    return np.column_stack([x0 - x1, y0 - y1]), lifted - theta


def _increments(v: np.ndarray) -> np.ndarray:
    """Signed turning from each sample to the next, closing the loop."""
    w = np.roll(v, -1, axis=0)
    cross = v[:, 0] * w[:, 1] - v[:, 1] * w[:, 0]
    dot = v[:, 0] * w[:, 0] + v[:, 1] * w[:, 1]
    return np.arctan2(cross, dot)


def _drift_sweeps(theta: np.ndarray, drift: np.ndarray, n: int) -> np.ndarray:
    """
    Bound on how far hⁿ(θ) − θ moves between each sample and the next.

    hⁿ is monotone, so on [θᵢ, θᵢ₊₁] the drift stays within
    [hⁿ(θᵢ) − θᵢ₊₁, hⁿ(θᵢ₊₁) − θᵢ]. The closing pair wraps with hⁿ(θ + 1) = hⁿ(θ) + 2ⁿ.
    """
    lifted = drift + theta
    nxt_lifted = np.append(lifted[1:], lifted[0] + 2.0 ** n)
    nxt_theta = np.append(theta[1:], theta[0] + 1.0)
    return (nxt_lifted - lifted) + (nxt_theta - theta)


def initial_samples(f: SkewProductMap, per_subsector: int) -> np.ndarray:
    """Uniform grid of per_subsector·(1 + #sub-sectors) angles plus per_subsector angles inside each sub-sector."""
    base = np.arange(per_subsector * (1 + f.subsector_count)) / (per_subsector * (1 + f.subsector_count))
    extra = []
    offsets = (np.arange(per_subsector) + 0.5) / per_subsector
    for p in f.sectors:
        start, span = float(p.start), float(p.end - p.start) / p.m
        for i in range(p.m):
            extra.append(start + span * (i + offsets))
    return np.unique(np.concatenate([base] + extra))


def winding_computation(
    f: SkewProductMap,
    n: int,
    max_depth: Optional[int] = None,
    r0: float = 0.0,
    per_subsector: Optional[int] = None,
    clamp: Optional[float] = None,
) -> WindingComputation:
    """
    Winding number of v(θ) = γ(θ) − fⁿ(γ(θ)) along the circle r = r0.

    Adjacent samples are bisected until every turning increment is below π/2 and
    the angular drift hⁿ(θ) − θ sweeps less than a quarter turn between them. A
    full turn of v needs the drift to sweep half a turn, so no loop can hide
    between two accepted samples.

    Raises:
        WindingRefinementError: max_depth reached with an unresolved pair
        WindingIntegralityError: the closed total is not a multiple of 2π
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    settings = get_settings()
    depth_limit = settings.winding_max_depth if max_depth is None else max_depth
    density = settings.winding_samples_per_subsector if per_subsector is None else per_subsector

    theta = initial_samples(f, density)
    v, drift = _displacement(f, theta, n, r0, clamp)
    if np.any(np.hypot(v[:, 0], v[:, 1]) == 0.0):
        raise WindingRefinementError(n, [(float(t), float(t)) for t in theta[np.hypot(v[:, 0], v[:, 1]) == 0.0]])
    inc = _increments(v)
    depth = 0
    while True:
        bad = np.flatnonzero(
            (np.abs(inc) >= math.pi / 2) | (_drift_sweeps(theta, drift, n) >= DRIFT_SWEEP)
        )
        if bad.size == 0:
            break
        nxt = np.append(theta[1:], 1.0)
        if depth >= depth_limit:
            raise WindingRefinementError(n, [(float(theta[i]), float(nxt[i])) for i in bad])
        mids = (theta[bad] + nxt[bad]) / 2.0
        v_mid, drift_mid = _displacement(f, mids, n, r0, clamp)
        theta = np.insert(theta, bad + 1, mids)
        v = np.insert(v, bad + 1, v_mid, axis=0)
        drift = np.insert(drift, bad + 1, drift_mid)
        inc = _increments(v)
        depth += 1

    comp = WindingComputation(n, theta, v, inc, depth, drift)
    if abs(comp.total - TURN * comp.result) > INTEGRALITY_TOL * TURN:
        raise WindingIntegralityError(f"n={n}: total turning {comp.total} is not a multiple of 2π")
    log.debug("winding n=%d samples=%d depth=%d result=%d", n, comp.samples, depth, comp.result)
    return comp


def winding_index(
    f: SkewProductMap,
    n: int,
    max_depth: Optional[int] = None,
    r0: float = 0.0,
    per_subsector: Optional[int] = None,
    clamp: Optional[float] = None,
) -> int:
    return winding_computation(f, n, max_depth, r0, per_subsector, clamp).result


def combinatorial_index(f: SkewProductMap, n: int) -> int:
    """1 + Σ sign·m over every sector whose period divides n."""
    total = 1
    for k, cycle in sector_cycles_fixed_by(f, n):
        total += f.params[k].contribution * len(cycle)
    return total


@dataclass(frozen=True)
class IndexRow:
    n: int
    numeric: int
    combinatorial: int
    target: int
    samples: int
    depth: int
    curve: Optional[Tuple[Tuple[float, float, float], ...]] = None

    @property
    def agree(self) -> bool:
        return self.numeric == self.combinatorial == self.target


@dataclass(frozen=True)
class IndexReport:
    coeffs: DoldCoefficients
    N: int
    rows: Tuple[IndexRow, ...]

    @property
    def agree(self) -> bool:
        return all(row.agree for row in self.rows)

    def to_frame(self):
        return pd.DataFrame(
            [
                {"n": r.n, "numeric": r.numeric, "combinatorial": r.combinatorial,
                 "target": r.target, "agree": r.agree, "samples": r.samples}
                for r in self.rows
            ]
        ).set_index("n")


def _row(
    f: SkewProductMap,
    n: int,
    target: int,
    max_depth: Optional[int],
    per_subsector: Optional[int],
    keep_curve: bool,
) -> IndexRow:
    comp = winding_computation(f, n, max_depth, per_subsector=per_subsector)
    curve = None
    if keep_curve:
        curve = tuple(
            (float(t), float(x), float(y)) for t, (x, y) in zip(comp.theta, comp.vectors)
        )
    return IndexRow(
        n=n,
        numeric=comp.result,
        combinatorial=combinatorial_index(f, n),
        target=target,
        samples=comp.samples,
        depth=comp.depth,
        curve=curve,
    )


def verify(
    coeffs: DoldCoefficients,
    N: int,
    max_depth: Optional[int] = None,
    per_subsector: Optional[int] = None,
    keep_curve: bool = False,
    n_jobs: Optional[int] = None,
) -> IndexReport:
    """
    Build the map once and compare numeric, combinatorial and target indices for n ≤ N.

    Raises:
        WindingRefinementError, WindingIntegralityError
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    f = build_map(coeffs)
    targets = expand(coeffs, N)
    jobs = get_settings().n_jobs if n_jobs is None else n_jobs
    rows = Parallel(n_jobs=jobs)(
        delayed(_row)(f, n, targets[n], max_depth, per_subsector, keep_curve) for n in range(1, N + 1)
    )
    report = IndexReport(coeffs, N, tuple(rows))
    log.info(
        "verify coeffs=%s N=%d agree=%s",
        format_coefficients(coeffs) or "-",
        N,
        report.agree,
    )
    return report


__all__ = [
    "WindingRefinementError",
    "WindingIntegralityError",
    "embed",
    "embed_arrays",
    "WindingComputation",
    "initial_samples",
    "winding_computation",
    "winding_index",
    "combinatorial_index",
    "IndexRow",
    "IndexReport",
    "verify",
]
