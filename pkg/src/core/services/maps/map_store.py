from __future__ import annotations
import logging
from fractions import Fraction
from typing import Any, Dict, List

from src.core.services.algebra.dold_core import format_coefficients, parse_coefficients
from src.core.services.circle.orbit_space import Angle, LambdaSet, PeriodicOrbit
from src.core.services.maps.map_builder import (
    SectorParam,
    SectorParams,
    SkewProductMap,
    build_from_parts,
)
from src.core.services.storage import read_json, write_json
from src.models.registry import get_kernel, list_kernel_signs

log = logging.getLogger("maps")

SCHEMA = 1


class MapDumpError(ValueError):
    """Map dump is malformed or does not rebuild to the same map."""


def _q(x: Fraction) -> str:
    return str(Fraction(x))


def _piece_payload(p) -> Dict[str, Any]:
    return {
        "kind": p.kind,
        "start": _q(p.start),
        "end": _q(p.end),
        "lift_start": _q(p.lift_start),
        "lift_end": _q(p.lift_end),
        "period": p.period,
        "position": p.position,
        "alpha": None if p.alpha is None else str(p.alpha),
        "m": p.m,
        "sign": p.sign,
    }


def map_to_payload(f: SkewProductMap) -> Dict[str, Any]:
    """
    Full map description; every rational is a "p/q" string.
    """
    lam = f.blowup.base_points
    return {
        "schema": SCHEMA,
        "coefficients": format_coefficients(f.coeffs),
        "lambda": {
            str(k): [str(a) for a in orbit.points] for k, orbit in lam.orbits.items()
        },
        "base_width": _q(f.blowup.base_width),
        "width": _q(f.blowup.width),
        "intervals": [
            {"alpha": str(a), "left": _q(left), "right": _q(right)}
            for a, (left, right) in sorted(f.blowup.intervals.items())
        ],
        "sector_params": {
            str(k): {"m": f.params[k].m, "sign": f.params[k].sign} for k in f.params.periods()
        },
        "pieces": [_piece_payload(p) for p in f.angular.pieces],
        "kernels": {
            sign: [_q(c) for c in get_kernel(sign).c_coeffs] for sign in list_kernel_signs()
        },
    }


def map_from_payload(payload: Dict[str, Any]) -> SkewProductMap:
    """
    Rebuild a map from its dump.

    Raises:
        MapDumpError: malformed dump, unknown schema or breakpoint mismatch
    """
    try:
        if payload.get("schema") != SCHEMA:
            raise MapDumpError(f"unsupported schema: {payload.get('schema')!r}")
        coeffs = parse_coefficients(payload["coefficients"])
        orbits = {
            int(k): PeriodicOrbit(tuple(Angle.parse(a) for a in points))
            for k, points in payload["lambda"].items()
        }
        params = SectorParams({
            int(k): SectorParam(int(v["m"]), v["sign"])
            for k, v in payload["sector_params"].items()
        })
        base_width = Fraction(payload["base_width"])
        expected: List[str] = [p["start"] for p in payload["pieces"]]
        if payload["pieces"]:
            expected.append(payload["pieces"][-1]["end"])
        f = build_from_parts(coeffs, LambdaSet(orbits), params, base_width)
    except MapDumpError:
        raise
    except (KeyError, TypeError, AttributeError, ValueError, ZeroDivisionError) as e:
        raise MapDumpError(f"malformed map dump: {e}")

    rebuilt = [_q(b) for b in f.angular.breakpoints()]
    if rebuilt != expected:
        raise MapDumpError("rebuilt breakpoints differ from the dump")
    for sign, coeffs_literal in payload.get("kernels", {}).items():
        if sign not in list_kernel_signs():
            raise MapDumpError(f"unknown kernel sign {sign!r}")
        if [_q(c) for c in get_kernel(sign).c_coeffs] != list(coeffs_literal):
            raise MapDumpError(f"kernel {sign} differs from the registered one")
    return f


def save_map(f: SkewProductMap, out: str):
    """
    Save map dump.
    """
    path = write_json(map_to_payload(f), out)
    log.info("map dump written to %s", path)
    return path


def load_map(path: str) -> SkewProductMap:
    """
    Load map dump.

    Raises:
        FileNotFoundError, MapDumpError
    """
    try:
        payload = read_json(path)
    except ValueError as e:
        raise MapDumpError(f"not a JSON map dump: {e}")
    return map_from_payload(payload)


__all__ = [
    "MapDumpError",
    "map_to_payload",
    "map_from_payload",
    "save_map",
    "load_map",
]
