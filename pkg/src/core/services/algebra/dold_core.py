from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Tuple

from sympy import divisors as _sympy_divisors
from sympy import factorint

log = logging.getLogger("dold")


class DoldCongruenceError(ValueError):
    """Index sequence violates a Dold congruence."""
    def __init__(self, n: int, residue: int):
        super().__init__(f"Dold congruence fails at n={n}: residue {residue} mod {n}")
        self.n = n
        self.residue = residue


class InvalidLiteralError(ValueError):
    """Coefficient or index literal could not be parsed."""


@dataclass(frozen=True)
class DoldCoefficients:
    """Finitely supported integer coefficients a_k; zero entries are never stored."""

    entries: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        clean: Dict[int, int] = {}
        for k, a in dict(self.entries).items():
            k, a = int(k), int(a)
            if k < 1:
                raise ValueError(f"period must be >= 1, got {k}")
            if a != 0:
                clean[k] = a
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    def get(self, k: int) -> int:
        return self.entries.get(k, 0)

    def support(self) -> List[int]:
        return list(self.entries.keys())

    def items(self) -> Iterator[Tuple[int, int]]:
        return iter(self.entries.items())

    def restrict(self, n_max: int) -> "DoldCoefficients":
        return DoldCoefficients({k: a for k, a in self.entries.items() if k <= n_max})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DoldCoefficients):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self) -> int:
        return hash(tuple(self.entries.items()))


@dataclass(frozen=True)
class IndexSequence:
    """Prefix I_1..I_N of a fixed point index sequence."""

    values: Tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if len(vals) < 1:
            raise ValueError("index sequence must have length >= 1")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, n: int) -> int:
        """1-based access: seq[n] = I_n."""
        if n < 1 or n > len(self.values):
            raise IndexError(n)
        return self.values[n - 1]

    def __add__(self, other: "IndexSequence") -> "IndexSequence":
        if len(other) != len(self):
            raise ValueError("length mismatch")
        return IndexSequence(tuple(a + b for a, b in zip(self.values, other.values)))


PeriodSet = FrozenSet[int]


@dataclass(frozen=True)
class CongruenceVerdict:
    ok: bool
    n: Optional[int] = None
    residue: Optional[int] = None


def divisors(n: int) -> List[int]:
    return [int(d) for d in _sympy_divisors(n)]


def mobius(n: int) -> int:
    """Möbius function by factorization."""
    if n < 1:
        raise ValueError(f"mobius undefined for {n}")
    factors = factorint(n)
    if any(e > 1 for e in factors.values()):
        return 0
    return -1 if len(factors) % 2 else 1


def normalized_sequence(k: int, N: int) -> IndexSequence:
    """σ^k truncated to N terms: k at multiples of k, 0 elsewhere."""
    if k < 1 or N < 1:
        raise ValueError(f"need k >= 1 and N >= 1, got k={k} N={N}")
    return IndexSequence(tuple(k if n % k == 0 else 0 for n in range(1, N + 1)))


def index_target(coeffs: DoldCoefficients, n: int) -> int:
    """Σ_{k|n} k·a_k."""
    return sum(k * a for k, a in coeffs.items() if n % k == 0)


def expand(coeffs: DoldCoefficients, N: int) -> IndexSequence:
    """
    Expand coefficients into the index sequence I_n = Σ_{k|n} k·a_k.

    Raises:
        ValueError: N < 1
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return IndexSequence(tuple(index_target(coeffs, n) for n in range(1, N + 1)))


def _mobius_sum(seq: IndexSequence, n: int) -> int:
    return sum(mobius(n // d) * seq[d] for d in divisors(n))


def check_congruences(seq: IndexSequence) -> CongruenceVerdict:
    """
    Check n | Σ_{d|n} μ(n/d)·I_d for every n ≤ N.

    Returns:
        CongruenceVerdict(ok=True) or the first failing n with its residue.
    """
    for n in range(1, len(seq) + 1):
        residue = _mobius_sum(seq, n) % n
        if residue:
            return CongruenceVerdict(ok=False, n=n, residue=residue)
    return CongruenceVerdict(ok=True)


def invert(seq: IndexSequence) -> DoldCoefficients:
    """
    Recover a_k = (1/k)·Σ_{d|k} μ(k/d)·I_d by Möbius inversion.

    Raises:
        DoldCongruenceError: the first k where the division is not exact
    """
    out: Dict[int, int] = {}
    for k in range(1, len(seq) + 1):
        total = _mobius_sum(seq, k)
        q, residue = divmod(total, k)
        if residue:
            raise DoldCongruenceError(k, residue)
        out[k] = q
    coeffs = DoldCoefficients(out)
    log.debug("inverted N=%d -> %s", len(seq), format_coefficients(coeffs))
    return coeffs


def support_periods(coeffs: DoldCoefficients) -> PeriodSet:
    """1 ∈ 𝒫 iff a_1 ≠ 1; k ∈ 𝒫 iff a_k ≠ 0 for k > 1."""
    periods = {k for k in coeffs.support() if k > 1}
    if coeffs.get(1) != 1:
        periods.add(1)
    return frozenset(periods)


# Literals

def parse_coefficients(literal: str) -> DoldCoefficients:
    """
    Parse `k:a_k,k:a_k`; the empty literal is the empty combination.

    Raises:
        InvalidLiteralError
    """
    text = (literal or "").strip()
    if not text:
        return DoldCoefficients({})
    out: Dict[int, int] = {}
    for chunk in text.split(","):
        key, sep, value = chunk.strip().partition(":")
        if not sep:
            raise InvalidLiteralError(f"expected k:a_k, got {chunk!r}")
        try:
            k, a = int(key), int(value)
        except ValueError:
            raise InvalidLiteralError(f"non-integer pair {chunk!r}")
        if k < 1:
            raise InvalidLiteralError(f"period must be >= 1 in {chunk!r}")
        if k in out:
            raise InvalidLiteralError(f"duplicate period {k}")
        out[k] = a
    return DoldCoefficients(out)


def parse_index(literal: str) -> IndexSequence:
    """
    Parse `i1,i2,...`.

    Raises:
        InvalidLiteralError
    """
    parts = [p.strip() for p in (literal or "").split(",") if p.strip()]
    if not parts:
        raise InvalidLiteralError("index sequence literal is empty")
    try:
        return IndexSequence(tuple(int(p) for p in parts))
    except ValueError as e:
        raise InvalidLiteralError(str(e))


def format_coefficients(coeffs: DoldCoefficients) -> str:
    return ",".join(f"{k}:{a}" for k, a in coeffs.items())


__all__ = [
    "DoldCoefficients",
    "IndexSequence",
    "PeriodSet",
    "CongruenceVerdict",
    "DoldCongruenceError",
    "InvalidLiteralError",
    "divisors",
    "mobius",
    "normalized_sequence",
    "index_target",
    "expand",
    "check_congruences",
    "invert",
    "support_periods",
    "parse_coefficients",
    "parse_index",
    "format_coefficients",
]
