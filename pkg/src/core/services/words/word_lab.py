from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

log = logging.getLogger("words")

ALPHABET = frozenset("01")


class NonPrimitiveWordError(ValueError):
    """A Prouhet–Thue–Morse prefix turned out to be a proper power."""
    def __init__(self, n: int, word: str):
        super().__init__(f"ptm prefix of length {n} is not primitive: {word}")
        self.n = n
        self.word = word


class Word(str):
    """Finite word over {0,1}."""

    def __new__(cls, content: str):
        content = str(content)
        if not set(content) <= ALPHABET:
            raise ValueError(f"word must be over {{0,1}}: {content!r}")
        return str.__new__(cls, content)

    def rotate(self, k: int) -> "Word":
        if not self:
            return self
        k %= len(self)
        return Word(self[k:] + self[:k])


@dataclass(frozen=True)
class PeriodicStream:
    """The infinite repetition of `generator`; `least_period` divides its length."""

    generator: Word
    least_period: int

    def __post_init__(self):
        if len(self.generator) % self.least_period:
            raise ValueError("least period must divide the generator length")

    def prefix(self, length: int) -> Word:
        reps = length // len(self.generator) + 1
        return Word((self.generator * reps)[:length])

    def __str__(self) -> str:
        return f"({self.generator})*"


def least_period(w: str) -> int:
    """Least period of the stream generated by w."""
    if not w:
        raise ValueError("empty word")
    return (w + w).find(w, 1)


def stream_of(w: str) -> PeriodicStream:
    word = Word(w)
    return PeriodicStream(word, least_period(word))


def shift(stream: PeriodicStream) -> PeriodicStream:
    """σ on periodic streams: drop the first symbol."""
    return PeriodicStream(stream.generator.rotate(1), stream.least_period)


def ptm_prefix(n: int) -> Word:
    """
    First n symbols of the Prouhet–Thue–Morse sequence, by iterating 0 -> 01, 1 -> 10.

    Raises:
        ValueError: n < 1
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    word = "0"
    flip = str.maketrans("01", "10")
    while len(word) < n:
        word = word + word.translate(flip)
    return Word(word[:n])


def find_power(w: str, k: int) -> Optional[Tuple[int, Word]]:
    """
    First factor u^k of w, scanning start positions then block lengths.

    Returns:
        (start, u) or None when w is k-power-free
    """
    if k < 2:
        raise ValueError(f"exponent must be >= 2, got {k}")
    n = len(w)
    for start in range(n):
        for size in range(1, (n - start) // k + 1):
            block = w[start:start + size]
            if all(w[start + j * size:start + (j + 1) * size] == block for j in range(1, k)):
                return start, Word(block)
    return None


def is_k_power_free(w: str, k: int) -> bool:
    return find_power(w, k) is None


def conjugates(w: str) -> List[Word]:
    """All rotations of w in rotation order, duplicates kept."""
    word = Word(w)
    if not word:
        raise ValueError("empty word")
    return [word.rotate(i) for i in range(len(word))]


def is_primitive(w: str) -> bool:
    return least_period(w) == len(w)


def circular_power_witness(w: str, k: int) -> Optional[Tuple[int, Word]]:
    """
    First conjugate of w (by rotation) starting with u^k, k·|u| ≤ |w|.

    Returns:
        (rotation, u) or None
    """
    if k < 2:
        raise ValueError(f"exponent must be >= 2, got {k}")
    limit = len(w) // k
    if limit == 0:
        return None
    for rotation, c in enumerate(conjugates(w)):
        for size in range(1, limit + 1):
            if c[:k * size] == c[:size] * k:
                return rotation, Word(c[:size])
    return None


def circular_k_power_free(w: str, k: int) -> bool:
    """No conjugate of w starts with u^k for a nonempty u with k·|u| ≤ |w|."""
    return circular_power_witness(w, k) is None


def build_A(n_max: int) -> Dict[int, List[PeriodicStream]]:
    """
    Streams of every s_n = ptm_prefix(n), n ≤ n_max, together with their shifts.

    Returns:
        {n: [stream of s_n and its n conjugates' streams, in rotation order]}

    Raises:
        NonPrimitiveWordError: some s_n is a proper power
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    out: Dict[int, List[PeriodicStream]] = {}
    for n in range(1, n_max + 1):
        s_n = ptm_prefix(n)
        if not is_primitive(s_n):
            raise NonPrimitiveWordError(n, s_n)
        out[n] = [PeriodicStream(c, n) for c in conjugates(s_n)]
    log.debug("A built up to n_max=%d (%d streams)", n_max, sum(len(v) for v in out.values()))
    return out


@dataclass(frozen=True)
class AAudit:
    """Outcome of checking properties (a)-(c) of A up to n_max."""

    n_max: int
    k: int
    missing_periods: Tuple[int, ...]
    not_shift_closed: Tuple[int, ...]
    power_prefixed: Tuple[Tuple[int, str], ...]

    @property
    def ok(self) -> bool:
        return not (self.missing_periods or self.not_shift_closed or self.power_prefixed)


def audit_A(n_max: int, k: int = 6) -> AAudit:
    """
    (a) a stream of least period n for every n, (b) closure under σ,
    (c) no stream whose generator has a conjugate starting with u^k, k·|u| ≤ n.
    """
    streams = build_A(n_max)
    missing: List[int] = []
    not_closed: List[int] = []
    prefixed: List[Tuple[int, str]] = []
    for n, group in streams.items():
        if not any(s.least_period == n for s in group):
            missing.append(n)
        generators = {s.generator for s in group}
        if any(shift(s).generator not in generators for s in group):
            not_closed.append(n)
        if not circular_k_power_free(group[0].generator, k):
            prefixed.append((n, str(group[0].generator)))
    return AAudit(n_max, k, tuple(missing), tuple(not_closed), tuple(prefixed))


@dataclass(frozen=True)
class WordCheck:
    check: str
    n_max: int
    ok: bool
    n: Optional[int] = None
    word: Optional[str] = None
    position: Optional[int] = None


def scan_cube_free(n_max: int) -> WordCheck:
    """Cube-freeness of every s_n, n ≤ n_max, via the longest prefix (factors of a cube-free word are cube-free)."""
    hit = find_power(ptm_prefix(n_max), 3)
    if hit is None:
        return WordCheck("cube-free", n_max, True)
    start, block = hit
    return WordCheck("cube-free", n_max, False, n=n_max, word=str(block) * 3, position=start)


def scan_circular(n_max: int, k: int = 6) -> WordCheck:
    """Circular k-power-freeness of s_n for every n ≤ n_max; position is the offending rotation."""
    name = f"circular{k}"
    for n in range(1, n_max + 1):
        s_n = ptm_prefix(n)
        hit = circular_power_witness(s_n, k)
        if hit is not None:
            rotation, block = hit
            log.warning("%s: s_%d rotated by %d starts with (%s)^%d", name, n, rotation, block, k)
            return WordCheck(name, n_max, False, n=n, word=str(s_n), position=rotation)
    return WordCheck(name, n_max, True)


def scan_primitive(n_max: int) -> WordCheck:
    for n in range(1, n_max + 1):
        s_n = ptm_prefix(n)
        if not is_primitive(s_n):
            return WordCheck("primitive", n_max, False, n=n, word=str(s_n), position=least_period(s_n))
    return WordCheck("primitive", n_max, True)


__all__ = [
    "NonPrimitiveWordError",
    "Word",
    "PeriodicStream",
    "least_period",
    "stream_of",
    "shift",
    "ptm_prefix",
    "find_power",
    "is_k_power_free",
    "conjugates",
    "is_primitive",
    "circular_power_witness",
    "circular_k_power_free",
    "build_A",
    "AAudit",
    "audit_A",
    "WordCheck",
    "scan_cube_free",
    "scan_circular",
    "scan_primitive",
]
