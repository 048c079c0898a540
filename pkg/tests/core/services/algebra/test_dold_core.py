from __future__ import annotations

import numpy as np
import pytest

from src.core.services.algebra.dold_core import (
    DoldCoefficients,
    DoldCongruenceError,
    IndexSequence,
    InvalidLiteralError,
    check_congruences,
    divisors,
    expand,
    format_coefficients,
    index_target,
    invert,
    mobius,
    normalized_sequence,
    parse_coefficients,
    parse_index,
    support_periods,
)


@pytest.mark.parametrize(
    "k, N, expected",
    [
        (3, 7, (0, 0, 3, 0, 0, 3, 0)),
        (1, 4, (1, 1, 1, 1)),
        (5, 4, (0, 0, 0, 0)),
    ],
)
def test_normalized_sequence(k, N, expected):
    assert normalized_sequence(k, N).values == expected


@pytest.mark.parametrize(
    "coeffs, N, expected",
    [
        ({1: 2}, 3, (2, 2, 2)),
        ({1: 1, 2: -3}, 4, (1, -5, 1, -5)),
        ({}, 3, (0, 0, 0)),
    ],
)
def test_expand(coeffs, N, expected):
    assert expand(DoldCoefficients(coeffs), N).values == expected


def test_expand_is_sum_of_normalized_sequences():
    coeffs = DoldCoefficients({1: 1, 2: -3})
    combined = normalized_sequence(1, 6)
    for _ in range(3):
        combined = combined + IndexSequence(tuple(-v for v in normalized_sequence(2, 6).values))
    assert expand(coeffs, 6) == combined


@pytest.mark.parametrize("k", [1, 2, 5, 7])
def test_normalized_sequence_is_expand_of_unit_coefficient(k):
    assert normalized_sequence(k, 14) == expand(DoldCoefficients({k: 1}), 14)


@pytest.mark.parametrize("k, N", [(0, 3), (-1, 3), (2, 0), (2, -4)])
def test_normalized_sequence_rejects_bad_arguments(k, N):
    with pytest.raises(ValueError):
        normalized_sequence(k, N)


def test_adding_an_expansion_keeps_the_verdict():
    passing = IndexSequence((1, 3, 1, 3, 1, 3))
    failing = IndexSequence((1, 2, 1, 3, 1, 3))
    extra = expand(DoldCoefficients({1: -2, 2: 5, 3: 1}), 6)
    assert check_congruences(passing + extra).ok
    assert check_congruences(failing) == check_congruences(failing + extra)


def test_adding_sequences_of_different_lengths_fails():
    with pytest.raises(ValueError):
        IndexSequence((1, 1)) + IndexSequence((1, 1, 1))


@pytest.mark.parametrize(
    "index, expected",
    [
        ((1, 1, 1, 1), {1: 1}),
        ((0, 2, 0, 2), {2: 1}),
    ],
)
def test_invert(index, expected):
    assert invert(IndexSequence(index)) == DoldCoefficients(expected)


def test_invert_reports_first_failing_period():
    with pytest.raises(DoldCongruenceError) as exc:
        invert(IndexSequence((1, 2)))
    assert exc.value.n == 2
    assert exc.value.residue == 1


@pytest.mark.parametrize(
    "index, ok, n",
    [
        ((2, 2, 2, 2), True, None),
        ((1, 3), True, None),
        ((0, 1), False, 2),
    ],
)
def test_check_congruences(index, ok, n):
    verdict = check_congruences(IndexSequence(index))
    assert verdict.ok is ok
    assert verdict.n == n


@pytest.mark.parametrize(
    "coeffs, expected",
    [
        ({1: 1}, set()),
        ({2: -3}, {1, 2}),
        ({1: 2, 3: 1}, {1, 3}),
    ],
)
def test_support_periods(coeffs, expected):
    assert support_periods(DoldCoefficients(coeffs)) == frozenset(expected)


def test_zero_entries_are_dropped():
    assert DoldCoefficients({1: 0}) == DoldCoefficients({})
    assert DoldCoefficients({3: 0, 2: 5}).support() == [2]


def test_round_trip_on_random_maps():
    rng = np.random.default_rng(0)
    N = 12
    for _ in range(1000):
        size = int(rng.integers(0, 6))
        ks = rng.choice(np.arange(1, N + 7), size=size, replace=False)
        coeffs = DoldCoefficients({int(k): int(rng.integers(-5, 6)) for k in ks})
        seq = expand(coeffs, N)
        assert check_congruences(seq).ok
        assert invert(seq) == coeffs.restrict(N)


@pytest.mark.parametrize("k", range(1, 13))
def test_normalized_sequences_pass_congruences(k):
    assert check_congruences(normalized_sequence(k, 24)).ok


def test_index_target_matches_expand():
    coeffs = DoldCoefficients({1: 2, 3: -1, 4: 2})
    seq = expand(coeffs, 12)
    assert [index_target(coeffs, n) for n in range(1, 13)] == list(seq.values)


def test_mobius_and_divisors():
    assert [mobius(n) for n in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]
    assert divisors(12) == [1, 2, 3, 4, 6, 12]


def test_index_sequence_is_one_based():
    seq = IndexSequence((4, 5, 6))
    assert seq[1] == 4 and seq[3] == 6
    with pytest.raises(IndexError):
        seq[0]


def test_literals():
    assert parse_coefficients("1:0, 2:-3") == DoldCoefficients({2: -3})
    assert parse_coefficients("") == DoldCoefficients({})
    assert format_coefficients(parse_coefficients("3:1,1:2")) == "1:2,3:1"
    assert parse_index("1, 3,1").values == (1, 3, 1)


@pytest.mark.parametrize("literal", ["1", "a:1", "0:2", "1:1,1:2"])
def test_bad_coefficient_literals(literal):
    with pytest.raises(InvalidLiteralError):
        parse_coefficients(literal)


@pytest.mark.parametrize("literal", ["", "1,x"])
def test_bad_index_literals(literal):
    with pytest.raises(InvalidLiteralError):
        parse_index(literal)
