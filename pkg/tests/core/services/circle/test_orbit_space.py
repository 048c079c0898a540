from __future__ import annotations

import itertools
from fractions import Fraction

import pytest

from src.core.services.circle.orbit_space import (
    Angle,
    LambdaSet,
    NotPeriodicError,
    build_lambda,
    circular_distance,
    doubling,
    min_gap,
    orbit_of,
    periodic_angles,
    ptm_orbit,
    rotate,
    separation_proxy,
    word_to_angle,
)


def A(text):
    return Angle.parse(text)


@pytest.mark.parametrize("w, expected", [("100", "4/7"), ("0", "0"), ("01", "1/3")])
def test_word_to_angle(w, expected):
    assert word_to_angle(w) == A(expected)


@pytest.mark.parametrize("a, expected", [("4/7", "1/7"), ("0", "0"), ("1/3", "2/3")])
def test_doubling(a, expected):
    assert doubling(A(a)) == A(expected)


@pytest.mark.parametrize(
    "a, points",
    [
        ("1/3", ["1/3", "2/3"]),
        ("0", ["0"]),
        ("3/7", ["3/7", "6/7", "5/7"]),
    ],
)
def test_orbit_of(a, points):
    orbit = orbit_of(A(a))
    assert orbit.points == tuple(A(p) for p in points)
    assert orbit.period == len(points)


def test_orbit_of_rejects_even_denominator():
    with pytest.raises(NotPeriodicError):
        orbit_of(A("1/4"))


def test_semiconjugation_exhaustive():
    for n in range(1, 13):
        for bits in itertools.product("01", repeat=n):
            w = "".join(bits)
            assert doubling(word_to_angle(w)) == word_to_angle(rotate(w, 1)), w


def test_angle_normalization_and_format():
    assert Angle(Fraction(5, 3)) == A("2/3")
    assert str(A("0")) == "0/1"
    assert float(A("1/4")) == 0.25


def test_build_lambda():
    assert build_lambda({1}, 1).orbits[1].points == (A("0"),)
    lam = build_lambda({1, 2}, 2)
    assert lam.periods() == [1, 2]
    assert set(lam.orbits[2].points) == {A("1/3"), A("2/3")}
    assert len(build_lambda(set(), 4)) == 0


def test_build_lambda_rejects_large_period():
    with pytest.raises(ValueError):
        build_lambda({5}, 4)


def test_ptm_orbits_have_their_period():
    for k in range(1, 33):
        assert ptm_orbit(k).period == k


def test_min_gap():
    assert min_gap(build_lambda({1, 2}, 2)) == Fraction(1, 3)
    assert min_gap(build_lambda({1}, 1)) == 1
    # 2/3 = 14/21 and 5/7 = 15/21 are the closest pair
    assert min_gap(build_lambda({1, 2, 3}, 3)) == Fraction(1, 21)


def test_min_gap_of_empty_set():
    with pytest.raises(ValueError):
        min_gap(LambdaSet({}))


def test_lambda_points_sorted_and_period_of():
    lam = build_lambda({1, 2, 3}, 3)
    pts = lam.points()
    assert pts == sorted(pts)
    assert lam.period_of(A("5/7")) == 3
    with pytest.raises(KeyError):
        lam.period_of(A("1/5"))


def test_circular_distance():
    assert circular_distance(A("1/8"), A("7/8")) == Fraction(1, 4)


def test_periodic_angles():
    found = periodic_angles(3)
    assert len(found) == 1 + 2 + 6
    assert (A("0"), 1) in found
    assert (A("5/7"), 3) in found


def test_separation_probe_zero():
    report = separation_proxy(64, 1)
    assert report.ok
    (row,) = report.rows
    assert row.beta == A("0")
    assert row.distances[0] is None
    assert all(d is not None and d > 0 for d in row.distances[1:])
    assert row.floor > 0


def test_separation_floors_positive_for_period_three():
    report = separation_proxy(64, 3)
    assert report.ok
    assert all(r.floor is not None and r.floor > 0 for r in report.rows)
    frame = report.to_frame()
    assert frame.shape == (64, 9)


def test_separation_empty_probe_set():
    report = separation_proxy(8, 0)
    assert report.rows == ()
    assert report.ok


def test_separation_single_row():
    report = separation_proxy(1, 2)
    assert all(len(r.distances) == 1 for r in report.rows)
