from __future__ import annotations

import math

import numpy as np
import pytest

from src.core.services.algebra.dold_core import DoldCoefficients, expand
from src.core.services.maps.map_builder import PlanePoint, build_map
from src.core.services.index.index_engine import (
    DRIFT_SWEEP,
    WindingRefinementError,
    combinatorial_index,
    embed,
    verify,
    winding_computation,
    winding_index,
)


def make(coeffs):
    return build_map(DoldCoefficients(coeffs))


def random_coefficients(rng):
    size = int(rng.integers(1, 6))
    ks = rng.choice(np.arange(1, 6), size=size, replace=False)
    return DoldCoefficients({int(k): int(rng.integers(-3, 4)) for k in ks})


def test_embed():
    assert embed(PlanePoint(0.0, 0.0)) == pytest.approx((1.0, 0.0))
    assert embed(PlanePoint(0.25, 0.0)) == pytest.approx((0.0, 1.0), abs=1e-15)
    assert embed(PlanePoint(0.0, 60.0)) == pytest.approx((math.exp(50.0), 0.0))
    assert embed(PlanePoint(0.0, 60.0), clamp=2.0) == pytest.approx((math.exp(2.0), 0.0))


@pytest.mark.parametrize("n", [1, 2, 5])
def test_sector_free_map_has_index_one(n):
    assert winding_index(make({1: 1}), n) == 1


@pytest.mark.parametrize("n", range(1, 9))
def test_f_minus(n):
    f = make({1: 0})
    assert winding_index(f, n) == 0
    assert combinatorial_index(f, n) == 0


@pytest.mark.parametrize("n", range(1, 9))
def test_f_plus(n):
    f = make({1: 2})
    assert winding_index(f, n) == 2
    assert combinatorial_index(f, n) == 2


@pytest.mark.parametrize("m", [1, 2, 3, 4])
@pytest.mark.parametrize("sign", [-1, 1])
def test_multi_sector_fixtures(m, sign):
    value = 1 + sign * m
    f = make({1: value})
    for n in range(1, 7):
        assert winding_index(f, n) == value
        assert combinatorial_index(f, n) == value


@pytest.mark.parametrize("n, expected", [(1, 1), (2, -5), (3, 1), (4, -5)])
def test_combinatorial_period_two(n, expected):
    assert combinatorial_index(make({1: 1, 2: -3}), n) == expected


def test_combinatorial_rejects_n_zero():
    with pytest.raises(ValueError):
        combinatorial_index(make({1: 0}), 0)


def test_winding_rejects_n_zero():
    with pytest.raises(ValueError):
        winding_index(make({1: 0}), 0)


@pytest.mark.parametrize("r0", [-1.0, 1.0])
@pytest.mark.parametrize("coeffs", [{1: 1}, {1: 0}, {1: 3}, {1: 1, 2: -3}, {1: 2, 3: -1}])
def test_any_circle_gives_the_same_index(coeffs, r0):
    f = make(coeffs)
    for n in range(1, 5):
        assert winding_index(f, n, r0=r0) == winding_index(f, n)


@pytest.mark.parametrize("coeffs", [{1: 0}, {1: 4}, {1: -1, 2: 2, 3: -1}])
def test_clamp_does_not_change_the_result(coeffs):
    f = make(coeffs)
    for n in (3, 6):
        assert winding_index(f, n, clamp=2.0) == winding_index(f, n)


@pytest.mark.parametrize("coeffs", [{1: 0}, {1: 1, 2: -3}, {1: 2, 3: 2}, {1: 1, 2: -1, 3: -1, 4: -1, 5: -2}])
def test_doubling_the_samples_keeps_the_result(coeffs):
    f = make(coeffs)
    for n in (1, 2, 3, 6):
        assert winding_index(f, n, per_subsector=128) == winding_index(f, n, per_subsector=64)


@pytest.mark.parametrize("seed", range(4))
def test_doubling_the_samples_keeps_the_result_on_random_maps(seed):
    rng = np.random.default_rng(100 + seed)
    f = build_map(random_coefficients(rng))
    for n in range(1, 7):
        assert winding_index(f, n, per_subsector=16) == winding_index(f, n, per_subsector=32)


@pytest.mark.parametrize("per_subsector", [4, 64])
def test_loops_over_late_sector_preimages_are_counted(per_subsector):
    # orbits reach the period-3 sectors only after a few steps; the loops of v sit
    # on tiny preimage intervals between coarse samples
    f = make({1: 1, 2: -1, 3: -1, 4: -1, 5: -2})
    assert winding_index(f, 9, per_subsector=per_subsector) == -2
    assert combinatorial_index(f, 9) == -2


def test_late_preimage_map_agrees_up_to_nine():
    report = verify(DoldCoefficients({1: 1, 2: -1, 3: -1, 4: -1, 5: -2}), 9)
    assert report.agree, report.to_frame()


def test_winding_computation_contract():
    comp = winding_computation(make({1: 2, 3: -1}), 3)
    assert np.all(np.abs(comp.increments) < math.pi / 2)
    assert np.all(np.hypot(comp.vectors[:, 0], comp.vectors[:, 1]) > 0)
    assert comp.total == pytest.approx(2 * math.pi * comp.result, abs=1e-6)
    assert np.all(np.diff(comp.theta) > 0)
    assert comp.result == -1


def test_accepted_samples_resolve_the_angular_drift():
    n = 4
    comp = winding_computation(make({1: -1, 2: 2, 3: -1}), n)
    lifted = comp.drift + comp.theta
    sweeps = np.append(lifted[1:], lifted[0] + 2.0 ** n) - lifted
    sweeps += np.append(comp.theta[1:], comp.theta[0] + 1.0) - comp.theta
    assert np.all(sweeps < DRIFT_SWEEP)
    assert comp.samples >= 4 * (2 ** n - 1)


def test_refinement_failure_reports_ranges():
    with pytest.raises(WindingRefinementError) as exc:
        winding_computation(make({1: 4}), 2, max_depth=0, per_subsector=2)
    assert exc.value.n == 2
    assert exc.value.ranges


def test_verify_fixtures():
    report = verify(DoldCoefficients({1: 1, 2: -3}), 4)
    assert report.agree
    assert [r.target for r in report.rows] == [1, -5, 1, -5]
    assert [r.numeric for r in report.rows] == [1, -5, 1, -5]
    frame = report.to_frame()
    assert list(frame.index) == [1, 2, 3, 4]
    assert frame["agree"].all()


@pytest.mark.parametrize("coeffs, value", [({1: 0}, 0), ({1: 2}, 2)])
def test_verify_constant_fixtures(coeffs, value):
    report = verify(DoldCoefficients(coeffs), 6)
    assert report.agree
    assert {(r.numeric, r.combinatorial, r.target) for r in report.rows} == {(value, value, value)}


def test_verify_keeps_curve_on_request():
    report = verify(DoldCoefficients({1: 0}), 2, keep_curve=True)
    row = report.rows[0]
    assert row.curve is not None and len(row.curve) == row.samples
    assert verify(DoldCoefficients({1: 0}), 1).rows[0].curve is None


def test_verify_parallel_matches_serial():
    coeffs = DoldCoefficients({1: -1, 2: 1, 3: -2})
    serial = verify(coeffs, 6, n_jobs=1)
    parallel = verify(coeffs, 6, n_jobs=2)
    assert [(r.numeric, r.samples) for r in serial.rows] == [(r.numeric, r.samples) for r in parallel.rows]


def test_three_way_agreement_small_sample():
    rng = np.random.default_rng(7)
    for _ in range(5):
        report = verify(random_coefficients(rng), 6)
        assert report.agree, report.to_frame()


@pytest.mark.slow
def test_three_way_agreement_random_maps():
    rng = np.random.default_rng(2024)
    for _ in range(25):
        coeffs = random_coefficients(rng)
        report = verify(coeffs, 10)
        assert [r.target for r in report.rows] == list(expand(coeffs, 10).values)
        assert report.agree, report.to_frame()
