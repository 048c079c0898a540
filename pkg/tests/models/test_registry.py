from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from src.models.registry import get_kernel, list_kernel_signs

GRID = [Fraction(j, 200) for j in range(-200, 201)]


def test_registered_signs():
    assert list_kernel_signs() == ["+", "-"]
    with pytest.raises(KeyError):
        get_kernel("0")


@pytest.mark.parametrize("sign", ["+", "-"])
def test_unit_level_set(sign):
    assert get_kernel(sign).unit_level_set() == [-1, 0, 1]


def test_c_ranges():
    minus, plus = get_kernel("-"), get_kernel("+")
    assert all(Fraction(7, 8) <= minus.c(x) <= 1 for x in GRID)
    assert all(1 <= plus.c(x) <= Fraction(17, 16) for x in GRID)
    assert minus.c(0) == plus.c(0) == 1


@pytest.mark.parametrize("sign", ["+", "-"])
def test_angular_map_fixes_grid_and_is_increasing(sign):
    k = get_kernel(sign)
    assert [k.angular(Fraction(x)) for x in (-1, 0, 1)] == [-1, 0, 1]
    assert min(k.derivative(x) for x in GRID) >= Fraction(1, 4)
    values = [k.angular(x) for x in GRID]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_sign_direction():
    # − pulls towards the centre, + pushes towards the edges
    x = Fraction(1, 2)
    assert get_kernel("-").angular(x) < x < get_kernel("+").angular(x)


@pytest.mark.parametrize("sign", ["+", "-"])
def test_float_evaluation_matches_exact(sign):
    k = get_kernel(sign)
    xs = np.linspace(-1.0, 1.0, 33)
    expected = [float(k.angular(Fraction(x))) for x in xs]
    assert k.angular_array(xs) == pytest.approx(expected, abs=1e-14)
