from __future__ import annotations
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Tuple

import numpy as np
import sympy as sp


def _horner(coeffs: Tuple[Any, ...], x: Any) -> Any:
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class SectorKernel:
    """Model sector map f_{1,±}: angular part θ̂ ↦ θ̂·c(θ̂), radial part r ↦ r + 1 − 2θ̂²."""

    key: str
    sign: int
    c_coeffs: Tuple[Fraction, ...]

    @property
    def angular_coeffs(self) -> Tuple[Fraction, ...]:
        return (Fraction(0),) + tuple(self.c_coeffs)

    @property
    def derivative_coeffs(self) -> Tuple[Fraction, ...]:
        a = self.angular_coeffs
        return tuple(i * a[i] for i in range(1, len(a)))

    def c(self, x: Any) -> Any:
        return _horner(self.c_coeffs, x)

    def angular(self, x: Any) -> Any:
        """Exact for Fraction input."""
        return _horner(self.angular_coeffs, x)

    def angular_array(self, x: np.ndarray) -> np.ndarray:
        return _horner(tuple(float(c) for c in self.angular_coeffs), np.asarray(x, dtype=float))

    def derivative(self, x: Any) -> Any:
        return _horner(self.derivative_coeffs, x)

    def unit_level_set(self) -> List[Fraction]:
        """Real roots of c(θ̂) = 1 on [−1, 1], isolated exactly."""
        x = sp.Symbol("x")
        poly = sp.Poly(sum(sp.Rational(c.numerator, c.denominator) * x ** i
                           for i, c in enumerate(self.c_coeffs)) - 1, x)
        roots = {sp.nsimplify(r) for r in poly.real_roots()}
        return sorted(Fraction(int(sp.numer(r)), int(sp.denom(r))) for r in roots if -1 <= r <= 1)


class KernelRegistry:
    """Sector kernels by sign"""

    def __init__(self):
        self._kernels: Dict[str, SectorKernel] = {}

    def register(self, kernel: SectorKernel):
        self._kernels[kernel.key] = kernel

    def list_keys(self) -> List[str]:
        return sorted(self._kernels.keys())

    def get(self, key: str) -> SectorKernel:
        if key not in self._kernels:
            raise KeyError(f"Unknown sector sign: {key}")

        return self._kernels[key]


# Registry initialization

registry = KernelRegistry()
registry.register(
    SectorKernel(
        key="-",
        sign=-1,
        # c₋(θ̂) = 1 − θ̂²(1 − θ̂²)/2, range [7/8, 1]
        c_coeffs=(Fraction(1), Fraction(0), Fraction(-1, 2), Fraction(0), Fraction(1, 2)),
    )
)
registry.register(
    SectorKernel(
        key="+",
        sign=1,
        # c₊(θ̂) = 1 + θ̂²(1 − θ̂²)/4, range [1, 17/16]
        c_coeffs=(Fraction(1), Fraction(0), Fraction(1, 4), Fraction(0), Fraction(-1, 4)),
    )
)

# Registry API

def list_kernel_signs() -> List[str]:
    return registry.list_keys()


def get_kernel(sign: str) -> SectorKernel:
    return registry.get(sign)
