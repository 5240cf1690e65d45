"""Gaussian range progressions, normalizations and complex-ranged doubling."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
from scipy.special import gamma as gamma_fn

from .units import DomainError

Flavor = Literal["plain", "cosine", "sine"]

# solid-angle / line factors of the radial measure: 1D integrates over the full line
_MEASURE = {1: 2.0, 3: 4.0 * math.pi}


@dataclass(frozen=True)
class GaussBasisSpec:
    """Geometric set of Gaussian ranges ``nu_first ... nu_last`` with prefactor ``r**ell``."""

    n_max: int
    nu_first: float
    nu_last: float
    ell: int = 0
    complex_omega: float | None = None

    def __post_init__(self) -> None:
        if self.n_max < 2:
            raise DomainError("n_max must be at least 2")
        if not (self.nu_first > 0 and self.nu_last > 0):
            raise DomainError("range parameters must be positive")
        if self.nu_first == self.nu_last:
            raise DomainError("nu_first and nu_last must differ")
        if self.ell not in (0, 1):
            raise DomainError("only ell in {0, 1} is supported")
        if self.complex_omega is not None and self.complex_omega <= 0:
            raise DomainError("complex_omega must be positive")

    def with_ell(self, ell: int) -> GaussBasisSpec:
        return replace(self, ell=ell)

    def functions(self) -> list[BasisFunction]:
        ranges = geometric_ranges(self)
        if self.complex_omega is None:
            return [BasisFunction.plain(nu, self.ell) for nu in ranges]
        return complex_double(ranges, self.complex_omega, self.ell)

    @property
    def size(self) -> int:
        return self.n_max * (1 if self.complex_omega is None else 2)


@dataclass(frozen=True)
class BasisFunction:
    """``norm * r**ell * e^{-Re(nu) r²} * {1, cos(Im(nu) r²), sin(Im(nu) r²)}``.

    The cosine and sine flavors are the real combinations of the pair of
    complex-ranged Gaussians ``exp(-(1 ± iω) ν r²)``.
    """

    nu: complex
    ell: int
    flavor: Flavor = "plain"
    norm: float = 1.0

    def __post_init__(self) -> None:
        if self.flavor == "plain" and complex(self.nu).imag != 0.0:
            raise DomainError("plain Gaussians must have a real range")

    @classmethod
    def plain(cls, nu: float, ell: int = 0) -> BasisFunction:
        return cls(nu=complex(nu), ell=ell)

    def primitives(self) -> list[tuple[complex, complex]]:
        """Expansion ``[(coefficient, exponent), ...]`` into complex Gaussians, norm included."""
        nu = complex(self.nu)
        if self.flavor == "plain":
            return [(complex(self.norm), nu)]
        plus, minus = nu, nu.conjugate()
        if self.flavor == "cosine":
            return [(0.5 * self.norm, plus), (0.5 * self.norm, minus)]
        # sin(ω ν r²) e^{-ν r²} = Im exp(-(1 - iω) ν r²)
        return [(-0.5j * self.norm, minus), (0.5j * self.norm, plus)]

    def normalized(self, dimension: int) -> BasisFunction:
        return replace(self, norm=normalization(self, dimension))


def geometric_ranges(spec: GaussBasisSpec) -> np.ndarray:
    """``ν_n = ν_1 (ν_last/ν_1)^((n-1)/(n_max-1))`` with both endpoints exact."""
    n = np.arange(spec.n_max)
    ratio = spec.nu_last / spec.nu_first
    ranges = spec.nu_first * ratio ** (n / (spec.n_max - 1))
    ranges[0], ranges[-1] = spec.nu_first, spec.nu_last
    return ranges


def complex_double(ranges, omega: float, ell: int = 0) -> list[BasisFunction]:
    """Replace every range ν by the cosine/sine pair spanning ``exp(-(1±iω)ν r²)``."""
    if omega <= 0:
        raise DomainError("omega must be positive")
    out = []
    for nu in np.asarray(ranges, dtype=float):
        nu_c = complex(nu, omega * nu)
        out.append(BasisFunction(nu=nu_c, ell=ell, flavor="cosine"))
        out.append(BasisFunction(nu=nu_c, ell=ell, flavor="sine"))
    return out


def radial_moment(k, a):
    """``∫_0^∞ r^k e^{-a r²} dr`` for ``Re(a) > 0`` (principal branch)."""
    a = np.asarray(a, dtype=complex)
    p = 0.5 * (k + 1)
    return gamma_fn(p) / (2.0 * a**p)


def measure_moment(dimension: int, power: int, a):
    """``∫ r^power e^{-a r²}`` under the 1D line or 3D volume measure."""
    return _MEASURE[dimension] * radial_moment(power + dimension - 1, a)


def self_overlap(bf: BasisFunction, dimension: int) -> complex:
    total = 0j
    for ci, ai in bf.primitives():
        for cj, aj in bf.primitives():
            total += ci * cj * complex(measure_moment(dimension, 2 * bf.ell, ai + aj))
    return total


def normalization(bf: BasisFunction, dimension: int) -> float:
    """Factor making ``bf`` unit-normalized; ``bf.norm`` is ignored."""
    if dimension not in _MEASURE:
        raise DomainError(f"dimension must be 1 or 3, got {dimension}")
    if complex(bf.nu).real <= 0:
        raise DomainError("Gaussian with Re(nu) <= 0 is not normalizable")
    ov = self_overlap(replace(bf, norm=1.0), dimension)
    return float(1.0 / math.sqrt(ov.real))


def normalized_functions(spec: GaussBasisSpec, dimension: int) -> list[BasisFunction]:
    return [bf.normalized(dimension) for bf in spec.functions()]
