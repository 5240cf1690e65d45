"""Dimensionless scalings, masses and energy/lifetime conversions.

All masses are kept in *prime* units, where the B-X reduced mass equals 1/2
and the interaction range equals 1.  In these units the two-body Schrödinger
equation reads ``[-∇² + v0' exp(-r'²)] ψ = E' ψ`` in 3D for every mass ratio.

In one dimension the prime energy unit is ``ħ²/(μ_bx r0²)``, twice the 3D
unit ``E_char = ħ²/(2 μ_bx r0²)``, so the 1D two-body equation reads
``[-½ d²/dz'² + v0' exp(-z'²)] ψ = E' ψ``.  With this convention the quoted
1D depth ``v0' = -5.44`` binds an excited even level at ``E' = -0.1`` and an
odd level near ``-1.5``.

Particle labels follow the Jacobi convention used throughout the package:
particle 1 is the distinct particle X, particles 2 and 3 are the bosons B.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

from scipy import constants

# coefficient of -∇² (for reduced mass 1/2) in the prime-scaled Hamiltonian
KINETIC_PREFACTOR = {1: 0.5, 3: 1.0}


class DomainError(ValueError):
    """Raised for parameters outside the physical domain of an operation."""


@dataclass(frozen=True)
class MassConfig:
    """Prime-scaled masses for a mass ratio ``beta = m_b / m_x``."""

    beta: float
    m_x_prime: float
    m_b_prime: float

    @property
    def masses(self) -> tuple[float, float, float]:
        """Prime masses of particles (1, 2, 3) = (X, B, B)."""
        return (self.m_x_prime, self.m_b_prime, self.m_b_prime)

    @property
    def mu_pair_prime(self) -> float:
        mx, mb = self.m_x_prime, self.m_b_prime
        return mx * mb / (mx + mb)

    def mu_pair(self, i: int, j: int) -> float:
        """Reduced mass of the pair (i, j)."""
        m = self.masses
        return m[i - 1] * m[j - 1] / (m[i - 1] + m[j - 1])

    def mu_third_prime(self, k: int) -> float:
        """Reduced mass of particle ``k`` against the remaining pair."""
        m = self.masses
        mk = m[k - 1]
        rest = sum(m) - mk
        return mk * rest / (mk + rest)


def make_mass_config(beta: float) -> MassConfig:
    """Build the prime-scaled mass configuration for mass ratio ``beta``.

    ``m_x' = (1+β)/(2β)`` and ``m_b' = (1+β)/2`` so that the B-X reduced mass
    is exactly 1/2.
    """
    beta = float(beta)
    if not math.isfinite(beta) or beta <= 0.0:
        raise DomainError(f"mass ratio must be positive and finite, got {beta!r}")
    return MassConfig(beta=beta, m_x_prime=(1.0 + beta) / (2.0 * beta), m_b_prime=(1.0 + beta) / 2.0)


@dataclass(frozen=True)
class ComplexEnergy:
    """Energy ``E = e_r - i gamma / 2``."""

    e_r: float
    gamma: float

    @classmethod
    def from_complex(cls, energy: complex) -> ComplexEnergy:
        energy = complex(energy)
        return cls(e_r=energy.real, gamma=-2.0 * energy.imag)

    @property
    def value(self) -> complex:
        return complex(self.e_r, -0.5 * self.gamma)

    def scaled(self, factor: float) -> ComplexEnergy:
        return ComplexEnergy(self.e_r * factor, self.gamma * factor)


class Scaling(enum.Enum):
    PRIME = "prime"
    TILDE = "tilde"


@dataclass(frozen=True)
class Physical:
    """Physical units: interaction range ``r0`` [m] and distinct-particle mass ``m_x`` [kg].

    Energies are expressed in joules.
    """

    r0: float
    m_x: float

    def mu_bx(self, beta: float) -> float:
        return self.m_x * beta / (1.0 + beta)

    def e_char(self, beta: float) -> float:
        return constants.hbar**2 / (2.0 * self.mu_bx(beta) * self.r0**2)

    def energy_unit(self, beta: float, dimension: int = 3) -> float:
        """Joules per prime energy unit."""
        return self.e_char(beta) / KINETIC_PREFACTOR[dimension]

    def tau_char(self, beta: float) -> float:
        return self.mu_bx(beta) * self.r0**2 / constants.hbar


ScalingKind = Union[Scaling, Physical]


def tilde_factor(cfg: MassConfig) -> float:
    """Factor ``2 m_x / μ_bx = 2(1+β)/β`` mapping prime to tilde energies."""
    return 2.0 * cfg.m_x_prime / cfg.mu_pair_prime


def _factor_from_prime(kind: ScalingKind, cfg: MassConfig, dimension: int) -> float:
    if kind is Scaling.PRIME:
        return 1.0
    if kind is Scaling.TILDE:
        return tilde_factor(cfg)
    if isinstance(kind, Physical):
        return kind.energy_unit(cfg.beta, dimension)
    raise TypeError(f"unknown scaling {kind!r}")


def convert_energy(
    e: ComplexEnergy, src: ScalingKind, dst: ScalingKind, cfg: MassConfig, dimension: int = 3
) -> ComplexEnergy:
    """Convert an energy between prime, tilde and physical (joule) units."""
    if not (math.isfinite(e.e_r) and math.isfinite(e.gamma)):
        raise DomainError("energy must be finite")
    if src == dst:
        return e
    return e.scaled(_factor_from_prime(dst, cfg, dimension) / _factor_from_prime(src, cfg, dimension))


def width_to_lifetime(gamma_prime: float, dimension: int = 3) -> float:
    """Lifetime ``τ' = τ / τ_char`` for a prime-scaled width ``Γ'``.

    ``τ = ħ/Γ`` and ``τ_char = μ_bx r0²/ħ``.  The 3D energy unit satisfies
    ``τ_char E_char = ħ/2`` (``τ' = 2/Γ'``); the 1D unit is twice as large,
    giving ``τ' = 1/Γ'``.  A zero width returns ``math.inf`` (stable state).
    """
    gamma_prime = float(gamma_prime)
    if math.isnan(gamma_prime) or gamma_prime < 0.0:
        raise DomainError(f"width must be non-negative, got {gamma_prime!r}")
    if gamma_prime == 0.0:
        return math.inf
    return 2.0 * KINETIC_PREFACTOR[dimension] / gamma_prime


def lifetime_seconds(tau_prime: float, r0: float, m_x: float, beta: float) -> float:
    """Lifetime in seconds for physical range ``r0`` [m] and mass ``m_x`` [kg]."""
    return tau_prime * Physical(r0, m_x).tau_char(beta)
