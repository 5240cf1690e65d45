"""Mass-free two-body problem ``[-κ ∇² + v0' e^{-r²}] ψ = E ψ`` and depth tuning.

``κ`` is 1 in 3D and 1/2 in 1D (see :mod:`gemcsm.units`).

Sectors: in 1D ``even``/``odd`` parity (prefactor ``1``/``z``), in 3D the
``s``/``p`` partial waves (prefactor ``1``/``r``).  Nothing here depends on the
mass ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .eigensolver import solve_generalized
from .gauss_basis import BasisFunction, GaussBasisSpec, measure_moment
from .units import KINETIC_PREFACTOR, DomainError

SECTORS = {1: {"even": 0, "odd": 1}, 3: {"s": 0, "p": 1}}

# fine geometric set used for two-body levels unless a basis is given
DEFAULT_TWO_BODY_BASIS = GaussBasisSpec(n_max=40, nu_first=400.0, nu_last=1e-3)


class NoRootError(RuntimeError):
    """The requested level cannot be placed at the target inside the bracket."""


@dataclass(frozen=True)
class GaussPotential:
    """``V'(r) = v0_prime * exp(-r²)``."""

    v0_prime: float

    def __call__(self, r):
        return self.v0_prime * np.exp(-np.square(r))


@dataclass(frozen=True)
class TwoBodySpectrum:
    dimension: int
    sector: str
    levels: tuple[float, ...]


def sector_ell(dimension: int, sector: str) -> int:
    try:
        return SECTORS[dimension][sector]
    except KeyError:
        raise DomainError(f"unknown sector {sector!r} for dimension {dimension}") from None


def primitive_elements(dimension: int, ell: int, a, b, v0: float, s=1.0):
    """Overlap, kinetic and potential integrals of ``r^ℓ e^{-a r²}`` and ``r^ℓ e^{-b r²}``.

    ``s`` multiplies ``r²`` in the Gaussian potential (``e^{2iθ}`` under complex scaling).
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    c = a + b
    overlap = measure_moment(dimension, 2 * ell, c)
    # ∫ ∇f·∇g, with the centrifugal term ℓ(ℓ+1)/r² in 3D
    kinetic = 4.0 * a * b * measure_moment(dimension, 2 * ell + 2, c)
    if ell:
        kinetic = kinetic - 2.0 * ell * c * overlap
        centrifugal = ell * ell + (ell * (ell + 1) if dimension == 3 else 0)
        kinetic = kinetic + centrifugal * measure_moment(dimension, 2 * ell - 2, c)
    potential = v0 * measure_moment(dimension, 2 * ell, c + s)
    return overlap, kinetic, potential


def two_body_matrix_elements(bra: BasisFunction, ket: BasisFunction, pot: GaussPotential, dimension: int):
    """``(overlap, kinetic, potential)`` between two basis functions of equal ``ell``."""
    if bra.ell != ket.ell:
        return 0j, 0j, 0j
    total = np.zeros(3, dtype=complex)
    for ci, ai in bra.primitives():
        for cj, aj in ket.primitives():
            total += ci * cj * np.array(primitive_elements(dimension, bra.ell, ai, aj, pot.v0_prime))
    total[1] *= KINETIC_PREFACTOR[dimension]
    return tuple(complex(t) for t in total)


def two_body_matrices(functions: list[BasisFunction], pot: GaussPotential, dimension: int):
    """Dense ``(S, T, V)`` for a list of basis functions sharing one ``ell``."""
    coefs, exps, owner = [], [], []
    for k, bf in enumerate(functions):
        for c, a in bf.primitives():
            coefs.append(c)
            exps.append(a)
            owner.append(k)
    coefs = np.array(coefs)
    exps = np.array(exps)
    ell = functions[0].ell
    prim = primitive_elements(dimension, ell, exps[:, None], exps[None, :], pot.v0_prime)
    u = np.zeros((len(exps), len(functions)), dtype=complex)
    u[np.arange(len(exps)), owner] = coefs
    mats = [u.T @ m @ u for m in prim]
    mats[1] = KINETIC_PREFACTOR[dimension] * mats[1]
    # every basis function is real-valued; imaginary parts are rounding
    return tuple(m.real for m in mats)


def solve_two_body(
    pot: GaussPotential,
    dimension: int,
    sector: str,
    basis: GaussBasisSpec = DEFAULT_TWO_BODY_BASIS,
) -> TwoBodySpectrum:
    """Bound levels (``E < 0``, increasing) of one symmetry sector."""
    ell = sector_ell(dimension, sector)
    functions = [bf.normalized(dimension) for bf in basis.with_ell(ell).functions()]
    s, t, v = two_body_matrices(functions, pot, dimension)
    vals = np.real(solve_generalized(t + v, s).eigenvalues)
    return TwoBodySpectrum(dimension, sector, tuple(float(e) for e in vals if e < 0))


def level_energy(v0: float, dimension: int, sector: str, level_index: int, basis=DEFAULT_TWO_BODY_BASIS) -> float:
    """Energy of the ``level_index``-th (1-based) level, or 0 if it is unbound."""
    levels = solve_two_body(GaussPotential(v0), dimension, sector, basis).levels
    return levels[level_index - 1] if len(levels) >= level_index else 0.0


def tune_depth(
    dimension: int,
    sector: str,
    level_index: int,
    target_energy: float,
    tolerance: float = 1e-8,
    bracket: tuple[float, float] = (-0.01, -200.0),
    initial: float | None = None,
    basis: GaussBasisSpec = DEFAULT_TWO_BODY_BASIS,
) -> GaussPotential:
    """Depth ``v0'`` placing the chosen level at ``target_energy``.

    The level energy decreases monotonically with the depth, so the root is
    bracketed and located by Brent's method (bisection safeguarded secant /
    inverse-quadratic steps).
    """
    if target_energy >= 0:
        raise DomainError("target energy must be negative (bound level)")

    def residual(v0: float) -> float:
        return level_energy(v0, dimension, sector, level_index, basis) - target_energy

    if initial is not None and abs(residual(initial)) <= tolerance:
        return GaussPotential(float(initial))
    shallow, deep = bracket
    f_shallow, f_deep = residual(shallow), residual(deep)
    if f_shallow < 0 or f_deep > 0:
        raise NoRootError(
            f"level {level_index} ({dimension}D {sector}) cannot reach {target_energy} for v0' in {bracket}"
        )
    v0 = brentq(residual, deep, shallow, xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=200)
    if abs(residual(v0)) > max(tolerance, 1e3 * math.ulp(abs(target_energy))):
        raise NoRootError(f"root finding stalled at v0'={v0} (residual {residual(v0):.3e})")
    return GaussPotential(float(v0))
