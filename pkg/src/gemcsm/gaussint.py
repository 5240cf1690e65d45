"""Closed-form integrals of correlated Gaussians in two Jacobi vectors.

A function is ``prod_a (u_a · x) * exp(-xᵀ A x)`` with ``x = (r, R)`` and a
complex symmetric 2x2 matrix ``A``.  Integrals of products reduce to the
Gaussian normalization ``(π²/det C)^{D/2}`` times Wick contractions with the
covariance ``C⁻¹/2``.

Quadratic forms are stored by components (:class:`Quad`) and linear forms as
``(x, y)`` pairs, each entry a scalar or an array; everything broadcasts, so
whole blocks of matrix elements are evaluated at once.  Polynomial
prefactors are only supported in one dimension (``D = 1``); in three
dimensions the basis is restricted to s-waves.
"""

from __future__ import annotations

from collections.abc import Sequence
from functools import cache
from typing import NamedTuple

import numpy as np


class AnalyticityError(ValueError):
    """The real part of a Gaussian quadratic form is not positive definite."""


class Quad(NamedTuple):
    """Symmetric 2x2 matrix ``[[xx, xy], [xy, yy]]``."""

    xx: object
    xy: object
    yy: object

    @classmethod
    def from_matrix(cls, m) -> Quad:
        m = np.asarray(m)
        return cls(m[..., 0, 0], 0.5 * (m[..., 0, 1] + m[..., 1, 0]), m[..., 1, 1])

    @classmethod
    def diag(cls, a, b) -> Quad:
        return cls(a, 0.0 * a * b, b)

    def __add__(self, other: Quad) -> Quad:  # type: ignore[override]
        return Quad(self.xx + other.xx, self.xy + other.xy, self.yy + other.yy)

    def det(self):
        return self.xx * self.yy - self.xy * self.xy

    def congruence(self, p) -> Quad:
        """``Pᵀ Q P`` for a constant real 2x2 ``P``."""
        (a, b), (c, d) = p
        xx = a * a * self.xx + 2 * a * c * self.xy + c * c * self.yy
        xy = a * b * self.xx + (a * d + b * c) * self.xy + c * d * self.yy
        yy = b * b * self.xx + 2 * b * d * self.xy + d * d * self.yy
        return Quad(xx, xy, yy)

    def rank_one(self, w, s) -> Quad:
        """``Q + s w wᵀ``."""
        return Quad(self.xx + s * w[0] * w[0], self.xy + s * w[0] * w[1], self.yy + s * w[1] * w[1])

    def row(self, i: int):
        return (self.xx, self.xy) if i == 0 else (self.xy, self.yy)

    def matrix(self) -> np.ndarray:
        xx, xy, yy = np.broadcast_arrays(*(np.asarray(v) for v in self))
        return np.stack([np.stack([xx, xy], -1), np.stack([xy, yy], -1)], -2)


def covariance(c: Quad) -> Quad:
    """``C⁻¹ / 2``."""
    h = 0.5 / c.det()
    return Quad(c.yy * h, -c.xy * h, c.xx * h)


def sqrt_det(c: Quad):
    """``sqrt(det C)`` continued from real positive-definite ``C``.

    With ``Re C`` positive definite both eigenvalues lie in the open right
    half plane, so ``arg det C`` stays inside ``(-π, π)`` and the principal
    root is the analytic branch.
    """
    return np.sqrt(np.asarray(c.det(), dtype=complex))


def check_positive(c: Quad) -> None:
    xx, xy, yy = (np.real(v) for v in c)
    if np.any(xx <= 0) or np.any(xx * yy - xy * xy <= 0):
        raise AnalyticityError("Gaussian quadratic form lost positive definiteness")


def base_integral(c: Quad, dim: int):
    """``∫ exp(-xᵀ C x) dx`` over ``(R^dim)²``."""
    root = sqrt_det(c)
    if dim == 1:
        return np.pi / root
    return np.pi**3 / (root * root * root)


@cache
def _matchings(n: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    if n == 0:
        return ((),)
    out = []
    for k in range(1, n):
        rest = [i for i in range(1, n) if i != k]
        for sub in _matchings(n - 2):
            out.append(((0, k),) + tuple((rest[a], rest[b]) for a, b in sub))
    return tuple(out)


def contract(u, v, cov: Quad):
    """``uᵀ cov v``."""
    return u[0] * v[0] * cov.xx + (u[0] * v[1] + u[1] * v[0]) * cov.xy + u[1] * v[1] * cov.yy


def wick(forms: Sequence, cov: Quad):
    """``E[prod (u·x)]`` for a zero-mean Gaussian with covariance ``cov``."""
    n = len(forms)
    if n == 0:
        return 1.0
    if n % 2:
        return 0.0
    pair = {}
    for a in range(n):
        for b in range(a + 1, n):
            pair[a, b] = contract(forms[a], forms[b], cov)
    total = 0.0
    for matching in _matchings(n):
        term = 1.0
        for a, b in matching:
            term = term * pair[a, b]
        total = total + term
    return total


def _check_forms(dim, *form_lists):
    if dim != 1 and any(len(f) for f in form_lists):
        raise NotImplementedError("polynomial prefactors are only supported in 1D")


def overlap(a: Quad, fa, b: Quad, fb, dim: int):
    """``∫ f g`` for ``f = Π fa · e^{-xᵀAx}`` and ``g = Π fb · e^{-xᵀBx}``."""
    _check_forms(dim, fa, fb)
    c = a + b
    value = base_integral(c, dim)
    if fa or fb:
        value = value * wick(list(fa) + list(fb), covariance(c))
    return value


def gaussian_kernel(a: Quad, fa, b: Quad, fb, w, s, dim: int):
    """``∫ f exp(-s (w·x)²) g`` for a pair-distance row vector ``w``."""
    _check_forms(dim, fa, fb)
    c = (a + b).rank_one(w, s)
    value = base_integral(c, dim)
    if fa or fb:
        value = value * wick(list(fa) + list(fb), covariance(c))
    return value


def _gradient_terms(a: Quad, forms, i):
    terms = []
    for k, u in enumerate(forms):
        rest = [f for j, f in enumerate(forms) if j != k]
        terms.append((u[i], rest))
    terms.append((-2.0, [a.row(i)] + list(forms)))
    return terms


def kinetic(a: Quad, fa, b: Quad, fb, weights, dim: int):
    """``∫ Σ_i weights_i ∂_i f ∂_i g``, i.e. ``<f| -Σ w_i ∇_i² |g>`` by parts."""
    _check_forms(dim, fa, fb)
    c = a + b
    cov = covariance(c)
    total = 0.0
    for i in range(2):
        acc = 0.0
        for ca, la in _gradient_terms(a, fa, i):
            for cb, lb in _gradient_terms(b, fb, i):
                acc = acc + ca * cb * wick(la + lb, cov)
        total = total + weights[i] * acc
    # without prefactors the only contraction pairs the two A x terms, once per Cartesian axis
    return dim * total * base_integral(c, dim)


def analyticity_bound(c0: Quad, w) -> float:
    """Largest ``θ`` keeping ``Re(C0) + cos(2θ) w wᵀ`` positive definite."""
    re = Quad(*(np.real(v) for v in c0))
    q = 2.0 * contract(w, w, covariance(re))
    c_star = float(np.min(1.0 / q))
    if c_star >= 1.0:
        return np.pi / 2
    return 0.5 * float(np.arccos(-c_star))
