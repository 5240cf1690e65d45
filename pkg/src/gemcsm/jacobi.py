"""Jacobi coordinate sets and the boson exchange ``P23``.

Particle 1 is the distinct particle X, particles 2 and 3 the bosons.  Set
``c = k`` uses the cyclic pair ``(i, j)`` of the remaining particles:

====  ======  ========================  =================================
set   pair    pair vector               spectator vector
====  ======  ========================  =================================
1     (2,3)   ``r_23 = r_3 - r_2``      ``R_1 = r_1 - cm(2,3)``
2     (3,1)   ``r_31 = r_1 - r_3``      ``R_2 = r_2 - cm(3,1)``
3     (1,2)   ``r_12 = r_2 - r_1``      ``R_3 = r_3 - cm(1,2)``
====  ======  ========================  =================================

The same 2x2 matrix acts on every Cartesian component.
"""

from __future__ import annotations

import numpy as np

from .units import MassConfig

PAIRS = {1: (2, 3), 2: (3, 1), 3: (1, 2)}


def _check_set(c: int) -> None:
    if c not in PAIRS:
        raise ValueError(f"Jacobi set must be 1, 2 or 3, got {c!r}")


def absolute_to_jacobi(c: int, cfg: MassConfig) -> np.ndarray:
    """3x3 matrix mapping absolute ``(r1, r2, r3)`` to ``(r_c, R_c, R_cm)``."""
    _check_set(c)
    m = np.array(cfg.masses)
    i, j = PAIRS[c]
    k = c
    out = np.zeros((3, 3))
    out[0, j - 1] += 1.0
    out[0, i - 1] -= 1.0
    out[1, k - 1] += 1.0
    out[1, i - 1] -= m[i - 1] / (m[i - 1] + m[j - 1])
    out[1, j - 1] -= m[j - 1] / (m[i - 1] + m[j - 1])
    out[2] = m / m.sum()
    return out


def transform(c_from: int, c_to: int, cfg: MassConfig) -> np.ndarray:
    """Matrix ``T`` with ``(r_to, R_to) = T @ (r_from, R_from)``."""
    if c_from == c_to:
        _check_set(c_from)
        return np.eye(2)
    full = absolute_to_jacobi(c_to, cfg) @ np.linalg.inv(absolute_to_jacobi(c_from, cfg))
    return full[:2, :2].copy()


def exchange_p23(cfg: MassConfig, c: int = 2) -> np.ndarray:
    """Action of the label swap 2 <-> 3 on the coordinates of set ``c``.

    ``f(P @ x)`` is the exchanged copy of a function ``f`` of set-``c``
    coordinates ``x``.  ``P`` is an involution.
    """
    swap = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    j = absolute_to_jacobi(c, cfg)
    return (j @ swap @ np.linalg.inv(j))[:2, :2].copy()


def pair_vector(c: int, pair: tuple[int, int], cfg: MassConfig) -> np.ndarray:
    """Row ``w`` with ``r_pair = w @ (r_c, R_c)`` for an unordered particle pair."""
    _check_set(c)
    for d, p in PAIRS.items():
        if set(p) == set(pair):
            sign = 1.0 if p == tuple(pair) else -1.0
            return sign * transform(c, d, cfg)[0]
    raise ValueError(f"not a particle pair: {pair!r}")


def kinetic_weights(c: int, cfg: MassConfig) -> np.ndarray:
    """``(1/2μ_pair, 1/2μ_spectator)`` so that ``T = -Σ w ∇²`` in set ``c``."""
    _check_set(c)
    i, j = PAIRS[c]
    return np.array([0.5 / cfg.mu_pair(i, j), 0.5 / cfg.mu_third_prime(c)])
