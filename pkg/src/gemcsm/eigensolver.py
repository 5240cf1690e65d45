"""Generalized eigenproblems ``H A = E S A`` for non-orthogonal Gaussian bases.

The overlap matrix of a geometric Gaussian set is routinely ill-conditioned,
so the problem is reduced by canonical orthogonalization: ``S`` is
diagonalized, directions with eigenvalue below ``eps * max`` are dropped and
the remaining ones define ``X`` with ``Xᵀ S X = 1``.  The reduced matrix
``Xᵀ H X`` is then diagonalized by a dense general routine.  All products are
bilinear (no complex conjugation), as required for complex-scaled
Hamiltonians.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla


class ConditioningError(RuntimeError):
    """Too many overlap directions had to be discarded."""


class SolverError(RuntimeError):
    """The dense eigenroutine failed."""


@dataclass
class GeneralizedEigResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    discarded_dim: int
    condition_estimate: float


def _c_normalize(vectors: np.ndarray) -> np.ndarray:
    norms = np.sqrt(np.einsum("ij,ij->j", vectors, vectors))
    return vectors / norms


def orthogonalizer(s: np.ndarray, eps: float = 1e-12) -> tuple[np.ndarray, float]:
    """Return ``X`` with ``Xᵀ S X = 1`` spanning the well-conditioned part of ``S``."""
    s = np.asarray(s)
    if not np.iscomplexobj(s) or not np.any(s.imag):
        w, v = sla.eigh(np.real(s))
    else:
        w, v = sla.eig(s)
        v = _c_normalize(v)
    mag = np.abs(w)
    top = mag.max()
    keep = mag > eps * top
    if np.isrealobj(w) and np.any(w[keep] <= 0):
        keep &= w > 0
    cond = float(top / mag.min()) if mag.min() > 0 else float("inf")
    return v[:, keep] / np.sqrt(w[keep]), cond


def solve_generalized(
    h: np.ndarray,
    s: np.ndarray,
    want_vectors: bool = False,
    eps: float = 1e-12,
    max_discard: float = 0.25,
) -> GeneralizedEigResult:
    """Eigenvalues (sorted by real part) of the symmetric pencil ``(H, S)``."""
    h = np.asarray(h)
    s = np.asarray(s)
    n = h.shape[0]
    try:
        x, cond = orthogonalizer(s, eps)
    except (sla.LinAlgError, ValueError) as exc:
        raise SolverError(f"overlap diagonalization failed: {exc}") from exc
    dropped = n - x.shape[1]
    if dropped > max_discard * n:
        raise ConditioningError(
            f"{dropped} of {n} overlap directions below {eps:g} * max; revise the basis"
        )
    hr = x.T @ h @ x
    hr = 0.5 * (hr + hr.T)
    real = not np.iscomplexobj(hr) or not np.any(hr.imag)
    try:
        if real:
            vals, vecs = (sla.eigh(hr.real) if want_vectors else (sla.eigvalsh(hr.real), None))
        else:
            if want_vectors:
                vals, vecs = sla.eig(hr)
                vecs = _c_normalize(vecs)
            else:
                vals, vecs = sla.eigvals(hr), None
    except (sla.LinAlgError, ValueError) as exc:
        raise SolverError(f"eigenvalue iteration failed: {exc}") from exc
    order = np.lexsort((vals.imag, vals.real)) if np.iscomplexobj(vals) else np.argsort(vals)
    vals = vals[order]
    coeffs = None
    if want_vectors:
        coeffs = x @ vecs[:, order]
    return GeneralizedEigResult(vals, coeffs, dropped, cond)
