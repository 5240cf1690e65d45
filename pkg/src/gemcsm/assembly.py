"""Complex-scaled three-body matrices for two bosons and one distinct particle.

The basis lives in one Jacobi set ``c`` (2 or 3): products
``φ_n(r_c) ψ_N(R_c)`` of Gaussians with polynomial prefactors ``r^ℓ R^L``.
Bose symmetry is imposed by the ket-side projection ``(1 + P23)``, so

    S_ab = <f_a| 1 + P23 |f_b>,    H_ab = <f_a| H(θ) (1 + P23) |f_b>

with ``H(θ) = e^{-2iθ} T + V(e^{iθ} r_12) + V(e^{iθ} r_31)``.  Since ``H``
commutes with ``P23`` this equals half the doubly projected matrix, and both
matrices are complex symmetric.  Complex scaling enters analytically: the
kinetic block is multiplied by ``e^{-2iθ}`` and the Gaussian potential
argument ``r²`` by ``e^{2iθ}``.

Matrix elements are computed between complex primitive Gaussians and then
contracted with the (real) cosine/sine combinations of the basis, so ``S``
and ``H(0)`` are real.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import gaussint
from .eigensolver import GeneralizedEigResult, solve_generalized
from .gauss_basis import GaussBasisSpec
from .jacobi import exchange_p23, kinetic_weights, pair_vector
from .twobody import GaussPotential
from .units import KINETIC_PREFACTOR, DomainError, MassConfig

log = logging.getLogger(__name__)

CACHE_VERSION = 1
ROW_CHUNK = 96

E_R = (1.0, 0.0)
E_RR = (0.0, 1.0)


class AssemblyError(RuntimeError):
    pass


@dataclass(frozen=True)
class ChannelBasis:
    """Three-body basis: pair and spectator range sets plus ``(ℓ, L)`` blocks."""

    dimension: int
    pair: GaussBasisSpec
    third: GaussBasisSpec
    blocks: tuple[tuple[int, int], ...] = ((0, 0),)

    def __post_init__(self) -> None:
        if self.dimension not in (1, 3):
            raise DomainError("dimension must be 1 or 3")
        if self.dimension == 3 and any(b != (0, 0) for b in self.blocks):
            raise DomainError("3D assembly supports the s-wave block (0, 0) only")
        for ell, big_l in self.blocks:
            if (ell + big_l) % 2:
                raise DomainError("blocks must have even total parity")

    @property
    def size(self) -> int:
        return len(self.blocks) * self.pair.size * self.third.size

    def digest(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class AssembledProblem:
    h_matrix: np.ndarray
    s_matrix: np.ndarray
    theta: float
    beta: float
    dimension: int
    jacobi_set: int
    v0_prime: float
    basis_hash: str
    kinetic: np.ndarray | None = field(default=None, repr=False)

    def solve(self, want_vectors: bool = False, eps: float = 1e-12, max_discard: float = 0.25) -> GeneralizedEigResult:
        return solve_generalized(
            self.h_matrix, self.s_matrix, want_vectors=want_vectors, eps=eps, max_discard=max_discard
        )


def _primitive_table(spec: GaussBasisSpec, ell: int, dimension: int):
    """Exponents of the primitives and the matrix expressing basis functions in them."""
    functions = [bf.normalized(dimension) for bf in spec.with_ell(ell).functions()]
    exps, rows = [], []
    for k, bf in enumerate(functions):
        for coef, expo in bf.primitives():
            exps.append(expo)
            rows.append((k, coef))
    u = np.zeros((len(exps), len(functions)), dtype=complex)
    for p, (k, coef) in enumerate(rows):
        u[p, k] = coef
    return np.array(exps, dtype=complex), u


def _diag_grid(ar, ab) -> gaussint.Quad:
    """Forms ``diag(a_p, b_q)`` over the flattened grid of ``(p, q)``."""
    xx = np.repeat(ar, len(ab))
    yy = np.tile(ab, len(ar))
    return gaussint.Quad(xx, 0.0, yy)


def _rows(q: gaussint.Quad, sl: slice, axis: int) -> gaussint.Quad:
    idx = (sl, None) if axis == 0 else (None, sl)
    return gaussint.Quad(*(v[idx] if np.ndim(v) else v for v in q))


def _to_basis(m, u_a, u_b):
    """``(U_a)ᵀ M U_b`` for Kronecker-structured ``U = U_r ⊗ U_R``."""
    (ra, qa), (rb, qb) = u_a, u_b
    m4 = m.reshape(ra.shape[0], qa.shape[0], rb.shape[0], qb.shape[0])
    out = np.einsum("pn,pqPQ->nqPQ", ra, m4, optimize=True)
    out = np.einsum("qN,nqPQ->nNPQ", qa, out, optimize=True)
    out = np.einsum("nNPQ,Pm->nNmQ", out, rb, optimize=True)
    out = np.einsum("nNmQ,QM->nNmM", out, qb, optimize=True)
    return out.reshape(ra.shape[1] * qa.shape[1], rb.shape[1] * qb.shape[1])


def _forms(ell: int, big_l: int) -> list[tuple[float, float]]:
    return [E_R] * ell + [E_RR] * big_l


class _Geometry:
    """Mass-ratio dependent pieces of the assembly in one Jacobi set."""

    def __init__(self, cfg: MassConfig, dimension: int, jacobi_set: int):
        if jacobi_set not in (2, 3):
            raise DomainError("assembly uses the boson-exchange sets c = 2 or c = 3")
        self.dim = dimension
        self.p = exchange_p23(cfg, jacobi_set)
        self.weights = KINETIC_PREFACTOR[dimension] * kinetic_weights(jacobi_set, cfg)
        bx_pairs = [(1, 2), (3, 1)]
        self.potentials = [pair_vector(jacobi_set, pr, cfg) for pr in bx_pairs]

    def exchanged(self, quad: gaussint.Quad, forms):
        p = self.p
        return quad.congruence(p), [tuple(p.T @ np.asarray(u)) for u in forms]


def _block_elements(geo: _Geometry, a, fa, b, fb, s_factors):
    """Primitive overlap, kinetic and potential (one per θ) with ket-side projection."""
    dim = geo.dim
    bx, fbx = geo.exchanged(b, fb)
    ov = kin = 0.0
    pots = [0.0 for _ in s_factors]
    for kb, kf in ((b, fb), (bx, fbx)):
        ov = ov + gaussint.overlap(a, fa, kb, kf, dim)
        kin = kin + gaussint.kinetic(a, fa, kb, kf, geo.weights, dim)
        for t, s in enumerate(s_factors):
            for w in geo.potentials:
                pots[t] = pots[t] + gaussint.gaussian_kernel(a, fa, kb, kf, w, s, dim)
    return ov, kin, pots


def _bound_for_block(geo: _Geometry, a, b) -> float:
    everything = slice(None)
    a = _rows(a, everything, 0)
    b = _rows(b, everything, 1)
    bx, _ = geo.exchanged(b, [])
    bound = math.pi / 2
    for kb in (b, bx):
        c0 = a + kb
        gaussint.check_positive(c0)
        for w in geo.potentials:
            bound = min(bound, gaussint.analyticity_bound(c0, w))
    return bound


def theta_bound(cfg: MassConfig, basis: ChannelBasis, jacobi_set: int = 2) -> float:
    """Upper limit on the rotation angle for this basis (never above π/4)."""
    geo = _Geometry(cfg, basis.dimension, jacobi_set)
    bound = math.pi / 4
    for ell, big_l in basis.blocks:
        ar, _ = _primitive_table(basis.pair, ell, basis.dimension)
        ab, _ = _primitive_table(basis.third, big_l, basis.dimension)
        grid = _diag_grid(ar, ab)
        bound = min(bound, _bound_for_block(geo, grid, grid))
    return bound


def assemble_many(
    cfg: MassConfig,
    pot: GaussPotential,
    basis: ChannelBasis,
    thetas: Sequence[float],
    jacobi_set: int = 2,
) -> list[AssembledProblem]:
    """Assemble ``H(θ)`` for several angles sharing ``S`` and ``T``."""
    thetas = [float(t) for t in thetas]
    limit = theta_bound(cfg, basis, jacobi_set)
    for t in thetas:
        if not (0.0 <= t < limit):
            raise gaussint.AnalyticityError(
                f"theta={math.degrees(t):.3f} deg outside the analytic range [0, {math.degrees(limit):.3f}) deg"
            )
    geo = _Geometry(cfg, basis.dimension, jacobi_set)
    s_factors = [np.exp(2j * t) for t in thetas]
    tables = []
    for ell, big_l in basis.blocks:
        ar, ur = _primitive_table(basis.pair, ell, basis.dimension)
        ab, ub = _primitive_table(basis.third, big_l, basis.dimension)
        tables.append((_diag_grid(ar, ab), (ur, ub), _forms(ell, big_l)))
    n = sum(t[1][0].shape[1] * t[1][1].shape[1] for t in tables)
    s_mat = np.zeros((n, n), dtype=complex)
    t_mat = np.zeros((n, n), dtype=complex)
    v_mats = [np.zeros((n, n), dtype=complex) for _ in thetas]
    row = 0
    for grid_a, u_a, forms_a in tables:
        col = 0
        na = u_a[0].shape[1] * u_a[1].shape[1]
        pa = u_a[0].shape[0] * u_a[1].shape[0]
        for grid_b, u_b, forms_b in tables:
            nb = u_b[0].shape[1] * u_b[1].shape[1]
            pb = u_b[0].shape[0] * u_b[1].shape[0]
            kets = _rows(grid_b, slice(None), 1)
            prim = [np.zeros((pa, pb), dtype=complex) for _ in range(2 + len(thetas))]
            for lo in range(0, pa, ROW_CHUNK):
                sl = slice(lo, lo + ROW_CHUNK)
                ov, kin, pots = _block_elements(geo, _rows(grid_a, sl, 0), forms_a, kets, forms_b, s_factors)
                prim[0][sl] = ov
                prim[1][sl] = kin
                for k, pv in enumerate(pots):
                    prim[2 + k][sl] = pot.v0_prime * pv
            out = [_to_basis(m, u_a, u_b) for m in prim]
            s_mat[row : row + na, col : col + nb] = out[0]
            t_mat[row : row + na, col : col + nb] = out[1]
            for k in range(len(thetas)):
                v_mats[k][row : row + na, col : col + nb] = out[2 + k]
            col += nb
        row += na
    # the basis functions are real, so S and T are real up to rounding
    s_real = s_mat.real.copy()
    t_real = t_mat.real.copy()
    digest = basis.digest()
    problems = []
    for t, v in zip(thetas, v_mats):
        if t == 0.0:
            v = v.real
            h = t_real + v
        else:
            h = np.exp(-2j * t) * t_real + v
        problems.append(
            AssembledProblem(
                h_matrix=h,
                s_matrix=s_real,
                theta=t,
                beta=cfg.beta,
                dimension=basis.dimension,
                jacobi_set=jacobi_set,
                v0_prime=pot.v0_prime,
                basis_hash=digest,
                kinetic=t_real,
            )
        )
    return problems


def assemble(
    cfg: MassConfig,
    pot: GaussPotential,
    basis: ChannelBasis,
    theta: float,
    jacobi_set: int = 2,
) -> AssembledProblem:
    """Assemble the complex-scaled problem at a single rotation angle (radians)."""
    return assemble_many(cfg, pot, basis, [theta], jacobi_set)[0]


def rearranged_gauss_integral(
    bra: tuple[float, float, int, int],
    ket: tuple[float, float, int, int],
    kernel: str,
    transform: np.ndarray,
    theta: float = 0.0,
    dimension: int = 1,
    weights: Sequence[float] = (1.0, 1.0),
    pair: np.ndarray | None = None,
) -> complex:
    """Integral between an (unnormalized) bra in one Jacobi set and a ket in another.

    ``bra`` and ``ket`` are ``(ν, λ, ℓ, L)`` for ``r^ℓ R^L e^{-ν r² - λ R²}``;
    ``transform`` maps bra coordinates to ket coordinates.  ``kernel`` is
    ``"overlap"``, ``"kinetic"`` (``-Σ weights_i ∇_i²`` in bra coordinates,
    times ``e^{-2iθ}``) or ``"gaussian_pair"`` (``exp(-e^{2iθ} (pair·x)²)``).
    """
    nu, lam, ell, big_l = bra
    nu_k, lam_k, ell_k, big_l_k = ket
    a = gaussint.Quad(complex(nu), 0j, complex(lam))
    fa = _forms(ell, big_l)
    t = np.asarray(transform, dtype=float)
    b = gaussint.Quad(complex(nu_k), 0j, complex(lam_k)).congruence(t)
    fb = [tuple(t.T @ np.asarray(u)) for u in _forms(ell_k, big_l_k)]
    gaussint.check_positive(a + b)
    if kernel == "overlap":
        val = gaussint.overlap(a, fa, b, fb, dimension)
    elif kernel == "kinetic":
        val = np.exp(-2j * theta) * gaussint.kinetic(a, fa, b, fb, np.asarray(weights), dimension)
    elif kernel == "gaussian_pair":
        if pair is None:
            raise ValueError("gaussian_pair kernel needs the pair row vector")
        s = np.exp(2j * theta)
        gaussint.check_positive((a + b).rank_one(pair, np.cos(2 * theta)))
        val = gaussint.gaussian_kernel(a, fa, b, fb, pair, s, dimension)
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    return complex(val)


class MatrixCache:
    """On-disk cache of assembled matrices; purely an optimization."""

    def __init__(self, directory: Path | str):
        self.directory = Path(directory)

    @staticmethod
    def key(beta: float, theta: float, basis: ChannelBasis, v0: float, jacobi_set: int = 2) -> str:
        payload = json.dumps(
            [CACHE_VERSION, repr(float(beta)), repr(float(theta)), basis.digest(), repr(float(v0)), basis.dimension, jacobi_set]
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:24]

    def _path(self, key: str) -> Path:
        return self.directory / f"asm-{key}.npz"

    def load(self, key: str) -> AssembledProblem | None:
        path = self._path(key)
        if not path.exists():
            return None
        try:
            with np.load(path, allow_pickle=False) as data:
                header = json.loads(str(data["header"]))
                if header.get("version") != CACHE_VERSION:
                    return None
                return AssembledProblem(
                    h_matrix=data["h"],
                    s_matrix=data["s"],
                    theta=header["theta"],
                    beta=header["beta"],
                    dimension=header["dimension"],
                    jacobi_set=header["jacobi_set"],
                    v0_prime=header["v0_prime"],
                    basis_hash=header["basis_hash"],
                )
        except (OSError, ValueError, KeyError) as exc:
            log.warning("ignoring unreadable cache entry %s: %s", path, exc)
            return None

    def store(self, key: str, problem: AssembledProblem) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        header = {
            "version": CACHE_VERSION,
            "theta": problem.theta,
            "beta": problem.beta,
            "dimension": problem.dimension,
            "jacobi_set": problem.jacobi_set,
            "v0_prime": problem.v0_prime,
            "basis_hash": problem.basis_hash,
        }
        tmp = self._path(key).with_suffix(".tmp.npz")
        np.savez(tmp, header=json.dumps(header), h=problem.h_matrix, s=problem.s_matrix)
        tmp.replace(self._path(key))


def assemble_cached(
    cfg: MassConfig,
    pot: GaussPotential,
    basis: ChannelBasis,
    thetas: Iterable[float],
    cache: MatrixCache | None = None,
    jacobi_set: int = 2,
) -> list[AssembledProblem]:
    thetas = list(thetas)
    if cache is None:
        return assemble_many(cfg, pot, basis, thetas, jacobi_set)
    keys = [MatrixCache.key(cfg.beta, t, basis, pot.v0_prime, jacobi_set) for t in thetas]
    hits = [cache.load(k) for k in keys]
    missing = [t for t, h in zip(thetas, hits) if h is None]
    fresh = iter(assemble_many(cfg, pot, basis, missing, jacobi_set) if missing else [])
    out = []
    for k, hit in zip(keys, hits):
        if hit is None:
            hit = next(fresh)
            cache.store(k, hit)
        out.append(hit)
    return out
