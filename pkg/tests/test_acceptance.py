"""Acceptance criteria, one test per criterion.

Each test records its sub-checks; the terminal summary prints one PASS/FAIL
line per criterion followed by the measured values.
"""

import itertools
import math
import subprocess
import sys
import time
from collections import defaultdict
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment
from scipy.signal import find_peaks

from gemcsm.assembly import ChannelBasis, assemble
from gemcsm.csm_analysis import PointClass
from gemcsm.gauss_basis import GaussBasisSpec
from gemcsm.scan import RunConfig, analyse_beta, default_basis, log_grid, run_scan
from gemcsm.twobody import GaussPotential, solve_two_body
from gemcsm.units import make_mass_config

ANCHOR_DEPTH = {3: -19.77, 1: -5.44}
THETAS_DEG = (4.0, 7.0, 10.0)
SCAN_3D = log_grid(0.25, 20.0, 12)
SCAN_1D = log_grid(1.0, 20.0, 24)
SMOKE_BUDGET_S = 30 * 60
HERE = Path(__file__).parent


@pytest.fixture(scope="module")
def beta_result():
    cache = {}

    def get(dim, beta):
        if (dim, beta) not in cache:
            cache[dim, beta] = analyse_beta(RunConfig(dimension=dim, thetas_deg=THETAS_DEG), beta)
        return cache[dim, beta]

    return get


def _scan(dim, betas, out):
    config = RunConfig(dimension=dim, betas=betas, thetas_deg=THETAS_DEG, densify_levels=0, output=out, workers=1)
    start = time.perf_counter()
    records = run_scan(config)
    return records, time.perf_counter() - start


@pytest.fixture(scope="module")
def scan3d(tmp_path_factory):
    return _scan(3, SCAN_3D, tmp_path_factory.mktemp("scan3d"))


@pytest.fixture(scope="module")
def scan1d(tmp_path_factory):
    return _scan(1, SCAN_1D, tmp_path_factory.mktemp("scan1d"))


def _series(records, family):
    rows = sorted((r for r in records if r.ok and r.family == family), key=lambda r: r.beta)
    return np.array([r.beta for r in rows]), np.array([r.gamma for r in rows]), rows


def _record(result, family):
    return next((r for r in result.records if r.ok and r.family == family), None)


def _interior_extrema(values, sign):
    v = sign * np.asarray(values)
    return [i for i in range(1, len(v) - 1) if v[i] > v[i - 1] and v[i] > v[i + 1]]


def _max_pairwise(values):
    return max((abs(a - b) for a, b in itertools.combinations(values, 2)), default=0.0)


def _discrete_spread(result):
    """Largest pairwise distance inside any bound or resonance cluster."""
    clusters = defaultdict(list)
    for p in result.points:
        if p.cls in (PointClass.BOUND, PointClass.RESONANCE) and p.cluster >= 0:
            clusters[p.cluster].append(p.value)
    worst, where = 0.0, None
    for members in clusters.values():
        spread = _max_pairwise(members)
        if spread > worst:
            worst, where = spread, np.mean(members)
    return worst, where, len(clusters)


def _ray_deviation(result):
    """Worst angle between the fitted lowest-threshold branch and the -2θ ray, in degrees."""
    anchors = sorted(t.energy for t in result.thresholds)
    lo, hi = anchors[0], anchors[1]
    worst = 0.0
    for theta_deg in THETAS_DEG:
        z = np.array(
            [
                p.value
                for p in result.points
                if p.cls is PointClass.CONTINUUM
                and math.isclose(math.degrees(p.theta), theta_deg)
                and lo + 0.02 < p.value.real < hi - 0.02
            ]
        )
        if len(z) < 3:
            return math.inf
        x, y = z.real - lo, z.imag
        angle = math.degrees(math.atan((x @ y) / (x @ x)))
        worst = max(worst, abs(angle + 2.0 * theta_deg))
    return worst


@pytest.mark.criterion(1, title="two-body anchors")
def test_criterion_1_two_body_anchors(criterion):
    e3 = solve_two_body(GaussPotential(ANCHOR_DEPTH[3]), 3, "s").levels[1]
    e1 = solve_two_body(GaussPotential(ANCHOR_DEPTH[1]), 1, "even").levels[1]
    criterion.check("3D second s level at v0'=-19.77", abs(e3 + 0.1) <= 0.002, f"{e3:.6f} (target -0.100 +- 0.002)")
    criterion.check("1D second even level at v0'=-5.44", abs(e1 + 0.1) <= 0.002, f"{e1:.6f} (target -0.100 +- 0.002)")
    criterion.verdict()


@pytest.mark.criterion(2, title="threshold positions")
def test_criterion_2_threshold_positions(criterion):
    p3 = solve_two_body(GaussPotential(ANCHOR_DEPTH[3]), 3, "p").levels[0]
    p1 = solve_two_body(GaussPotential(ANCHOR_DEPTH[1]), 1, "odd").levels[0]
    criterion.check("3D 1p level", abs(p3 + 0.25) <= 0.02, f"{p3:.6f} (target -0.25 +- 0.02)")
    criterion.check("1D lowest odd level", abs(p1 + 1.5) <= 0.1, f"{p1:.6f} (target -1.5 +- 0.1)")
    criterion.verdict()


@pytest.mark.criterion(3, title="resonance position anchor at beta=1")
def test_criterion_3_resonance_positions(criterion, beta_result):
    for dim, target, tol in ((3, -3.0, 0.3), (1, -0.2, 0.05)):
        rec = _record(beta_result(dim, 1.0), f"{dim}D,2s")
        if rec is None:
            criterion.check(f"deepest ({dim}D,2s) Re E'", False, "no resonance found in the family")
            continue
        criterion.check(
            f"deepest ({dim}D,2s) Re E'",
            abs(rec.e_r - target) <= tol,
            f"{rec.e_r:.5f} (target {target} +- {tol}), Gamma'={rec.gamma:.3e}",
        )
    criterion.verdict()


@pytest.mark.criterion(4, title="theta stability and continuum rays")
def test_criterion_4_theta_stability(criterion, beta_result):
    for dim in (3, 1):
        for beta, tol in ((1.0, 1e-3), (20.0, 1e-5)):
            result = beta_result(dim, beta)
            spread, where, n = _discrete_spread(result)
            at = f" worst at {where:.5f}" if where is not None else ""
            criterion.check(
                f"{dim}D beta={beta:g} discrete eigenvalues over {n} clusters",
                n > 0 and spread <= tol,
                f"max pairwise spread {spread:.2e} (tolerance {tol:.0e}){at}",
            )
            dev = _ray_deviation(result)
            criterion.check(
                f"{dim}D beta={beta:g} lowest continuum ray angle",
                dev <= 0.5,
                f"worst deviation from -2 theta {dev:.3f} deg (tolerance 0.5)",
            )
    criterion.verdict()


@pytest.mark.criterion(5, title="mass-ratio trend")
def test_criterion_5_mass_ratio_trend(criterion, scan3d, scan1d, beta_result):
    records, seconds = scan3d
    criterion.check(
        f"{len(SCAN_3D)}-point 3D smoke scan runtime", seconds <= SMOKE_BUDGET_S, f"{seconds:.0f} s (budget {SMOKE_BUDGET_S} s)"
    )
    errors = [r for r in records if not r.ok]
    criterion.check("3D scan rows without errors", not errors, f"{len(errors)} error rows")

    betas, gammas, _ = _series(records, "3D,2s")
    if len(gammas) < 3:
        criterion.check("(3D,2s) tracked", False, f"only {len(gammas)} points")
        criterion.verdict()
    top = int(np.argmax(gammas))
    criterion.check("(3D,2s) global width maximum in [0.5, 2]", 0.5 <= betas[top] <= 2.0, f"at beta={betas[top]:.4g}")
    minima = [betas[i] for i in _interior_extrema(gammas, -1) if 10.0 <= betas[i] <= 20.0]
    criterion.check("(3D,2s) local width minimum in [10, 20]", bool(minima), f"minima at {[round(float(b), 3) for b in minima]}")

    scans = {"3D,2s": records, "1D,1p": scan1d[0], "1D,2s": scan1d[0]}
    for family, rows in scans.items():
        _, g, _ = _series(rows, family)
        if len(g) < 3:
            criterion.check(f"({family}) envelope", False, f"only {len(g)} points")
            continue
        start = int(np.argmax(g))
        peaks = [g[start]] + [g[i] for i in _interior_extrema(g, 1) if i > start]
        decreasing = all(x > y for x, y in zip(peaks, peaks[1:])) and g[-1] < g[start]
        criterion.check(
            f"({family}) envelope decreases past the global maximum",
            decreasing,
            "peaks " + ", ".join(f"{x:.2e}" for x in peaks) + f"; last {g[-1]:.2e}",
        )

    for family, dim in (("3D,2s", 3), ("1D,1p", 1), ("1D,2s", 1)):
        r1, r20 = _record(beta_result(dim, 1.0), family), _record(beta_result(dim, 20.0), family)
        if r1 is None or r20 is None:
            criterion.check(f"({family}) lifetime growth beta 1 -> 20", False, "family missing at an endpoint")
            continue
        orders = math.log10(r20.tau / r1.tau)
        criterion.check(
            f"({family}) lifetime growth beta 1 -> 20",
            orders >= 3.0,
            f"{orders:.2f} orders (tau' {r1.tau:.3e} -> {r20.tau:.3e}; need >= 3)",
        )
    criterion.verdict()


@pytest.mark.criterion(6, title="1D width oscillations")
def test_criterion_6_one_dimensional_oscillations(criterion, scan1d):
    records = scan1d[0]
    betas, gammas, _ = _series(records, "1D,1p")
    criterion.check("(1D,1p) tracked over the 1D scan", len(gammas) == len(SCAN_1D), f"{len(gammas)}/{len(SCAN_1D)} points")
    logs = np.log10(np.maximum(gammas, 1e-12))
    # prominence of 0.3 decades, i.e. a factor of two
    maxima, _ = find_peaks(logs, prominence=0.3)
    minima, _ = find_peaks(-logs, prominence=0.3)
    criterion.check("(1D,1p) local maxima in [1, 20]", len(maxima) >= 2, f"{len(maxima)} at beta {[round(float(betas[i]), 2) for i in maxima]}")
    criterion.check("(1D,1p) local minima in [1, 20]", len(minima) >= 2, f"{len(minima)} at beta {[round(float(betas[i]), 2) for i in minima]}")
    criterion.verdict()


ORACLE_MODULES = ("test_gauss_basis.py", "test_twobody.py", "test_assembly.py", "test_eigensolver.py")


@pytest.mark.criterion(7, title="oracle suites")
def test_criterion_7_oracle_suites(criterion):
    cmd = [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *(str(HERE / m) for m in ORACLE_MODULES)]
    proc = subprocess.run(cmd, capture_output=True, text=True, cwd=HERE.parent)
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr.strip()[-200:]
    criterion.check("quadrature, grid, dense-oracle, monotonicity and mass-ratio independence suites", proc.returncode == 0, tail)
    criterion.verdict()


def _sign_similarity(a2, a3):
    """Diagonal +-1 relating the two assemblies, read off the strongest-coupled row."""
    k = int(np.argmin(np.sum(np.abs(a2) < 1e-8 * np.abs(a2).max(), axis=1)))
    return np.where((a2[k] * a3[k]).real >= 0, 1.0, -1.0) * np.sign((a2[k, k] * a3[k, k]).real)


MODERATE = {
    3: ChannelBasis(3, GaussBasisSpec(8, 30.0, 0.02, complex_omega=0.8), GaussBasisSpec(8, 30.0, 0.02, complex_omega=0.8)),
    1: ChannelBasis(1, GaussBasisSpec(6, 20.0, 0.05), GaussBasisSpec(6, 10.0, 0.04), blocks=((0, 0), (1, 1))),
}


@pytest.mark.criterion(8, title="exchange-symmetry consistency (Jacobi set 2 vs 3)")
def test_criterion_8_exchange_symmetry(criterion):
    theta = math.radians(7.0)
    for dim in (3, 1):
        pot = GaussPotential(ANCHOR_DEPTH[dim])
        for beta in (1.0, 5.0, 20.0):
            cfg = make_mass_config(beta)
            p2, p3 = (assemble(cfg, pot, default_basis(dim), theta, jacobi_set=c) for c in (2, 3))
            s = _sign_similarity(p2.s_matrix, p3.s_matrix)
            flip = np.outer(s, s)
            ds = np.abs(flip * p2.s_matrix - p3.s_matrix).max() / np.abs(p3.s_matrix).max()
            dh = np.abs(flip * p2.h_matrix - p3.h_matrix).max() / np.abs(p3.h_matrix).max()
            del p2, p3
            criterion.check(
                f"{dim}D beta={beta:g} default-basis matrices equal up to sign similarity",
                max(ds, dh) <= 1e-12,
                f"relative difference S {ds:.1e}, H {dh:.1e}",
            )
            e2, e3 = (
                assemble(cfg, pot, MODERATE[dim], theta, jacobi_set=c).solve(max_discard=0.0).eigenvalues for c in (2, 3)
            )
            cost = np.abs(e2[:, None] - e3[None, :])
            rows, cols = linear_sum_assignment(cost)
            diff = cost[rows, cols] / np.maximum(1.0, np.abs(e2[rows]))
            criterion.check(
                f"{dim}D beta={beta:g} spectra of {len(e2)} states",
                len(e2) == len(e3) and diff.max() <= 1e-10,
                f"max |dE|/max(1,|E|) {diff.max():.1e}",
            )
    criterion.verdict()
