"""Classification of complex-scaled spectra and resonance extraction.

Under complex scaling, bound and resonant eigenvalues do not move with the
rotation angle θ, whereas discretized continua sit on rays
``E_th + ρ e^{-2iθ}`` starting at each two-body threshold (and at the
three-body breakup energy 0).  The classifier therefore

1. links each eigenvalue at the largest θ to its nearest neighbours at the
   other angles,
2. calls a linked cluster *continuum* when its members sit on a rotating ray
   (two or more inside the angular corridor, or an angle seen from a
   threshold that follows ``-2θ``),
3. calls the remaining clusters *discrete* when their dispersion across θ is
   below ``max(resonance_tol, width_rel_tol * Γ)``: *bound* below the lowest
   threshold, *resonance* above it.  The width-relative allowance keeps broad
   resonances, whose θ-drift at finite basis size scales with their width.

A second candidate within the acceptance tolerance, a partner claimed by two
clusters, or a position within ``threshold_gap`` of a threshold makes the
cluster *unidentified*.
"""

from __future__ import annotations

import enum
import json
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .units import ComplexEnergy


class PointClass(str, enum.Enum):
    BOUND = "bound"
    RESONANCE = "resonance"
    CONTINUUM = "continuum"
    UNIDENTIFIED = "unidentified"


@dataclass(frozen=True)
class Threshold:
    """A two-body level ``energy`` with a label such as ``"2s"``."""

    label: str
    energy: float


@dataclass(frozen=True)
class SpectrumPoint:
    energy: ComplexEnergy
    theta: float
    cls: PointClass
    stability_score: float
    cluster: int = -1

    @property
    def value(self) -> complex:
        return self.energy.value

    def to_json(self) -> dict:
        return {
            "re": self.energy.e_r,
            "im": -0.5 * self.energy.gamma,
            "theta_deg": math.degrees(self.theta),
            "class": self.cls.value,
            # null for points that are not linked across angles (strict JSON has no inf)
            "stability": self.stability_score if math.isfinite(self.stability_score) else None,
            "cluster": self.cluster,
        }


@dataclass(frozen=True)
class ResonanceFamily:
    """Resonances sitting below the parent threshold and above the next lower one."""

    dimension: int
    parent: str
    members: tuple[complex, ...] = field(default=())

    @property
    def label(self) -> str:
        return f"{self.dimension}D,{self.parent}"


@dataclass(frozen=True)
class ResonanceEstimate:
    e_r: float
    gamma: float
    accuracy: float
    n_theta: int


@dataclass(frozen=True)
class ClassifierSettings:
    resonance_tol: float = 1e-3
    width_rel_tol: float = 0.25
    bound_tol: float = 1e-3
    corridor_deg: float = 1.0
    # angle of a continuum point seen from its threshold moves like -2θ; resonances stay put
    rotation_slope: float = 1.0
    link_tol: float | None = None
    # states this close to a threshold cannot be told apart from its continuum edge
    threshold_gap: float = 5e-3
    e_max: float = 0.0

    @property
    def linking(self) -> float:
        return 0.05 if self.link_tol is None else self.link_tol


def thresholds_from_levels(levels: Mapping[str, Sequence[float]]) -> list[Threshold]:
    """Sorted thresholds from ``{"s": [...], "p": [...]}`` style level lists."""
    out = []
    for sector, values in levels.items():
        for n, e in enumerate(values, start=1):
            out.append(Threshold(f"{n}{sector}", float(e)))
    return sorted(out, key=lambda t: t.energy)


def _anchors(thresholds: Sequence[Threshold]) -> list[float]:
    return sorted({t.energy for t in thresholds} | {0.0})


def _ray_angle(e: complex, anchor: float) -> float | None:
    if e.real <= anchor:
        return None
    return math.degrees(math.atan2(e.imag, e.real - anchor))


def in_corridor(e: complex, theta: float, anchors: Iterable[float], half_width_deg: float) -> bool:
    """Whether ``e`` lies within ``half_width_deg`` of a ``-2θ`` ray from an anchor."""
    target = -2.0 * math.degrees(theta)
    for a in anchors:
        ang = _ray_angle(e, a)
        if ang is not None and abs(ang - target) <= half_width_deg:
            return True
    return False


def _rotating(members: Sequence[complex], thetas: Sequence[float], anchors: Sequence[float], slope_tol: float) -> bool:
    """Whether the angle seen from some anchor tracks ``-2θ`` across the cluster."""
    th = np.degrees(np.asarray(thetas))
    if np.ptp(th) == 0:
        return False
    for a in anchors:
        angles = [_ray_angle(e, a) for e in members]
        if any(x is None for x in angles):
            continue
        slope = np.polyfit(th, np.asarray(angles, dtype=float), 1)[0]
        if abs(slope + 2.0) < slope_tol:
            return True
    return False


def _dispersion(members: Sequence[complex]) -> float:
    z = np.asarray(members)
    return float(np.max(np.abs(z - z.mean())))


def classify(
    spectra: Mapping[float, Sequence[complex]],
    thresholds: Sequence[Threshold],
    settings: ClassifierSettings = ClassifierSettings(),
) -> list[SpectrumPoint]:
    """Tag every eigenvalue with ``Re E < e_max`` at every θ (radians).

    Discrete clusters share a ``cluster`` id; their ``stability_score`` is the
    maximal distance of a member from the cluster mean.
    """
    thetas = sorted(float(t) for t in spectra)
    if len(set(thetas)) < 2:
        raise ValueError("classification needs at least two distinct angles")
    anchors = _anchors(thresholds)
    lowest = min(t.energy for t in thresholds) if thresholds else 0.0
    values = {t: np.asarray([complex(e) for e in spectra[t] if complex(e).real < settings.e_max]) for t in thetas}
    ref = thetas[-1]
    others = thetas[:-1]
    tol = settings.linking

    # nearest partner at every other angle, and the distance to the runner-up
    links: list[list[int] | None] = []
    runner_up: list[float] = []
    for e in values[ref]:
        chosen, second = [], math.inf
        for t in others:
            d = np.abs(values[t] - e)
            order = np.argsort(d)
            if d.size == 0 or d[order[0]] > tol:
                chosen = None
                break
            chosen.append(int(order[0]))
            if d.size > 1:
                second = min(second, float(d[order[1]]))
        links.append(chosen)
        runner_up.append(second)
    claimed: dict[tuple[int, int], int] = {}
    for ch in links:
        for k, j in enumerate(ch or ()):
            claimed[k, j] = claimed.get((k, j), 0) + 1

    assigned: dict[tuple[float, int], SpectrumPoint] = {}
    cluster_id = 0
    for i, e in enumerate(values[ref]):
        ch = links[i]
        if ch is None:
            continue
        members = [values[t][j] for t, j in zip(others, ch)] + [e]
        spread = _dispersion(members)
        mean = complex(np.mean(members))
        accept = max(settings.resonance_tol, -2.0 * settings.width_rel_tol * mean.imag)
        # a fixed point can cross one ray by accident, never two
        on_rays = sum(in_corridor(m, t, anchors, settings.corridor_deg) for m, t in zip(members, thetas))
        if on_rays >= 2 or _rotating(members, thetas, anchors, settings.rotation_slope):
            cls = PointClass.CONTINUUM
        elif spread >= accept:
            continue
        elif runner_up[i] <= accept or any(claimed[k, j] > 1 for k, j in enumerate(ch)) or min(abs(mean - a) for a in anchors) < settings.threshold_gap:
            cls = PointClass.UNIDENTIFIED
        elif mean.real < lowest:
            cls = PointClass.BOUND if abs(mean.imag) <= settings.bound_tol else PointClass.UNIDENTIFIED
        elif mean.imag <= settings.bound_tol:
            cls = PointClass.RESONANCE
        else:
            cls = PointClass.UNIDENTIFIED
        cid = cluster_id if cls in (PointClass.BOUND, PointClass.RESONANCE, PointClass.UNIDENTIFIED) else -1
        if cid >= 0:
            cluster_id += 1
        for t, j, m in zip(thetas, list(ch) + [i], members):
            assigned[(t, j)] = SpectrumPoint(ComplexEnergy.from_complex(m), t, cls, spread, cid)

    points = []
    for t in thetas:
        for j, e in enumerate(values[t]):
            p = assigned.get((t, j))
            if p is None:
                # unlinked or moving with θ: part of a rotated continuum
                p = SpectrumPoint(ComplexEnergy.from_complex(e), t, PointClass.CONTINUUM, math.inf)
            points.append(p)
    return points


def classify_single_angle(
    theta: float,
    eigenvalues: Sequence[complex],
    thresholds: Sequence[Threshold],
    settings: ClassifierSettings = ClassifierSettings(),
) -> list[SpectrumPoint]:
    """Degenerate one-angle classification: corridor test only, no stability check.

    Every point outside the continuum corridors is treated as discrete and gets
    its own cluster; the stability score is NaN.
    """
    anchors = _anchors(thresholds)
    lowest = min(t.energy for t in thresholds) if thresholds else 0.0
    points = []
    cid = 0
    for e in (complex(v) for v in eigenvalues):
        if e.real >= settings.e_max:
            continue
        if in_corridor(e, theta, anchors, settings.corridor_deg):
            cls, k = PointClass.CONTINUUM, -1
        else:
            if e.real < lowest:
                cls = PointClass.BOUND if abs(e.imag) <= settings.bound_tol else PointClass.UNIDENTIFIED
            elif e.imag <= settings.bound_tol and min(abs(e - a) for a in anchors) >= settings.threshold_gap:
                cls = PointClass.RESONANCE
            else:
                cls = PointClass.UNIDENTIFIED
            k, cid = cid, cid + 1
        points.append(SpectrumPoint(ComplexEnergy.from_complex(e), theta, cls, math.nan, k))
    return points


def family_of(e_r: float, thresholds: Sequence[Threshold]) -> str | None:
    """Label of the lowest threshold above ``e_r``, if ``e_r`` is above the lowest one."""
    ordered = sorted(thresholds, key=lambda t: t.energy)
    if not ordered or e_r <= ordered[0].energy:
        return None
    for t in ordered[1:]:
        if e_r < t.energy:
            return t.label
    return None


def families(points: Sequence[SpectrumPoint], thresholds: Sequence[Threshold], dimension: int) -> dict[str, ResonanceFamily]:
    """Group resonance clusters (averaged over θ) into families keyed by parent label."""
    clusters: dict[int, list[complex]] = {}
    for p in points:
        if p.cls is PointClass.RESONANCE:
            clusters.setdefault(p.cluster, []).append(p.value)
    grouped: dict[str, list[complex]] = {}
    for members in clusters.values():
        mean = complex(np.mean(members))
        parent = family_of(mean.real, thresholds)
        if parent is not None:
            grouped.setdefault(parent, []).append(mean)
    return {
        parent: ResonanceFamily(dimension, parent, tuple(sorted(ms, key=lambda z: z.real)))
        for parent, ms in grouped.items()
    }


def extract_resonance(
    family: ResonanceFamily | str,
    points: Sequence[SpectrumPoint],
    thresholds: Sequence[Threshold],
    basis_variation: float = 0.0,
) -> ResonanceEstimate | None:
    """``(E_r', Γ', accuracy)`` of the deepest member of a family, or ``None``.

    ``E_r'`` and ``Γ' = -2 Im E`` are averaged over θ; the accuracy is the
    θ-dispersion, combined with an optional basis-size variation.
    """
    parent = family.parent if isinstance(family, ResonanceFamily) else family
    clusters: dict[int, list[complex]] = {}
    for p in points:
        if p.cls is PointClass.RESONANCE:
            clusters.setdefault(p.cluster, []).append(p.value)
    best: list[complex] | None = None
    for members in clusters.values():
        mean = complex(np.mean(members))
        if family_of(mean.real, thresholds) != parent:
            continue
        if best is None or mean.real < np.mean(best).real:
            best = members
    if best is None:
        return None
    mean = complex(np.mean(best))
    accuracy = max(_dispersion(best), float(basis_variation))
    return ResonanceEstimate(e_r=mean.real, gamma=max(0.0, -2.0 * mean.imag), accuracy=accuracy, n_theta=len(best))


def spectrum_json(points: Sequence[SpectrumPoint], beta: float, dimension: int, thresholds: Sequence[Threshold]) -> dict:
    return {
        "beta": beta,
        "dimension": dimension,
        "thresholds": [{"label": t.label, "energy": t.energy} for t in thresholds],
        "points": [p.to_json() for p in points],
    }


def write_spectrum_json(path: Path | str, points, beta: float, dimension: int, thresholds) -> None:
    Path(path).write_text(json.dumps(spectrum_json(points, beta, dimension, thresholds), indent=1))
