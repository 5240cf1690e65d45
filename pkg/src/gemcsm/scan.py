"""Mass-ratio scans: configuration, per-β pipeline, persistence and plot data.

One β point runs assemble → solve → classify → extract for every θ of the
configuration.  The pair depth is tuned once (prime scaling, where the
two-body problem does not depend on β) or once per β (tilde scaling).
Per-β results are stored as small JSON files under ``<output>/rows`` so that
an interrupted scan can be resumed; the CSV and JSON summaries are written
from those in a fixed ``(β, family)`` order.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import traceback
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .assembly import ChannelBasis, assemble_many, theta_bound
from .csm_analysis import (
    ClassifierSettings,
    PointClass,
    SpectrumPoint,
    Threshold,
    classify,
    classify_single_angle,
    extract_resonance,
    family_of,
    spectrum_json,
    thresholds_from_levels,
)
from .gauss_basis import GaussBasisSpec
from .twobody import GaussPotential, solve_two_body, tune_depth
from .units import (
    DomainError,
    Scaling,
    make_mass_config,
    tilde_factor,
    width_to_lifetime,
)

log = logging.getLogger(__name__)

WORKERS_ENV = "GEMCSM_WORKERS"
CSV_COLUMNS = ("beta", "family", "E_r", "Gamma", "tau", "accuracy", "v0", "E_r_tilde", "Gamma_tilde", "error")

# parity sectors of the pair levels that open thresholds for the s-wave (3D) or both-parity (1D) basis
_THRESHOLD_SECTORS = {1: {"s": "even", "p": "odd"}, 3: {"s": "s"}}
_TUNE_SECTOR = {1: "even", 3: "s"}


def default_basis(dimension: int) -> ChannelBasis:
    """Default three-body basis for ``dimension``."""
    if dimension == 1:
        return ChannelBasis(
            1,
            GaussBasisSpec(32, 318.9, 0.037),
            GaussBasisSpec(32, 45.65, 0.023),
            blocks=((0, 0), (1, 1)),
        )
    if dimension == 3:
        return ChannelBasis(
            3,
            GaussBasisSpec(16, 68.83, 0.0058, complex_omega=0.8),
            GaussBasisSpec(16, 61.85, 0.011, complex_omega=0.8),
        )
    raise DomainError("dimension must be 1 or 3")


def log_grid(lo: float, hi: float, n: int) -> list[float]:
    return [float(b) for b in np.geomspace(lo, hi, n)]


@dataclass(frozen=True)
class TuneTarget:
    """Put level ``level`` (1-based) of the even / s-wave sector at ``energy``."""

    level: int = 2
    energy: float = -0.1


@dataclass
class RunConfig:
    dimension: int = 3
    betas: list[float] | None = None
    beta_range: tuple[float, float, int] = (0.05, 20.0, 80)
    densify_levels: int = 3
    thetas_deg: tuple[float, ...] = (4.0, 7.0, 10.0)
    basis: ChannelBasis | None = None
    v0_prime: float | None = None
    target: TuneTarget = field(default_factory=TuneTarget)
    scaling: Scaling = Scaling.PRIME
    output: Path | None = None
    workers: int = 1
    dump_spectra: bool = False
    max_discard: float | None = None
    classifier: ClassifierSettings = field(default_factory=ClassifierSettings)

    def __post_init__(self) -> None:
        if self.dimension not in (1, 3):
            raise DomainError("dimension must be 1 or 3")
        if self.basis is None:
            self.basis = default_basis(self.dimension)
        if self.basis.dimension != self.dimension:
            raise DomainError("basis dimension does not match the run dimension")
        if self.max_discard is None:
            # the 1D product grid is heavily over-complete; see the README
            self.max_discard = 0.75 if self.dimension == 1 else 0.25
        for b in self.beta_grid():
            if not (math.isfinite(b) and b > 0):
                raise DomainError(f"mass ratios must be positive and finite, got {b!r}")
        if not self.thetas_deg or any(not (0.0 <= t < 45.0) for t in self.thetas_deg):
            raise DomainError("rotation angles must lie in [0, 45) degrees")
        if self.output is not None:
            self.output = Path(self.output)
        self.scaling = Scaling(self.scaling)

    @property
    def thetas(self) -> list[float]:
        return [math.radians(t) for t in self.thetas_deg]

    def beta_grid(self) -> list[float]:
        if self.betas is not None:
            return sorted(float(b) for b in self.betas)
        lo, hi, n = self.beta_range
        return log_grid(float(lo), float(hi), int(n))

    def to_dict(self) -> dict:
        d = {
            "dimension": self.dimension,
            "betas": self.betas,
            "beta_range": list(self.beta_range),
            "densify_levels": self.densify_levels,
            "thetas_deg": list(self.thetas_deg),
            "basis": _basis_to_dict(self.basis),
            "v0_prime": self.v0_prime,
            "target": asdict(self.target),
            "scaling": self.scaling.value,
            "max_discard": self.max_discard,
            "classifier": asdict(self.classifier),
        }
        return d


def _basis_to_dict(basis: ChannelBasis) -> dict:
    return {
        "pair": asdict(basis.pair),
        "third": asdict(basis.third),
        "blocks": [list(b) for b in basis.blocks],
    }


def _basis_from_dict(dimension: int, d: dict) -> ChannelBasis:
    default = default_basis(dimension)
    pair = replace(default.pair, **d.get("pair", {}))
    third = replace(default.third, **d.get("third", {}))
    blocks = tuple(tuple(b) for b in d.get("blocks", default.blocks))
    return ChannelBasis(dimension, pair, third, blocks)


def config_from_mapping(data: dict) -> RunConfig:
    data = dict(data)
    dimension = int(data.pop("dimension", 3))
    kwargs: dict[str, Any] = {"dimension": dimension}
    if "basis" in data:
        kwargs["basis"] = _basis_from_dict(dimension, data.pop("basis") or {})
    if "target" in data:
        kwargs["target"] = TuneTarget(**data.pop("target"))
    if "classifier" in data:
        kwargs["classifier"] = ClassifierSettings(**data.pop("classifier"))
    if "beta_range" in data:
        lo, hi, n = data.pop("beta_range")
        kwargs["beta_range"] = (float(lo), float(hi), int(n))
    if "thetas_deg" in data:
        kwargs["thetas_deg"] = tuple(float(t) for t in data.pop("thetas_deg"))
    if "scaling" in data:
        kwargs["scaling"] = Scaling(data.pop("scaling"))
    known = {"betas", "densify_levels", "v0_prime", "output", "workers", "dump_spectra", "max_discard"}
    unknown = set(data) - known
    if unknown:
        raise DomainError(f"unknown configuration keys: {sorted(unknown)}")
    kwargs.update(data)
    return RunConfig(**kwargs)


def load_config(path: Path | str) -> RunConfig:
    """Read a YAML (or JSON) configuration file."""
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    return config_from_mapping(data)


@dataclass(frozen=True)
class ScanRecord:
    beta: float
    family: str
    e_r: float = math.nan
    gamma: float = math.nan
    tau: float = math.nan
    accuracy: float = math.nan
    v0_prime: float = math.nan
    e_r_tilde: float = math.nan
    gamma_tilde: float = math.nan
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error

    def to_json(self) -> dict:
        return {k: _json_float(v) for k, v in asdict(self).items()}

    @classmethod
    def from_json(cls, d: dict) -> ScanRecord:
        kw = {}
        for k, v in d.items():
            if k in ("family", "error"):
                kw[k] = v or ""
            else:
                kw[k] = math.nan if v is None else float(v)
        return cls(**kw)


def _json_float(v):
    if isinstance(v, float):
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf"
    return v


def lifetime(gamma: float, accuracy: float, dimension: int) -> float:
    """``τ'``, infinite when the width cannot be told apart from zero."""
    if gamma <= accuracy or gamma <= 0.0:
        return math.inf
    return width_to_lifetime(gamma, dimension)


@dataclass
class BetaResult:
    beta: float
    records: list[ScanRecord]
    points: list[SpectrumPoint] = field(default_factory=list)
    thresholds: list[Threshold] = field(default_factory=list)


def two_body_thresholds(dimension: int, pot: GaussPotential) -> list[Threshold]:
    levels = {label: solve_two_body(pot, dimension, sector).levels for label, sector in _THRESHOLD_SECTORS[dimension].items()}
    return thresholds_from_levels(levels)


def tuned_potential(config: RunConfig, beta: float) -> GaussPotential:
    """Pair depth for ``beta`` (β-independent unless the target is tilde-scaled)."""
    if config.v0_prime is not None:
        return GaussPotential(float(config.v0_prime))
    target = config.target.energy
    if config.scaling is Scaling.TILDE:
        target = target / tilde_factor(make_mass_config(beta))
    return tune_depth(config.dimension, _TUNE_SECTOR[config.dimension], config.target.level, target)


def analyse_beta(
    config: RunConfig,
    beta: float,
    pot: GaussPotential | None = None,
    thresholds: Sequence[Threshold] | None = None,
) -> BetaResult:
    """Full pipeline at one mass ratio; failures become a single error row."""
    try:
        cfg = make_mass_config(beta)
        if pot is None:
            pot = tuned_potential(config, beta)
        if thresholds is None:
            thresholds = two_body_thresholds(config.dimension, pot)
        limit = theta_bound(cfg, config.basis)
        if max(config.thetas) >= limit:
            raise DomainError(f"rotation angle above the analytic bound {math.degrees(limit):.2f} deg")
        problems = assemble_many(cfg, pot, config.basis, config.thetas)
        spectra = {p.theta: p.solve(max_discard=config.max_discard).eigenvalues for p in problems}
        del problems
        if len(spectra) == 1:
            ((theta, vals),) = spectra.items()
            points = classify_single_angle(theta, vals, thresholds, config.classifier)
        else:
            points = classify(spectra, thresholds, config.classifier)
        scale = tilde_factor(cfg)
        records = []
        parents = sorted({family_of(p.value.real, thresholds) for p in points if p.cls is PointClass.RESONANCE} - {None})
        for parent in parents:
            est = extract_resonance(parent, points, thresholds)
            if est is None:
                continue
            records.append(
                ScanRecord(
                    beta=beta,
                    family=f"{config.dimension}D,{parent}",
                    e_r=est.e_r,
                    gamma=est.gamma,
                    tau=lifetime(est.gamma, est.accuracy, config.dimension),
                    accuracy=est.accuracy,
                    v0_prime=pot.v0_prime,
                    e_r_tilde=est.e_r * scale if config.scaling is Scaling.TILDE else math.nan,
                    gamma_tilde=est.gamma * scale if config.scaling is Scaling.TILDE else math.nan,
                )
            )
        return BetaResult(beta, records, points, list(thresholds))
    except Exception as exc:  # noqa: BLE001 - every failure is reported in-row
        log.debug("beta=%r failed:\n%s", beta, traceback.format_exc())
        return BetaResult(beta, [ScanRecord(beta=beta, family="", error=f"{type(exc).__name__}: {exc}")])


def _beta_key(beta: float) -> str:
    return repr(float(beta)).replace(".", "p")


def _row_path(out: Path, beta: float) -> Path:
    return out / "rows" / f"beta-{_beta_key(beta)}.json"


def _store_result(config: RunConfig, result: BetaResult) -> None:
    out = config.output
    if out is None:
        return
    path = _row_path(out, result.beta)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps({"beta": result.beta, "records": [r.to_json() for r in result.records]}))
    tmp.replace(path)
    if config.dump_spectra and result.points:
        spec_dir = out / "spectra"
        spec_dir.mkdir(parents=True, exist_ok=True)
        doc = spectrum_json(result.points, result.beta, config.dimension, result.thresholds)
        (spec_dir / f"beta-{_beta_key(result.beta)}.json").write_text(json.dumps(doc))


def _load_result(config: RunConfig, beta: float) -> BetaResult | None:
    path = _row_path(config.output, beta)
    if not path.exists():
        return None
    try:
        doc = json.loads(path.read_text())
        return BetaResult(beta, [ScanRecord.from_json(r) for r in doc["records"]])
    except (OSError, ValueError, KeyError, TypeError):
        return None


def worker_count(config: RunConfig) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", WORKERS_ENV, env)
    return max(1, int(config.workers))


def _job(args):
    config, beta, pot, thresholds = args
    return analyse_beta(config, beta, pot, thresholds)


def _run_points(config: RunConfig, betas: Sequence[float], pot, thresholds, resume: bool) -> dict[float, BetaResult]:
    done: dict[float, BetaResult] = {}
    todo = []
    for b in betas:
        hit = _load_result(config, b) if (resume and config.output is not None) else None
        if hit is not None:
            done[b] = hit
        else:
            todo.append(b)
    jobs = [(config, b, pot, thresholds) for b in todo]
    n = min(worker_count(config), max(1, len(jobs)))
    if n == 1:
        results = map(_job, jobs)
        for res in results:
            _store_result(config, res)
            done[res.beta] = res
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            for res in pool.map(_job, jobs):
                _store_result(config, res)
                done[res.beta] = res
    return done


def _refine(results: dict[float, BetaResult]) -> list[float]:
    """Geometric midpoints around interior local minima of every family's width."""
    by_family: dict[str, list[tuple[float, float]]] = {}
    for beta, res in results.items():
        for r in res.records:
            if r.ok:
                by_family.setdefault(r.family, []).append((beta, r.gamma))
    grid = sorted(results)
    new = set()
    for series in by_family.values():
        series.sort()
        for k in range(1, len(series) - 1):
            (b0, g0), (b1, g1), (b2, g2) = series[k - 1 : k + 2]
            if g1 < g0 and g1 < g2:
                for lo, hi in ((b0, b1), (b1, b2)):
                    # only bisect intervals that are adjacent on the full grid
                    if grid.index(hi) - grid.index(lo) == 1:
                        new.add(float(math.sqrt(lo * hi)))
    return sorted(new - set(grid))


def run_scan(config: RunConfig, resume: bool = False) -> list[ScanRecord]:
    """Scan the configured β grid; writes ``scan.csv`` and ``scan.json`` if an output is set."""
    pot = thresholds = None
    if config.scaling is Scaling.PRIME:
        try:
            pot = tuned_potential(config, 1.0)
            thresholds = two_body_thresholds(config.dimension, pot)
        except Exception as exc:  # noqa: BLE001 - reported in every row
            tag = f"{type(exc).__name__}: {exc}"
            records = [ScanRecord(beta=b, family="", error=tag) for b in config.beta_grid()]
            if config.output is not None:
                write_outputs(config, records, None, None)
            return records
    results = _run_points(config, config.beta_grid(), pot, thresholds, resume)
    if config.betas is None:
        for _ in range(config.densify_levels):
            extra = _refine(results)
            if not extra:
                break
            results.update(_run_points(config, extra, pot, thresholds, resume))
    records = sorted((r for res in results.values() for r in res.records), key=lambda r: (r.beta, r.family))
    if config.output is not None:
        write_outputs(config, records, pot, thresholds)
    return records


def emit_tilde_view(config: RunConfig, resume: bool = False) -> list[ScanRecord]:
    """Re-run the scan with the depth re-tuned at every β for a tilde-scaled target."""
    return run_scan(replace(config, scaling=Scaling.TILDE), resume=resume)


def format_float(x: float) -> str:
    if math.isnan(x):
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.16e}"


def records_csv(records: Iterable[ScanRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(
            [
                format_float(r.beta),
                r.family,
                format_float(r.e_r),
                format_float(r.gamma),
                format_float(r.tau),
                format_float(r.accuracy),
                format_float(r.v0_prime),
                format_float(r.e_r_tilde),
                format_float(r.gamma_tilde),
                r.error,
            ]
        )
    return buf.getvalue()


def read_records_csv(path: Path | str) -> list[ScanRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            f = lambda k: float(row[k]) if row[k] else math.nan
            out.append(
                ScanRecord(
                    beta=f("beta"),
                    family=row["family"],
                    e_r=f("E_r"),
                    gamma=f("Gamma"),
                    tau=f("tau"),
                    accuracy=f("accuracy"),
                    v0_prime=f("v0"),
                    e_r_tilde=f("E_r_tilde"),
                    gamma_tilde=f("Gamma_tilde"),
                    error=row["error"],
                )
            )
    return out


def write_outputs(config: RunConfig, records: Sequence[ScanRecord], pot, thresholds) -> None:
    out = config.output
    out.mkdir(parents=True, exist_ok=True)
    (out / "scan.csv").write_text(records_csv(records))
    doc = {
        "schema": "gemcsm-scan/1",
        "config": config.to_dict(),
        "v0_prime": None if pot is None else pot.v0_prime,
        "thresholds": None if thresholds is None else [{"label": t.label, "energy": t.energy} for t in thresholds],
        "records": [r.to_json() for r in records],
    }
    (out / "scan.json").write_text(json.dumps(doc, indent=1))


def load_records(path: Path | str) -> list[ScanRecord]:
    """Records from a ``scan.json`` or ``scan.csv`` file."""
    path = Path(path)
    if path.suffix == ".csv":
        return read_records_csv(path)
    doc = json.loads(path.read_text())
    return [ScanRecord.from_json(r) for r in doc["records"]]


# ---- plot data -------------------------------------------------------------


def _fig2_text(spectrum: dict) -> str:
    lines = [
        "# complex-scaled spectrum",
        f"# beta = {spectrum.get('beta')}  dimension = {spectrum.get('dimension')}",
        "# columns: theta_deg  Re_E  Im_E  class",
    ]
    points = spectrum.get("points", [])
    for p in points:
        lines.append(f"{p['theta_deg']:.6g} {format_float(p['re'])} {format_float(p['im'])} {p['class']}")
    lines.append("")
    lines.append("")
    lines.append("# threshold rays Im E = slope * (Re E - anchor)")
    lines.append("# columns: anchor  theta_deg  slope")
    anchors = sorted({t["energy"] for t in spectrum.get("thresholds", [])} | {0.0}) if points else []
    thetas = sorted({p["theta_deg"] for p in points})
    for a in anchors:
        for t in thetas:
            lines.append(f"{format_float(a)} {t:.6g} {format_float(math.tan(math.radians(-2.0 * t)))}")
    return "\n".join(lines) + "\n"


def _fig3_text(records: Sequence[ScanRecord]) -> str:
    lines = ["# resonance widths versus mass ratio", "# columns: beta  family  Gamma  accuracy  Gamma_tilde"]
    for r in records:
        if r.ok:
            lines.append(f"{format_float(r.beta)} {r.family} {format_float(r.gamma)} {format_float(r.accuracy)} {format_float(r.gamma_tilde) or 'nan'}")
    return "\n".join(lines) + "\n"


def _fig4_text(records: Sequence[ScanRecord]) -> str:
    lines = ["# resonance lifetimes versus mass ratio", "# columns: beta  family  tau  log10_tau"]
    for r in records:
        if r.ok:
            log_tau = "inf" if math.isinf(r.tau) else format_float(math.log10(r.tau))
            lines.append(f"{format_float(r.beta)} {r.family} {format_float(r.tau)} {log_tau}")
    return "\n".join(lines) + "\n"


def emit_plot_data(source, kind: str, path: Path | str) -> Path:
    """Write columnar plot data; ``source`` is a spectrum dict (fig2) or records."""
    path = Path(path)
    if kind == "fig2":
        text = _fig2_text(source or {})
    elif kind == "fig3":
        text = _fig3_text(list(source or []))
    elif kind == "fig4":
        text = _fig4_text(list(source or []))
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
