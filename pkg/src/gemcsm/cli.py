"""Command-line interface: ``gemcsm <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from dataclasses import replace
from pathlib import Path

from .csm_analysis import PointClass, spectrum_json
from .scan import (
    RunConfig,
    analyse_beta,
    default_basis,
    emit_plot_data,
    emit_tilde_view,
    load_config,
    load_records,
    records_csv,
    run_scan,
)
from .twobody import SECTORS, GaussPotential, NoRootError, solve_two_body, tune_depth
from .units import DomainError


def _add_basis_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("basis overrides (defaults per dimension)")
    g.add_argument("--n-max", type=int, help="number of pair ranges")
    g.add_argument("--nu-first", type=float)
    g.add_argument("--nu-last", type=float)
    g.add_argument("--n-max-third", type=int, help="number of spectator ranges")
    g.add_argument("--lambda-first", type=float)
    g.add_argument("--lambda-last", type=float)
    g.add_argument("--omega", type=float, help="complex-range parameter (both sets)")


def _add_run_flags(p: argparse.ArgumentParser, scan: bool) -> None:
    p.add_argument("--config", type=Path, help="YAML or JSON run configuration")
    p.add_argument("--dimension", type=int, choices=(1, 3))
    p.add_argument("--theta", type=float, nargs="+", help="rotation angles in degrees")
    p.add_argument("--v0", type=float, help="fixed pair depth instead of tuning")
    p.add_argument("--max-discard", type=float)
    if scan:
        p.add_argument("--beta", type=float, nargs="+", help="explicit mass ratios")
        p.add_argument("--beta-range", type=float, nargs=3, metavar=("LO", "HI", "N"))
        p.add_argument("--densify", type=int, help="bisection levels near width minima")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("--resume", action="store_true", help="reuse finished β points in --out")
        p.add_argument("--workers", type=int)
        p.add_argument("--dump-spectra", action="store_true")
    _add_basis_flags(p)


def build_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if getattr(args, "config", None) else RunConfig(dimension=args.dimension or 3)
    if args.dimension and args.dimension != config.dimension:
        config = RunConfig(dimension=args.dimension)
    changes = {}
    if args.theta:
        changes["thetas_deg"] = tuple(args.theta)
    if args.v0 is not None:
        changes["v0_prime"] = args.v0
    if args.max_discard is not None:
        changes["max_discard"] = args.max_discard
    # ``spectrum`` takes a single --beta; only the scan commands carry a list
    if isinstance(getattr(args, "beta", None), list):
        changes["betas"] = list(args.beta)
    for name, key in (("workers", "workers"), ("densify", "densify_levels"), ("out", "output")):
        value = getattr(args, name, None)
        if value is not None:
            changes[key] = value
    if getattr(args, "beta_range", None):
        lo, hi, n = args.beta_range
        changes["beta_range"] = (lo, hi, int(n))
        changes["betas"] = None
    if getattr(args, "dump_spectra", False):
        changes["dump_spectra"] = True
    basis = config.basis or default_basis(config.dimension)
    pair = {k: v for k, v in (("n_max", args.n_max), ("nu_first", args.nu_first), ("nu_last", args.nu_last)) if v is not None}
    third = {
        k: v
        for k, v in (("n_max", args.n_max_third), ("nu_first", args.lambda_first), ("nu_last", args.lambda_last))
        if v is not None
    }
    if args.omega is not None:
        pair["complex_omega"] = third["complex_omega"] = args.omega
    if pair or third:
        changes["basis"] = replace(basis, pair=replace(basis.pair, **pair), third=replace(basis.third, **third))
    return replace(config, **changes)


def cmd_twobody(args: argparse.Namespace) -> int:
    if args.action == "solve":
        sectors = [args.sector] if args.sector else list(SECTORS[args.dimension])
        for sector in sectors:
            spec = solve_two_body(GaussPotential(args.v0), args.dimension, sector)
            print(f"{args.dimension}D {sector}: " + " ".join(f"{e:.10f}" for e in spec.levels))
        return 0
    sector = args.sector or ("even" if args.dimension == 1 else "s")
    pot = tune_depth(args.dimension, sector, args.level, args.target)
    print(f"v0' = {pot.v0_prime:.12f}")
    return 0


def cmd_spectrum(args: argparse.Namespace) -> int:
    config = build_config(args)
    result = analyse_beta(config, args.beta)
    for r in result.records:
        if not r.ok:
            print(f"error: {r.error}", file=sys.stderr)
            return 1
    doc = spectrum_json(result.points, args.beta, config.dimension, result.thresholds)
    if args.json:
        args.json.write_text(json.dumps(doc, indent=1))
    print("thresholds: " + ", ".join(f"{t.label}={t.energy:.6f}" for t in result.thresholds))
    shown = [p for p in result.points if p.cls is not PointClass.CONTINUUM and p.theta == max(config.thetas)]
    for p in shown:
        v = p.value
        print(f"{p.cls.value:12s} {v.real: .8f} {v.imag: .3e}  spread {p.stability_score:.1e}")
    for r in result.records:
        print(f"family {r.family}: E_r'={r.e_r:.8f} Gamma'={r.gamma:.6e} tau'={r.tau:.6e} acc={r.accuracy:.1e}")
    return 0


def _finish_scan(records) -> int:
    sys.stdout.write(records_csv(records))
    return 0 if all(r.ok for r in records) else 1


def cmd_scan(args: argparse.Namespace) -> int:
    return _finish_scan(run_scan(build_config(args), resume=args.resume))


def cmd_tilde_scan(args: argparse.Namespace) -> int:
    return _finish_scan(emit_tilde_view(build_config(args), resume=args.resume))


def cmd_plotdata(args: argparse.Namespace) -> int:
    if args.kind == "fig2":
        source = json.loads(args.input.read_text()) if args.input.stat().st_size else {}
    else:
        source = load_records(args.input)
    emit_plot_data(source, args.kind, args.out)
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gemcsm", description="Three-body resonances with Gaussians and complex scaling.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    tb = sub.add_parser("twobody", help="two-body levels and depth tuning")
    tb.add_argument("action", choices=("solve", "tune"))
    tb.add_argument("--dimension", type=int, choices=(1, 3), required=True)
    tb.add_argument("--sector", help="even/odd (1D) or s/p (3D)")
    tb.add_argument("--v0", type=float, help="pair depth (solve)")
    tb.add_argument("--level", type=int, default=2, help="1-based level index (tune)")
    tb.add_argument("--target", type=float, default=-0.1, help="target energy (tune)")
    tb.set_defaults(func=cmd_twobody)

    sp = sub.add_parser("spectrum", help="classified spectrum at one mass ratio")
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--json", type=Path, help="write the classified spectrum here")
    _add_run_flags(sp, scan=False)
    sp.set_defaults(func=cmd_spectrum)

    for name, func in (("scan", cmd_scan), ("tilde-scan", cmd_tilde_scan)):
        sc = sub.add_parser(name, help="mass-ratio scan" + (" with tilde-scaled depth tuning" if "tilde" in name else ""))
        _add_run_flags(sc, scan=True)
        sc.set_defaults(func=func)

    pd = sub.add_parser("plotdata", help="columnar plot data from scan or spectrum files")
    pd.add_argument("--kind", choices=("fig2", "fig3", "fig4"), required=True)
    pd.add_argument("--input", type=Path, required=True, help="spectrum JSON (fig2) or scan.json/scan.csv")
    pd.add_argument("--out", type=Path, required=True)
    pd.set_defaults(func=cmd_plotdata)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.command == "twobody" and args.action == "solve" and args.v0 is None:
        parser.error("twobody solve needs --v0")
    try:
        return args.func(args)
    except (DomainError, NoRootError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
