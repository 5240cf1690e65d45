"""Bound states and resonances of two bosons plus one distinct particle.

Gaussian expansion in Jacobi coordinates combined with complex scaling, in
one and three dimensions, with mass-ratio scans of resonance widths.
"""

from .assembly import AssembledProblem, ChannelBasis, assemble, assemble_many
from .csm_analysis import (
    ClassifierSettings,
    PointClass,
    SpectrumPoint,
    classify,
    extract_resonance,
)
from .eigensolver import ConditioningError, solve_generalized
from .gauss_basis import GaussBasisSpec
from .scan import RunConfig, ScanRecord, emit_plot_data, emit_tilde_view, run_scan
from .twobody import GaussPotential, solve_two_body, tune_depth
from .units import ComplexEnergy, MassConfig, Scaling, make_mass_config

__all__ = [
    "AssembledProblem",
    "ChannelBasis",
    "ClassifierSettings",
    "ComplexEnergy",
    "ConditioningError",
    "GaussBasisSpec",
    "GaussPotential",
    "MassConfig",
    "PointClass",
    "RunConfig",
    "Scaling",
    "ScanRecord",
    "SpectrumPoint",
    "assemble",
    "assemble_many",
    "classify",
    "emit_plot_data",
    "emit_tilde_view",
    "extract_resonance",
    "make_mass_config",
    "run_scan",
    "solve_generalized",
    "solve_two_body",
    "tune_depth",
]
