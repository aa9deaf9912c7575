"""Numerical studies and their CSV/JSON reports."""

from .report import ExperimentReport, ExperimentSpec, load_config, parse_config
from .studies import (
    inverse_distance_integral,
    run,
    run_alpha_inverse,
    run_converge,
    run_direct_bound,
    run_figures,
    run_moment_audit,
    run_voronovskaja,
    sup_weighted_error,
)
