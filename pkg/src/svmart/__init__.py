"""Martingale, integrability and positivity verdicts for stochastic-volatility models.

The price is ``S = S_0 Z`` with ``Z`` the stochastic exponential of
``∫ b(Y) (ρ dW + sqrt(1 - ρ²) dW')`` and ``dY = μ(Y) dt + σ(Y) dW``.  Verdicts
are read off the finiteness of the scale function and two test functions at
the boundaries of the state interval of ``Y``, under the original law of
``Y`` and under the law with drift ``μ + ρ b σ``.
"""

from .analytic import CanonicalParams, analytic_profile, analytic_verdicts, direct_verdicts, exit_probability
from .classify import (
    VERDICTS,
    ExitBehavior,
    ExitCase,
    MartingaleReport,
    PhiVerdict,
    Tri,
    absorbed_zero,
    feller_exit,
    full_report,
    martingale,
    phi_capped,
    phi_perpetual,
    positivity_finite,
    positivity_infinite,
    ui_martingale,
)
from .config import ConfigError, load_config, parse_config, parse_expression
from .mc import McConfig, McEstimate, PhiSummary, Scheme, Tallies, estimate_EZ, estimate_exit, estimate_phi, simulate_paths
from .model import MODEL_IDS, Check, ConditionReport, DiffusionSpec, builtin, check_conditions, tilde
from .quad import DEFAULT_POLICY, Finiteness, Kind, ProbePolicy, classify_improper, integrate
from .scale import BoundaryProfile, Measure, ProfileInconsistency, boundary_profile, scale_function, test_functions

__all__ = [
    "BoundaryProfile", "CanonicalParams", "Check", "ConditionReport", "ConfigError", "DEFAULT_POLICY",
    "DiffusionSpec", "ExitBehavior", "ExitCase", "Finiteness", "Kind", "MODEL_IDS", "MartingaleReport",
    "McConfig", "McEstimate", "Measure", "PhiSummary", "PhiVerdict", "ProbePolicy", "ProfileInconsistency",
    "Scheme", "Tallies", "Tri", "VERDICTS", "absorbed_zero", "analytic_profile", "analytic_verdicts",
    "boundary_profile", "builtin", "check_conditions", "classify_improper", "direct_verdicts",
    "estimate_EZ", "estimate_exit", "estimate_phi", "exit_probability", "feller_exit", "full_report",
    "integrate", "load_config", "martingale", "parse_config", "parse_expression", "phi_capped",
    "phi_perpetual", "positivity_finite", "positivity_infinite", "scale_function", "simulate_paths",
    "test_functions", "tilde", "ui_martingale",
]
