"""Nested fractals: renormalized Dirichlet forms, heat kernels and variation inequality checks."""

from ._nestlab import (
    BudgetError,
    Error,
    FractalSpec,
    ParseError,
    UsageError,
    ValidationError,
    build_spec,
    check_names,
    config_hash,
    eigenvalues,
    harmonic_energy,
    heat_kernel,
    mesh,
    run_check,
    run_config,
)

__all__ = [
    "BudgetError",
    "Error",
    "FractalSpec",
    "ParseError",
    "UsageError",
    "ValidationError",
    "build_spec",
    "check_names",
    "config_hash",
    "eigenvalues",
    "harmonic_energy",
    "heat_kernel",
    "mesh",
    "run_check",
    "run_config",
]
