"""Stationary profiles and linear stability of a heated MHD channel flow of a
polymeric fluid."""

__version__ = "0.1.0"

from .config import Grid, ModelParams, SweepSpec, load_config, load_config_file  # noqa: E402
from .baseflow import BaseFlow, closure_solve, solve_base_flow, base_flow_residuals  # noqa: E402
from .lincoeff import LinearCoefficients, build_coefficients  # noqa: E402
from .asymptotics import (EigenFamily, StabilityReport, asymptotic_eigenvalues,  # noqa: E402
                          dispersion_residual, stability_margin)

__all__ = [
    "Grid", "ModelParams", "SweepSpec", "load_config", "load_config_file",
    "BaseFlow", "closure_solve", "solve_base_flow", "base_flow_residuals",
    "LinearCoefficients", "build_coefficients",
    "EigenFamily", "StabilityReport", "asymptotic_eigenvalues", "dispersion_residual",
    "stability_margin",
]
