"""
Acceptance suites and epsilon-sweep oracles.
"""
from .oracles import (
    SweepResult, conductivity_log_law, dirichlet_inhom_log_law, elasticity_log_law, fit_log_law, fit_slope,
    helmholtz_insertion_law, mixer_anode_log_law, mixer_cathode_log_law, neumann_linear_law
)
from .demos import DEMO_CONFIGS, demo_config
from .suites import SUITES, CheckResult, run_suites

__all__ = [
    "SweepResult", "conductivity_log_law", "dirichlet_inhom_log_law", "elasticity_log_law", "fit_log_law",
    "fit_slope", "helmholtz_insertion_law", "mixer_anode_log_law", "mixer_cathode_log_law", "neumann_linear_law",
    "DEMO_CONFIGS", "demo_config",
    "SUITES", "CheckResult", "run_suites",
]
