"""
P1 finite elements for conductivity, Helmholtz and plane elasticity, with adjoints and objectives.
"""
from .fields import BcSpec, FemField, IntervalData, Objective, edge_endpoint_values, robin_eps
from .assembly import (
    basis_gradients, edge_load, edge_mass, elasticity_stiffness, interval_load, interval_mass, load, mass,
    quadrature, stiffness
)
from .linear import check_conditioning, condition_estimate, solve_lifted
from .objectives import adjoint_source, evaluate_objective, interpolate_at, l2_error, locate_point, trace_at
from .conductivity import (
    conductivity_bc, conductivity_load, conductivity_operator, solve_conductivity, solve_conductivity_adjoint,
    solve_conductivity_sharp, solve_conductivity_smoothed
)
from .helmholtz import (
    energy_balance_helmholtz, helmholtz_adjoint_operator, helmholtz_load, helmholtz_matrices, helmholtz_operator,
    impedance_mass, solve_helmholtz, solve_helmholtz_adjoint
)
from .elasticity import (
    elasticity_bc, elasticity_load, elasticity_operator, mean_strain, plane_stress_lame, solve_elasticity,
    solve_elasticity_adjoint
)

__all__ = [
    "BcSpec", "FemField", "IntervalData", "Objective", "edge_endpoint_values", "robin_eps",
    "basis_gradients", "edge_load", "edge_mass", "elasticity_stiffness", "interval_load", "interval_mass",
    "load", "mass", "quadrature", "stiffness",
    "check_conditioning", "condition_estimate", "solve_lifted",
    "adjoint_source", "evaluate_objective", "interpolate_at", "l2_error", "locate_point", "trace_at",
    "conductivity_bc", "conductivity_load", "conductivity_operator", "solve_conductivity",
    "solve_conductivity_adjoint", "solve_conductivity_sharp", "solve_conductivity_smoothed",
    "energy_balance_helmholtz", "helmholtz_adjoint_operator", "helmholtz_load", "helmholtz_matrices",
    "helmholtz_operator", "impedance_mass", "solve_helmholtz", "solve_helmholtz_adjoint",
    "elasticity_bc", "elasticity_load", "elasticity_operator", "mean_strain", "plane_stress_lame",
    "solve_elasticity", "solve_elasticity_adjoint",
]
