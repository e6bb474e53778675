"""
Galerkin boundary elements for screen problems on the unit disk.
"""
from .kernels import (
    Kernel, half_space_surface_displacement, kelvin2d, kelvin3d, kernel_by_name, kernel_eval, laplace2d_log,
    laplace3d, mindlin2d, mindlin3d
)
from .quadrature import collapsed_rule, inner_integrals, singular_pair_integral
from .screen import (
    ScreenDensity, ScreenSystem, assemble_screen, interaction_matrix, nodal_data, regularizer_matrix,
    single_layer_potential, solve_screen
)
from .metrics import (
    ScreenMetrics, equilibrium_density, equilibrium_interpolant, error_metrics, interior_error, mean_metric,
    residual_metric
)
from .polarization import PolarizationTensor, polarization_tensor
from .sweep import default_eta, equilibrium_sweep, polarization_study

__all__ = [
    "Kernel", "half_space_surface_displacement", "kelvin2d", "kelvin3d", "kernel_by_name", "kernel_eval",
    "laplace2d_log", "laplace3d", "mindlin2d", "mindlin3d",
    "collapsed_rule", "inner_integrals", "singular_pair_integral",
    "ScreenDensity", "ScreenSystem", "assemble_screen", "interaction_matrix", "nodal_data",
    "regularizer_matrix", "single_layer_potential", "solve_screen",
    "ScreenMetrics", "equilibrium_density", "equilibrium_interpolant", "error_metrics", "interior_error",
    "mean_metric", "residual_metric",
    "PolarizationTensor", "polarization_tensor",
    "default_eta", "equilibrium_sweep", "polarization_study",
]
