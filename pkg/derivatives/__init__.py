"""
Shape and topological derivatives of boundary-region functionals.
"""
from .shape import (
    SHAPE_VARIANTS, ShapeGradient, area_penalty, clamp_load, combine, contour_penalty_2d, dirichlet_smoothed,
    dirichlet_smoothed_integral, elastic_support, elastic_support_integral, helmholtz_impedance,
    mixer_two_region, mixer_two_region_integral, neumann_inhom, shape_gradient
)
from .topological import TOPO_VARIANTS, TopoField, rho, select_insertion_point, topo_field, vertex_normals

__all__ = [
    "SHAPE_VARIANTS", "ShapeGradient", "area_penalty", "clamp_load", "combine", "contour_penalty_2d",
    "dirichlet_smoothed", "dirichlet_smoothed_integral", "elastic_support", "elastic_support_integral",
    "helmholtz_impedance", "mixer_two_region", "mixer_two_region_integral", "neumann_inhom", "shape_gradient",
    "TOPO_VARIANTS", "TopoField", "rho", "select_insertion_point", "topo_field", "vertex_normals",
]
