"""
Robin smoothing of Dirichlet-Neumann transitions.
"""
from .profile import TransitionProfile, default_profile
from .robin import RobinCoefficient, robin_coefficient

__all__ = ["TransitionProfile", "default_profile", "RobinCoefficient", "robin_coefficient"]
