"""
Coupled shape and topology optimization of boundary regions.
"""
from .models import IterationRecord, OptConfig, OptHistory, SHAPE_GRADIENT_MODES, penalized_objective
from .line_search import LineSearchResult, line_search
from .problems import (
    PROBLEM_CLASSES, ClampProblem, ConductivityProblem, Evaluation, HelmholtzProblem, MixerProblem, Problem,
    SupportProblem, build_problem, fit_regions
)
from .loop import Optimizer, keep_apart, run

__all__ = [
    "IterationRecord", "OptConfig", "OptHistory", "SHAPE_GRADIENT_MODES", "penalized_objective",
    "LineSearchResult", "line_search",
    "PROBLEM_CLASSES", "ClampProblem", "ConductivityProblem", "Evaluation", "HelmholtzProblem", "MixerProblem",
    "Problem", "SupportProblem", "build_problem", "fit_regions",
    "Optimizer", "keep_apart", "run",
]
