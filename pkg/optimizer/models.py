"""
Optimizer configuration and convergence history.
"""
from dataclasses import dataclass, field, replace
from typing import Iterator, List, Optional
from utils.constants import (
    BACKTRACK_FACTOR, DEFAULT_EPS_TOP_FRACTION, DELTA_EXCL_FACTOR, EVENT_GEOMETRIC, MAX_BACKTRACKS, PROBLEMS,
    ROBIN_PREFACTOR_SCALED, ROBIN_PREFACTORS, STAGNATION_TOLERANCE, STAGNATION_WINDOW
)
from utils.errors import ConsistencyError
from utils.validators import (
    validate_choice, validate_count, validate_non_negative, validate_open_unit, validate_positive
)

SHAPE_GRADIENT_MODES = ["integral", "collapsed"]


@dataclass(frozen=True)
class OptConfig:
    """
    Parameters of the coupled shape/topology loop.

    tau0 is the largest boundary displacement of one geometric step in
    arclength units; the descent velocity is normalised to unit maximum.
    eps_top and delta_excl default to 2% of the perimeter and three
    insertion radii.
    """
    problem: str
    ell: float = 0.0
    m: float = 0.0
    eps_smooth: float = 0.05
    eps_top: Optional[float] = None
    delta_excl: Optional[float] = None
    n_top: int = 10
    n_top_stop: int = 0
    max_iter: int = 50
    tau0: float = 0.1
    backtrack_factor: float = BACKTRACK_FACTOR
    max_backtracks: int = MAX_BACKTRACKS
    tolerance: float = STAGNATION_TOLERANCE
    window: int = STAGNATION_WINDOW
    shape_gradient_mode: str = "integral"
    robin_prefactor: str = ROBIN_PREFACTOR_SCALED
    topo_guard: bool = False

    def __post_init__(self):
        validate_choice(self.problem, "optimizer.problem", PROBLEMS)
        validate_non_negative(self.ell, "ell")
        validate_non_negative(self.m, "m")
        validate_positive(self.eps_smooth, "eps_smooth")
        if self.eps_top is not None:
            validate_positive(self.eps_top, "eps_top")
        if self.delta_excl is not None:
            validate_non_negative(self.delta_excl, "delta_excl")
        validate_count(self.n_top, "n_top", 1)
        validate_count(self.n_top_stop, "n_top_stop", 0)
        validate_count(self.max_iter, "max_iter", 0)
        validate_positive(self.tau0, "tau0")
        validate_open_unit(self.backtrack_factor, "backtrack_factor")
        validate_count(self.max_backtracks, "max_backtracks", 0)
        validate_non_negative(self.tolerance, "tolerance")
        validate_count(self.window, "window", 1)
        validate_choice(self.shape_gradient_mode, "shape_gradient_mode", SHAPE_GRADIENT_MODES)
        validate_choice(self.robin_prefactor, "robin_prefactor", ROBIN_PREFACTORS)

    def insertion_radius(self, perimeter: float) -> float:
        return self.eps_top if self.eps_top is not None else DEFAULT_EPS_TOP_FRACTION * perimeter

    def exclusion_distance(self, perimeter: float) -> float:
        if self.delta_excl is not None:
            return self.delta_excl
        return DELTA_EXCL_FACTOR * self.insertion_radius(perimeter)

    def is_topological(self, iteration: int) -> bool:
        """Topological iterations are the multiples of n_top up to n_top_stop."""
        return iteration % self.n_top == 0 and iteration <= self.n_top_stop

    def with_overrides(self, **changes) -> "OptConfig":
        return replace(self, **changes)


def penalized_objective(J: float, area: float, cont: float, ell: float, m: float) -> float:
    """J + ell * Area + m * Cont; negative values pass through."""
    return float(J) + float(ell) * float(area) + float(m) * float(cont)


@dataclass(frozen=True)
class IterationRecord:
    """State after one iteration; iteration 0 is the starting region."""
    iteration: int
    J: float
    area: float
    cont: int
    J_tot: float
    tau: float
    event: str
    interfaces: int

    def as_row(self) -> dict:
        return {
            "iter": self.iteration, "J": self.J, "area": self.area, "cont": self.cont,
            "J_tot": self.J_tot, "tau": self.tau, "event": self.event, "interfaces": self.interfaces,
        }


@dataclass
class OptHistory:
    records: List[IterationRecord] = field(default_factory=list)

    def append(self, record: IterationRecord) -> None:
        if self.records and record.iteration <= self.records[-1].iteration:
            raise ConsistencyError(f"Iteration {record.iteration} does not follow {self.records[-1].iteration}")
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[IterationRecord]:
        return iter(self.records)

    @property
    def last(self) -> IterationRecord:
        return self.records[-1]

    def values(self, name: str = "J_tot") -> List[float]:
        return [getattr(record, name) for record in self.records]

    def events(self, event: str) -> List[IterationRecord]:
        return [record for record in self.records if record.event == event]

    def monotone_violations(self) -> List[int]:
        """Iterations whose accepted geometric step did not lower J_tot."""
        bad = []
        for before, after in zip(self.records, self.records[1:]):
            if after.event == EVENT_GEOMETRIC and not after.J_tot < before.J_tot:
                bad.append(after.iteration)
        return bad

    def stagnated(self, window: int, tolerance: float) -> bool:
        """Relative decrease of J_tot over the last window iterations at most tolerance."""
        if len(self.records) <= window:
            return False
        old = self.records[-1 - window].J_tot
        new = self.records[-1].J_tot
        return old - new <= tolerance * abs(old)

    def as_rows(self) -> List[dict]:
        return [record.as_row() for record in self.records]
