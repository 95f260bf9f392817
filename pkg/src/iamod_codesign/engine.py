"""Design-grid sweep through the vehicle, subway and I-AMoD design problems.

Every grid cell is pushed through prune -> frequency scaling -> lexicographic
flow solve -> resource aggregation; the feasible outcomes are then reduced to
the antichain of rational (Pareto-minimal) resource vectors.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Iterator, Mapping, Sequence

from .design import aggregate_resources, monetize
from .flow import FlowSolution, solve_iamod
from .lp import LpError
from .network import DesignPoint
from .poset import TOP, Antichain, LabeledPoint, ResourceVector, leq, minimal_elements

if TYPE_CHECKING:
    from .scenario import Scenario

__all__ = [
    "DesignGrid",
    "Classification",
    "EvaluatedPoint",
    "GridEvaluationError",
    "SensitivityReport",
    "evaluate_point",
    "evaluate_grid",
    "classify",
    "pareto_front",
    "query_budget",
    "monetized_front",
    "sensitivity_compare",
    "front_covers",
    "dominance_matrix",
    "min_cost_within",
]


@dataclass(frozen=True)
class DesignGrid:
    speeds: tuple[float, ...]
    fleet_sizes: tuple[int, ...]
    train_factors: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        speeds = tuple(sorted(set(float(v) for v in self.speeds)))
        fleets = tuple(sorted(set(int(n) for n in self.fleet_sizes)))
        factors = tuple(sorted(set(Fraction(f) for f in self.train_factors)))
        if not (speeds and fleets and factors):
            raise ValueError("every design-grid axis needs at least one value")
        if any(n < 0 for n in fleets):
            raise ValueError("fleet sizes must be >= 0")
        object.__setattr__(self, "speeds", speeds)
        object.__setattr__(self, "fleet_sizes", fleets)
        object.__setattr__(self, "train_factors", factors)

    def __iter__(self) -> Iterator[DesignPoint]:
        for v in self.speeds:
            for n in self.fleet_sizes:
                for f in self.train_factors:
                    yield DesignPoint(v, n, f)

    def __len__(self) -> int:
        return len(self.speeds) * len(self.fleet_sizes) * len(self.train_factors)


class Classification(str, enum.Enum):
    PARETO = "Pareto"
    FEASIBLE_IRRATIONAL = "FeasibleIrrational"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class EvaluatedPoint:
    design: DesignPoint
    resources: ResourceVector
    classification: Classification | None = None
    flow: FlowSolution | None = field(default=None, compare=False, repr=False)

    @property
    def feasible(self) -> bool:
        return not self.resources.is_top


class GridEvaluationError(RuntimeError):
    def __init__(self, design: DesignPoint, cause: Exception):
        super().__init__(f"evaluation failed for {design}: {cause}")
        self.design = design
        self.cause = cause


def evaluate_point(scenario: "Scenario", design: DesignPoint, *, kernel: str | None = None) -> EvaluatedPoint:
    try:
        flow = solve_iamod(scenario.graph, scenario.requests, design, scenario.params, kernel=kernel)
    except LpError as exc:
        raise GridEvaluationError(design, exc) from exc
    resources = aggregate_resources(
        flow, design, scenario.vehicle_catalog, scenario.subway_catalog, scenario.params
    )
    return EvaluatedPoint(design, resources, flow=flow)


def evaluate_grid(
    scenario: "Scenario",
    grid: DesignGrid | None = None,
    *,
    threads: int = 1,
    kernel: str | None = None,
) -> list[EvaluatedPoint]:
    """Evaluate and classify every grid cell, in lexicographic grid order."""
    grid = grid or scenario.grid
    designs = list(grid)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(lambda d: evaluate_point(scenario, d, kernel=kernel), designs))
    else:
        points = [evaluate_point(scenario, d, kernel=kernel) for d in designs]
    return classify(points)


def pareto_front(points: Sequence[EvaluatedPoint]) -> Antichain:
    """Antichain of the feasible points' resources; labels are the points."""
    return minimal_elements(
        LabeledPoint(p.resources.as_tuple(), p) for p in points if p.feasible
    )


def classify(points: Sequence[EvaluatedPoint]) -> list[EvaluatedPoint]:
    front_ids = {id(lp.label) for lp in pareto_front(points)}
    out = []
    for p in points:
        if not p.feasible:
            cls = Classification.INFEASIBLE
        elif id(p) in front_ids:
            cls = Classification.PARETO
        else:
            cls = Classification.FEASIBLE_IRRATIONAL
        out.append(replace(p, classification=cls))
    return out


def query_budget(front: Antichain, budget: Sequence[float]) -> EvaluatedPoint | LabeledPoint | None:
    """Fastest front element within ``budget`` (cost, time, emissions upper bounds).

    Ties on time go to the cheaper element, then to the lower-emission one.
    """
    fits = [p for p in front if leq(p.resources, budget)]
    if not fits:
        return None
    best = min(fits, key=lambda p: (p.resources[1], p.resources[0], p.resources[2]))
    return best.label if best.label is not None else best


def monetized_front(front: Antichain, rate: float) -> Antichain:
    """2D (cost incl. emissions, time) antichain of the monetized front."""
    return minimal_elements(
        LabeledPoint(monetize(ResourceVector(*p.resources), rate), p.label) for p in front
    )


@dataclass(frozen=True)
class SensitivityReport:
    rate: float
    series: Mapping[str, tuple[LabeledPoint, ...]]  # name -> 2D front sorted by cost
    dominance: Mapping[tuple[str, str], bool]       # (a, b) -> a's front covers b's

    def dominates(self, a: str, b: str) -> bool:
        return self.dominance[(a, b)]


def front_covers(a: Iterable[LabeledPoint], b: Iterable[LabeledPoint]) -> bool:
    """True iff every point of ``b`` is weakly dominated by some point of ``a``."""
    a = list(a)
    return all(any(leq(p.resources, q.resources) for p in a) for q in b)


def dominance_matrix(series: Mapping[str, Sequence[LabeledPoint]]) -> dict[tuple[str, str], bool]:
    return {
        (a, b): front_covers(series[a], series[b])
        for a in series
        for b in series
        if a != b
    }


def sensitivity_compare(fronts: Mapping[str, Antichain], rate: float) -> SensitivityReport:
    """Monetize each case's front and report which fronts weakly dominate which.

    Front ``a`` dominates ``b`` when every point of ``b`` is matched or beaten
    in both cost and time by some point of ``a``.
    """
    series = {
        name: tuple(monetized_front(front, rate).sorted()) for name, front in fronts.items()
    }
    return SensitivityReport(rate, series, dominance_matrix(series))


def min_cost_within(points: Sequence[EvaluatedPoint], time_bound: float, emission_bound: float) -> float:
    """Cheapest feasible cost meeting both bounds (``inf`` if none)."""
    costs = [
        p.resources.cost
        for p in points
        if p.feasible and p.resources.time <= time_bound and p.resources.emissions <= emission_bound
    ]
    return min(costs, default=math.inf)
