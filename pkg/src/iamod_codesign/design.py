"""Vehicle and subway design problems and the cost/emission roll-up.

Catalog tables are monotone maps from the provided functionality (AV speed,
train fleet factor) to required resources. Lookups are exact: the design grid
is drawn from catalog rows and nothing is interpolated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .flow import FlowSolution
from .network import DesignPoint, ScenarioParams
from .poset import TOP, ResourceVector

__all__ = [
    "UnknownDesign",
    "CatalogError",
    "VehicleRow",
    "VehicleCatalog",
    "SubwayCatalog",
    "SubwayDesign",
    "vehicle_dp",
    "subway_dp",
    "aggregate_resources",
    "monetize",
    "quantize",
    "RESOURCE_SIG_DIGITS",
]

MONTHS_PER_YEAR = 12
# resources are rounded so that simplex roundoff cannot split equal outcomes
RESOURCE_SIG_DIGITS = 9


def quantize(x: float) -> float:
    return float(f"{x:.{RESOURCE_SIG_DIGITS}g}")


class UnknownDesign(KeyError):
    pass


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class VehicleRow:
    vehicle_cost: float      # USD per vehicle
    automation_cost: float   # USD per vehicle
    operational_cost: float  # USD per meter driven

    @property
    def fixed_cost(self) -> float:
        return self.vehicle_cost + self.automation_cost


def _same_speed(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=0.0)


@dataclass(frozen=True)
class VehicleCatalog:
    rows: Mapping[float, VehicleRow]  # achievable speed (m/s) -> row
    life_years: float

    def __post_init__(self) -> None:
        rows = dict(sorted(self.rows.items()))
        object.__setattr__(self, "rows", rows)
        problems = self.problems()
        if problems:
            raise CatalogError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if not self.rows:
            out.append("vehicle catalog is empty")
        if not self.life_years > 0:
            out.append("vehicle life must be > 0")
        prev = None
        for speed, row in self.rows.items():
            if min(row.vehicle_cost, row.automation_cost, row.operational_cost) < 0:
                out.append(f"negative cost in vehicle row at {speed:.6g} m/s")
            if prev is not None:
                pspeed, prow = prev
                if row.fixed_cost < prow.fixed_cost:
                    out.append(
                        f"fixed vehicle cost decreases from {prow.fixed_cost:g} USD at {pspeed:.6g} m/s "
                        f"to {row.fixed_cost:g} USD at {speed:.6g} m/s (must be non-decreasing in speed)"
                    )
                if row.operational_cost < prow.operational_cost:
                    out.append(
                        f"operational cost decreases between {pspeed:.6g} and {speed:.6g} m/s "
                        "(must be non-decreasing in speed)"
                    )
            prev = (speed, row)
        return out

    @property
    def speeds(self) -> list[float]:
        return list(self.rows)

    def lookup(self, v_a: float) -> VehicleRow:
        for speed, row in self.rows.items():
            if _same_speed(speed, v_a):
                return row
        raise UnknownDesign(f"no vehicle catalog row for achievable speed {v_a:.6g} m/s")


@dataclass(frozen=True)
class SubwayCatalog:
    n_baseline: int
    fixed_cost: float                          # USD per acquired train
    life_years: float
    operational_cost: Mapping[Fraction, float]  # train factor -> USD/year
    emissions_per_train: float                  # kg CO2 per train-year

    def __post_init__(self) -> None:
        table = {Fraction(k): float(v) for k, v in self.operational_cost.items()}
        object.__setattr__(self, "operational_cost", dict(sorted(table.items())))
        problems = self.problems()
        if problems:
            raise CatalogError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []
        if self.n_baseline <= 0:
            out.append("baseline train fleet must be > 0")
        if self.fixed_cost < 0 or self.emissions_per_train < 0:
            out.append("subway fixed cost and emissions must be >= 0")
        if not self.life_years > 0:
            out.append("train life must be > 0")
        if not self.operational_cost:
            out.append("subway operational cost table is empty")
        prev = None
        for factor, cost in self.operational_cost.items():
            if factor < 1:
                out.append(f"train factor {factor} is below 1")
            if prev is not None and cost < prev[1]:
                out.append(
                    f"subway operational cost decreases from factor {prev[0]} to {factor} "
                    "(must be non-decreasing)"
                )
            prev = (factor, cost)
        return out

    @property
    def factors(self) -> list[Fraction]:
        return list(self.operational_cost)


@dataclass(frozen=True)
class SubwayDesign:
    n_trains: int
    n_acquired: int
    acquisition_per_year: float  # USD/year, amortized
    operational_per_year: float  # USD/year


def vehicle_dp(v_a: float, cat: VehicleCatalog) -> tuple[float, float]:
    """(fixed cost per vehicle in USD, operational cost in USD/m) for speed ``v_a``."""
    row = cat.lookup(v_a)
    return row.fixed_cost, row.operational_cost


def _round_half_up(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


def subway_dp(train_factor, cat: SubwayCatalog) -> SubwayDesign:
    factor = Fraction(train_factor)
    if factor not in cat.operational_cost:
        raise UnknownDesign(f"no subway catalog row for train factor {factor}")
    n_s = _round_half_up(factor * cat.n_baseline)
    n_a = n_s - cat.n_baseline
    return SubwayDesign(
        n_trains=n_s,
        n_acquired=n_a,
        acquisition_per_year=cat.fixed_cost * n_a / cat.life_years,
        operational_per_year=cat.operational_cost[factor],
    )


def aggregate_resources(
    flow: FlowSolution,
    design: DesignPoint,
    vcat: VehicleCatalog,
    scat: SubwayCatalog,
    params: ScenarioParams,
) -> ResourceVector:
    """Monthly cost, average travel time and monthly emissions of a design.

    The fleet term charges the acquired fleet ``n_v_max``, not the vehicles
    actually employed. Time is the optimal average travel time of the flow
    problem; every component is rounded to :data:`RESOURCE_SIG_DIGITS`.
    """
    if not flow.optimal:
        return TOP
    fixed, per_meter = vehicle_dp(design.v_a, vcat)
    sub = subway_dp(design.train_factor, scat)
    spm = params.seconds_per_month
    yearly = fixed / vcat.life_years * design.n_v_max + sub.acquisition_per_year + sub.operational_per_year
    cost = yearly / MONTHS_PER_YEAR + per_meter * flow.s_v_tot * spm
    emissions = flow.m_co2_v_tot * spm + scat.emissions_per_train * sub.n_trains / MONTHS_PER_YEAR
    return ResourceVector(
        cost=quantize(cost), time=quantize(flow.stage1_t_avg), emissions=quantize(emissions)
    )


def monetize(r: ResourceVector, rate: float) -> tuple[float, float]:
    """Fold emissions into cost at ``rate`` USD/kg: ``(cost + rate*emissions, time)``."""
    if rate < 0:
        raise ValueError("monetization rate must be >= 0")
    if r.is_top:
        return (math.inf, math.inf)
    return (r.cost + rate * r.emissions, r.time)
