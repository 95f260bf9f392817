"""Co-design of intermodal autonomous mobility-on-demand systems.

Sweeps a grid of (AV speed, fleet size, train fleet factor) designs through a
multi-commodity flow model of walking, road and transit layers, and returns
the Pareto front of monthly cost, average travel time and monthly emissions.
"""
from .design import SubwayCatalog, VehicleCatalog, aggregate_resources, monetize, subway_dp, vehicle_dp
from .engine import (
    Classification,
    DesignGrid,
    EvaluatedPoint,
    evaluate_grid,
    pareto_front,
    query_budget,
    sensitivity_compare,
)
from .flow import FlowSolution, solve_iamod
from .lp import LinearProgram, LpStatus, solve_lp
from .network import DesignPoint, MultilayerGraph, ScenarioParams, TravelRequest
from .poset import TOP, Antichain, LabeledPoint, ResourceVector, insert_minimal, leq, minimal_elements
from .scenario import Scenario, load_scenario, validate_scenario

__version__ = "0.1.0"

__all__ = [
    "Antichain",
    "Classification",
    "DesignGrid",
    "DesignPoint",
    "EvaluatedPoint",
    "FlowSolution",
    "LabeledPoint",
    "LinearProgram",
    "LpStatus",
    "MultilayerGraph",
    "ResourceVector",
    "Scenario",
    "ScenarioParams",
    "SubwayCatalog",
    "TOP",
    "TravelRequest",
    "VehicleCatalog",
    "aggregate_resources",
    "evaluate_grid",
    "insert_minimal",
    "leq",
    "load_scenario",
    "minimal_elements",
    "monetize",
    "pareto_front",
    "query_budget",
    "sensitivity_compare",
    "solve_iamod",
    "solve_lp",
    "subway_dp",
    "validate_scenario",
    "vehicle_dp",
]
