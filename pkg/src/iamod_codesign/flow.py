"""Multi-commodity I-AMoD flow problem for a single design point.

Customers are routed per travel request over every arc of the multilayer
graph; empty (rebalancing) vehicles move on road arcs only. The problem is
solved lexicographically: first minimum average travel time, then minimum
vehicle mileage among (near-)time-optimal flows.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lp import LinearProgram, LpStatus, SolverFailure, solve_lp
from .network import (
    DesignPoint,
    Layer,
    MultilayerGraph,
    ScenarioParams,
    TravelRequest,
    prune_arcs,
    road_energies,
    scale_frequencies,
    travel_times,
)

__all__ = [
    "EmptyDemand",
    "FlowStatus",
    "FlowProblem",
    "FlowSolution",
    "Metrics",
    "build_flow_problem",
    "assemble_lp",
    "solve_iamod",
    "derive_metrics",
    "STAGE2_RTOL",
    "STAGE2_ATOL",
]

STAGE2_RTOL = 1e-9
STAGE2_ATOL = 1e-9  # seconds


class EmptyDemand(ValueError):
    """Raised when no travel requests are given (the average is undefined)."""


class FlowStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class Metrics:
    t_avg: float        # s
    n_v_e: float        # vehicles in use
    s_v_tot: float      # vehicle meters per second
    m_co2_v_tot: float  # kg CO2 per second


@dataclass(frozen=True)
class FlowProblem:
    """Assembled LP plus the per-arc data needed to interpret its solution."""

    graph: MultilayerGraph
    requests: tuple[TravelRequest, ...]
    design: DesignPoint
    times: np.ndarray      # per arc, s
    energies: np.ndarray   # per arc, J (0 off-road)
    lp: LinearProgram
    alpha_tot: float

    @property
    def n_arcs(self) -> int:
        return len(self.graph.arcs)

    @property
    def n_requests(self) -> int:
        return len(self.requests)

    def split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Variable vector -> (customer flows [M, |A|], rebalancing flows [|A_R|])."""
        k = self.n_requests * self.n_arcs
        return x[:k].reshape(self.n_requests, self.n_arcs), x[k:]

    def vehicle_flow(self, f_m: np.ndarray, f_0: np.ndarray) -> np.ndarray:
        road = list(self.graph.road_arc_indices)
        return f_0 + f_m[:, road].sum(axis=0)

    def time_row(self) -> np.ndarray:
        row = np.zeros(self.lp.n)
        row[: self.n_requests * self.n_arcs] = np.tile(self.times, self.n_requests) / self.alpha_tot
        return row

    def mileage_row(self) -> np.ndarray:
        road = list(self.graph.road_arc_indices)
        lengths = np.array([a.length for a in self.graph.arcs])
        row = np.zeros(self.lp.n)
        for m in range(self.n_requests):
            row[m * self.n_arcs + np.array(road, dtype=int)] = lengths[road]
        row[self.n_requests * self.n_arcs:] = lengths[road]
        return row


@dataclass(frozen=True)
class FlowSolution:
    status: FlowStatus
    design: DesignPoint
    f_m: np.ndarray | None = None
    f_0: np.ndarray | None = None
    t_avg: float = float("inf")
    n_v_e: float = float("inf")
    s_v_tot: float = float("inf")
    m_co2_v_tot: float = float("inf")
    stage1_t_avg: float = float("inf")
    stage1_mileage: float = float("inf")
    arc_ids: tuple[str, ...] = ()

    @property
    def optimal(self) -> bool:
        return self.status is FlowStatus.OPTIMAL


def build_flow_problem(
    g: MultilayerGraph,
    requests: Sequence[TravelRequest],
    design: DesignPoint,
    params: ScenarioParams,
) -> FlowProblem:
    requests = tuple(requests)
    if not requests:
        raise EmptyDemand("no travel requests; average travel time is undefined")
    g = prune_arcs(g, design.v_a, params.beta)
    freqs = scale_frequencies(g, design.train_factor)
    times = travel_times(g, design.v_a, freqs, params)
    energies = road_energies(g, design.v_a, params.drive_cycle)

    arcs = g.arcs
    n_arcs, M = len(arcs), len(requests)
    road = g.road_arc_indices
    n_road = len(road)
    nv = M * n_arcs + n_road
    nodes = g.node_index
    n_nodes = len(nodes)
    tails = np.array([nodes[a.tail] for a in arcs], dtype=int)
    heads = np.array([nodes[a.head] for a in arcs], dtype=int)
    arange = np.arange(n_arcs)

    # customer conservation: inflow - outflow = alpha (1[j=d] - 1[j=o])
    A1 = np.zeros((M * n_nodes, nv))
    b1 = np.zeros(M * n_nodes)
    for m, req in enumerate(requests):
        rows = m * n_nodes
        cols = m * n_arcs + arange
        np.add.at(A1, (rows + heads, cols), 1.0)
        np.add.at(A1, (rows + tails, cols), -1.0)
        b1[rows + nodes[req.destination]] += req.rate
        b1[rows + nodes[req.origin]] -= req.rate

    # vehicle conservation on road nodes
    road_nodes = [nodes[n] for n in g.nodes_in(Layer.ROAD)]
    rn_row = {j: r for r, j in enumerate(road_nodes)}
    A2 = np.zeros((len(road_nodes), nv))
    for k, ai in enumerate(road):
        h, t = rn_row[heads[ai]], rn_row[tails[ai]]
        for col in [m * n_arcs + ai for m in range(M)] + [M * n_arcs + k]:
            A2[h, col] += 1.0
            A2[t, col] -= 1.0

    # congestion threshold per road arc, then fleet size
    A3 = np.zeros((n_road + 1, nv))
    b3 = np.zeros(n_road + 1)
    for k, ai in enumerate(road):
        for col in [m * n_arcs + ai for m in range(M)] + [M * n_arcs + k]:
            A3[k, col] = 1.0
            A3[n_road, col] = times[ai]
        b3[k] = arcs[ai].residual_capacity
    b3[n_road] = design.n_v_max

    alpha_tot = float(sum(r.rate for r in requests))
    c = np.zeros(nv)
    c[: M * n_arcs] = np.tile(times, M) / alpha_tot

    lp = LinearProgram(
        c=c,
        A_eq=np.vstack([A1, A2]),
        b_eq=np.concatenate([b1, np.zeros(len(road_nodes))]),
        A_ub=A3,
        b_ub=b3,
    )
    return FlowProblem(g, requests, design, times, energies, lp, alpha_tot)


def assemble_lp(g, requests, design, params) -> LinearProgram:
    """The stage-1 (minimum average travel time) linear program."""
    return build_flow_problem(g, requests, design, params).lp


def derive_metrics(problem: FlowProblem, f_m: np.ndarray, f_0: np.ndarray, params: ScenarioParams) -> Metrics:
    road = list(problem.graph.road_arc_indices)
    veh = problem.vehicle_flow(f_m, f_0)
    lengths = np.array([problem.graph.arcs[i].length for i in road])
    t_avg = float((f_m * problem.times).sum() / problem.alpha_tot)
    n_v_e = float(veh @ problem.times[road])
    s_v_tot = float(veh @ lengths)
    m_co2 = float(params.gamma * (veh @ problem.energies[road]))
    return Metrics(t_avg, n_v_e, s_v_tot, m_co2)


def solve_iamod(
    g: MultilayerGraph,
    requests: Sequence[TravelRequest],
    design: DesignPoint,
    params: ScenarioParams,
    *,
    kernel: str | None = None,
) -> FlowSolution:
    problem = build_flow_problem(g, requests, design, params)
    lp = problem.lp
    arc_ids = tuple(a.id for a in problem.graph.arcs)

    first = solve_lp(lp, kernel=kernel)
    if first.status is LpStatus.INFEASIBLE:
        return FlowSolution(FlowStatus.INFEASIBLE, design, arc_ids=arc_ids)
    if first.status is LpStatus.UNBOUNDED:
        raise SolverFailure("travel-time LP reported unbounded; objective is bounded below by zero")
    t_star = first.objective_value
    mileage = problem.mileage_row()

    second = solve_lp(
        LinearProgram(
            c=mileage,
            A_eq=lp.A_eq,
            b_eq=lp.b_eq,
            A_ub=np.vstack([lp.A_ub, problem.time_row()]),
            b_ub=np.concatenate([lp.b_ub, [t_star * (1 + STAGE2_RTOL) + STAGE2_ATOL]]),
        ),
        kernel=kernel,
    )
    if not second.optimal:
        raise SolverFailure(f"mileage stage returned {second.status.value} after a feasible first stage")

    f_m, f_0 = problem.split(second.x)
    metrics = derive_metrics(problem, f_m, f_0, params)
    return FlowSolution(
        FlowStatus.OPTIMAL,
        design,
        f_m=f_m,
        f_0=f_0,
        t_avg=metrics.t_avg,
        n_v_e=metrics.n_v_e,
        s_v_tot=metrics.s_v_tot,
        m_co2_v_tot=metrics.m_co2_v_tot,
        stage1_t_avg=t_star,
        stage1_mileage=float(mileage @ first.x),
        arc_ids=arc_ids,
    )
