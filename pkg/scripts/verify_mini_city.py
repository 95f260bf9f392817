"""Regenerate scenarios/mini_city/expected.json from independent solvers.

Every grid cell of the mini-city is re-assembled here from the raw arc data
(own travel times, own pruning, sparse incidence matrices) and solved with
HiGHS in the same two stages: minimum average travel time, then minimum
vehicle mileage. Cells without vehicles are additionally checked against
shortest paths on the non-road layers, where the optimum is known in closed
form. Needs scipy.
"""
import argparse
import json
import sys
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.optimize import linprog
from scipy.sparse.csgraph import dijkstra

from iamod_codesign.scenario import load_scenario
from iamod_codesign.units import mps_to_mph

HERE = Path(__file__).resolve().parent.parent / "scenarios" / "mini_city"


def arc_times(scn, v_a, factor):
    p = scn.params
    out = []
    for a in scn.graph.arcs:
        k = a.kind.value
        if k == "road":
            out.append(a.length / min(v_a, a.speed_limit))
        elif k == "walk":
            out.append(a.length / p.walking_speed)
        elif k == "transit_line":
            out.append(a.scheduled_time)
        elif k == "walk_to_station":
            out.append(p.t_ws + 0.5 / (float(factor) * a.baseline_frequency))
        elif k == "station_to_walk":
            out.append(p.t_sw)
        elif k == "walk_to_road":
            out.append(p.t_wr)
        else:
            out.append(p.t_rw)
    return np.array(out)


def solve_cell(scn, v_a, n_v, factor):
    beta = scn.params.beta
    keep = [i for i, a in enumerate(scn.graph.arcs)
            if a.kind.value != "road" or v_a >= beta * a.speed_limit * (1 - 1e-12)]
    arcs = [scn.graph.arcs[i] for i in keep]
    t = arc_times(scn, v_a, factor)[keep]
    nodes = {n: i for i, n in enumerate(scn.graph.nodes)}
    N, A, M = len(nodes), len(arcs), len(scn.requests)
    road = [i for i, a in enumerate(arcs) if a.kind.value == "road"]
    R = len(road)
    inc = sparse.lil_matrix((N, A))
    for j, a in enumerate(arcs):
        inc[nodes[a.head], j] += 1
        inc[nodes[a.tail], j] -= 1
    inc = inc.tocsr()
    sel = sparse.csr_matrix((np.ones(R), (road, range(R))), shape=(A, R))
    road_inc = inc @ sel
    road_nodes = sorted({nodes[arcs[j].tail] for j in road} | {nodes[arcs[j].head] for j in road})
    blocks_eq = [sparse.kron(sparse.eye(M), inc), sparse.csr_matrix((M * N, R))]
    A_eq = sparse.vstack([
        sparse.hstack(blocks_eq),
        sparse.hstack([sparse.kron(np.ones((1, M)), road_inc @ sel.T), road_inc]).tocsr()[road_nodes],
    ])
    b_eq = np.zeros(A_eq.shape[0])
    for m, r in enumerate(scn.requests):
        b_eq[m * N + nodes[r.destination]] += r.rate
        b_eq[m * N + nodes[r.origin]] -= r.rate
    cap = sparse.hstack([sparse.kron(np.ones((1, M)), sel.T), sparse.eye(R)])
    fleet = np.concatenate([np.tile(np.where(np.isin(range(A), road), t, 0.0), M), t[road]])
    A_ub = sparse.vstack([cap, sparse.csr_matrix(fleet)])
    b_ub = np.concatenate([[arcs[j].capacity - arcs[j].baseline_usage for j in road], [n_v]])
    alpha = sum(r.rate for r in scn.requests)
    c_time = np.concatenate([np.tile(t, M) / alpha, np.zeros(R)])
    lengths = np.array([a.length for a in arcs])
    c_mile = np.concatenate([np.tile(np.where(np.isin(range(A), road), lengths, 0.0), M), lengths[road]])

    s1 = linprog(c_time, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, method="highs")
    if s1.status == 2:
        return None
    assert s1.status == 0, s1.message
    t_star = s1.fun
    s2 = linprog(c_mile, A_ub=sparse.vstack([A_ub, sparse.csr_matrix(c_time)]),
                 b_ub=np.concatenate([b_ub, [t_star * (1 + 1e-9) + 1e-9]]),
                 A_eq=A_eq, b_eq=b_eq, method="highs")
    assert s2.status == 0, s2.message
    return t_star, s2.fun, (arcs, t)


def walking_transit_optimum(scn, arcs, t):
    nodes = {n: i for i, n in enumerate(scn.graph.nodes)}
    rows, cols, w = [], [], []
    for a, ta in zip(arcs, t):
        if a.kind.value in ("road", "walk_to_road", "road_to_walk"):
            continue
        rows.append(nodes[a.tail])
        cols.append(nodes[a.head])
        w.append(ta)
    g = sparse.csr_matrix((w, (rows, cols)), shape=(len(nodes), len(nodes)))
    dist = dijkstra(g, directed=True)
    alpha = sum(r.rate for r in scn.requests)
    return sum(r.rate * dist[nodes[r.origin], nodes[r.destination]] for r in scn.requests) / alpha


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", type=Path, default=HERE / "scenario.json")
    ap.add_argument("--out", type=Path, default=HERE / "expected.json")
    args = ap.parse_args(argv)
    scn = load_scenario(args.scenario)
    cells = []
    for d in scn.grid:
        res = solve_cell(scn, d.v_a, d.n_v_max, d.train_factor)
        cell = {
            "speed_mph": round(mps_to_mph(d.v_a), 9),
            "fleet_size": d.n_v_max,
            "train_factor": str(d.train_factor),
        }
        if res is None:
            cell.update(status="Infeasible")
        else:
            t_star, mileage, (arcs, t) = res
            cell.update(status="Optimal", t_avg_s=t_star, mileage_m_per_s=mileage)
            if d.n_v_max == 0:
                sp = walking_transit_optimum(scn, arcs, t)
                if abs(sp - t_star) > 1e-6 * max(1.0, sp):
                    sys.exit(f"shortest-path and LP optima disagree at {cell}: {sp} vs {t_star}")
                cell["shortest_path_t_avg_s"] = sp
        cells.append(cell)
    doc = {
        "scenario": args.scenario.name,
        "generated_by": "scripts/verify_mini_city.py (HiGHS via scipy; shortest paths for fleet 0)",
        "tolerance": {"t_avg_rel": 1e-6, "mileage_rel": 1e-6},
        "cells": cells,
    }
    args.out.write_text(json.dumps(doc, indent=1) + "\n")
    print(f"wrote {len(cells)} cells to {args.out}")


if __name__ == "__main__":
    main()
