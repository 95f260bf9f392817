"""Brute-force reference implementations used by the tests."""
from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np

from iamod_codesign.network import (
    Arc,
    ArcKind,
    DesignPoint,
    DriveCycle,
    Layer,
    MultilayerGraph,
    ScenarioParams,
    TravelRequest,
    prune_arcs,
    scale_frequencies,
    travel_times,
)
from iamod_codesign.poset import leq

ROOT = Path(__file__).resolve().parent.parent
MINI_CITY = ROOT / "scenarios" / "mini_city"

FEAS = 1e-9


# --- linear programs ----------------------------------------------------------

def vertex_enumeration(c, A_ub, b_ub, A_eq, b_eq):
    """Minimum of c.x over {A_ub x <= b_ub, A_eq x = b_eq, x >= 0}, assumed bounded.

    Returns (status, objective, x) with status "Optimal" or "Infeasible".
    Every basic solution is built by picking n linearly independent active
    constraints (equalities always active) and solving the square system.
    """
    c = np.asarray(c, float)
    n = c.size
    A_ub = np.asarray(A_ub, float).reshape(-1, n)
    A_eq = np.asarray(A_eq, float).reshape(-1, n)
    b_ub = np.asarray(b_ub, float).reshape(-1)
    b_eq = np.asarray(b_eq, float).reshape(-1)
    # candidates: ub rows then the x >= 0 bounds (as -x <= 0)
    cand_A = np.vstack([A_ub, -np.eye(n)])
    cand_b = np.concatenate([b_ub, np.zeros(n)])
    k_free = n - A_eq.shape[0]
    if k_free < 0:
        # more equalities than variables: try every n-subset of them too
        return _enumerate_overdetermined(c, A_ub, b_ub, A_eq, b_eq)
    best = (np.inf, None)
    combos = np.array(list(itertools.combinations(range(cand_A.shape[0]), k_free)), dtype=int)
    if combos.size == 0:
        combos = np.zeros((1, 0), dtype=int)
    M = np.concatenate([np.broadcast_to(A_eq, (len(combos),) + A_eq.shape), cand_A[combos]], axis=1)
    rhs = np.concatenate([np.broadcast_to(b_eq, (len(combos), b_eq.size)), cand_b[combos]], axis=1)
    dets = np.abs(np.linalg.det(M)) if n else np.ones(len(combos))
    ok = dets > 1e-9
    if not ok.any():
        return "Infeasible", np.inf, None
    xs = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
    best_x = None
    for x in xs:
        if _feasible(x, A_ub, b_ub, A_eq, b_eq):
            v = float(c @ x)
            if v < best[0]:
                best = (v, x)
                best_x = x
    if best_x is None:
        return "Infeasible", np.inf, None
    return "Optimal", best[0], best_x


def _enumerate_overdetermined(c, A_ub, b_ub, A_eq, b_eq):
    n = c.size
    best, best_x = np.inf, None
    for rows in itertools.combinations(range(A_eq.shape[0]), n):
        M = A_eq[list(rows)]
        if abs(np.linalg.det(M)) <= 1e-9:
            continue
        x = np.linalg.solve(M, b_eq[list(rows)])
        if _feasible(x, A_ub, b_ub, A_eq, b_eq) and c @ x < best:
            best, best_x = float(c @ x), x
    if best_x is None:
        return "Infeasible", np.inf, None
    return "Optimal", best, best_x


def _feasible(x, A_ub, b_ub, A_eq, b_eq, tol=FEAS) -> bool:
    scale = 1.0 + np.abs(x).max(initial=0.0)
    if (x < -1e-12 * scale).any():
        return False
    if A_ub.size and (A_ub @ x - b_ub > tol * scale * (1 + np.abs(A_ub).sum(axis=1))).any():
        return False
    if A_eq.size and (np.abs(A_eq @ x - b_eq) > tol * scale * (1 + np.abs(A_eq).sum(axis=1))).any():
        return False
    return True


def random_bounded_lp(rng: np.random.Generator):
    """Small integer LP with a bounding row so the feasible region is a polytope."""
    n = int(rng.integers(1, 7))
    m = int(rng.integers(1, 7))
    n_eq = int(rng.integers(0, min(m, n + 1)))
    if m - n_eq < 1:
        n_eq = m - 1
    c = rng.integers(-5, 6, size=n).astype(float)
    A = rng.integers(-4, 5, size=(m, n)).astype(float)
    b = rng.integers(-3, 10, size=m).astype(float)
    # row 0 is a positive bound so the region is compact
    A[0] = rng.integers(1, 4, size=n)
    b[0] = float(rng.integers(0, 12))
    A_ub, b_ub = A[: m - n_eq], b[: m - n_eq]
    A_eq, b_eq = A[m - n_eq:], b[m - n_eq:]
    return c, A_ub, b_ub, A_eq, b_eq


# --- antichains ---------------------------------------------------------------

def brute_force_front(points) -> set[tuple[float, ...]]:
    pts = [tuple(p) for p in points]
    return {
        p for p in pts
        if not any(leq(q, p) and q != p for q in pts)
    }


# --- micro flow graphs ----------------------------------------------------------

def road(aid, tail, head, length, v_limit, cap, usage=0.0):
    return Arc(aid, ArcKind.ROAD, tail, head, length, speed_limit=v_limit, capacity=cap, baseline_usage=usage)


def walk(aid, tail, head, length):
    return Arc(aid, ArcKind.WALK, tail, head, length)


def switch(aid, kind, tail, head, freq=None):
    return Arc(aid, kind, tail, head, 0.0, baseline_frequency=freq)


def template_graph(kind: str, rng: np.random.Generator) -> MultilayerGraph:
    """One of three randomized micro-graphs with at most eight arcs."""
    W, R, T = Layer.WALK, Layer.ROAD, Layer.TRANSIT
    L = lambda lo, hi: float(rng.uniform(lo, hi))
    cap = lambda: float(rng.choice([0.02, 0.05, 0.2, 1.0]))
    if kind == "T1":
        nodes = {"A": W, "B": W, "Ar": R, "Br": R}
        arcs = [
            walk("wAB", "A", "B", L(800, 3000)),
            walk("wBA", "B", "A", L(800, 3000)),
            switch("sA", ArcKind.WALK_TO_ROAD, "A", "Ar"),
            switch("sB", ArcKind.WALK_TO_ROAD, "B", "Br"),
            switch("rA", ArcKind.ROAD_TO_WALK, "Ar", "A"),
            switch("rB", ArcKind.ROAD_TO_WALK, "Br", "B"),
            road("AB", "Ar", "Br", L(1000, 6000), L(8, 25), cap(), 0.0),
            road("BA", "Br", "Ar", L(1000, 6000), L(8, 25), cap(), 0.0),
        ]
    elif kind == "T2":
        nodes = {"A": W, "B": W, "Ar": R, "Br": R, "Cr": R}
        arcs = [
            walk("wAB", "A", "B", L(800, 3000)),
            walk("wBA", "B", "A", L(800, 3000)),
            switch("sA", ArcKind.WALK_TO_ROAD, "A", "Ar"),
            switch("rB", ArcKind.ROAD_TO_WALK, "Br", "B"),
            road("AB", "Ar", "Br", L(1000, 6000), L(8, 25), cap(), 0.0),
            road("AC", "Ar", "Cr", L(500, 3000), L(8, 25), cap(), 0.0),
            road("CB", "Cr", "Br", L(500, 3000), L(8, 25), cap(), 0.0),
            road("BA", "Br", "Ar", L(1000, 6000), L(8, 25), cap(), 0.0),
        ]
    elif kind == "T3":
        nodes = {"A": W, "B": W, "S1": T, "S2": T, "Ar": R, "Br": R}
        arcs = [
            walk("wAB", "A", "B", L(800, 3000)),
            walk("wBA", "B", "A", L(800, 3000)),
            switch("toS1", ArcKind.WALK_TO_STATION, "A", "S1", freq=1.0 / L(120, 900)),
            Arc("line", ArcKind.TRANSIT_LINE, "S1", "S2", L(500, 3000), scheduled_time=L(60, 600)),
            switch("fromS2", ArcKind.STATION_TO_WALK, "S2", "B"),
            switch("sA", ArcKind.WALK_TO_ROAD, "A", "Ar"),
            road("AB", "Ar", "Br", L(1000, 6000), L(8, 25), cap(), 0.0),
            switch("rB", ArcKind.ROAD_TO_WALK, "Br", "B"),
        ]
        # no return road arc: vehicles cannot be rebalanced, so the road stays empty
    else:
        raise ValueError(kind)
    g = MultilayerGraph(nodes, arcs)
    assert len(g.arcs) <= 8 and not g.problems(), g.problems()
    return g


def micro_params(beta: float = 1.0) -> ScenarioParams:
    return ScenarioParams(beta=beta, drive_cycle=DriveCycle((5.0, 25.0), (400.0, 700.0)))


def simple_paths(g: MultilayerGraph, src: str, dst: str) -> list[list[int]]:
    out_arcs: dict[str, list[int]] = {n: [] for n in g.nodes}
    for i, a in enumerate(g.arcs):
        out_arcs[a.tail].append(i)
    paths = []

    def dfs(node, visited, path):
        if node == dst:
            paths.append(list(path))
            return
        for i in out_arcs[node]:
            h = g.arcs[i].head
            if h not in visited:
                visited.add(h)
                path.append(i)
                dfs(h, visited, path)
                path.pop()
                visited.discard(h)

    dfs(src, {src}, [])
    return paths


def route_mix_optimum(g: MultilayerGraph, requests, design: DesignPoint, params: ScenarioParams):
    """Two-stage optimum over mixes of simple routes, by vertex enumeration.

    Variables are per-route customer flows plus per-road-arc rebalancing
    flows. Returns (status, stage-1 t_avg, mileage, t_avg of the stage-2 mix).
    """
    g = prune_arcs(g, design.v_a, params.beta)
    times = travel_times(g, design.v_a, scale_frequencies(g, design.train_factor), params)
    road_idx = list(g.road_arc_indices)
    road_nodes = g.nodes_in(Layer.ROAD)
    routes = []  # (request index, arcs)
    for m, r in enumerate(requests):
        for p in simple_paths(g, r.origin, r.destination):
            routes.append((m, p))
    nP, nR = len(routes), len(road_idx)
    n = nP + nR
    alpha = sum(r.rate for r in requests)
    lengths = np.array([a.length for a in g.arcs])

    def arc_load(k):  # column of per-arc usage
        v = np.zeros(len(g.arcs))
        if k < nP:
            for i in routes[k][1]:
                v[i] += 1.0
        else:
            v[road_idx[k - nP]] += 1.0
        return v

    U = np.column_stack([arc_load(k) for k in range(n)])  # arcs x vars
    time_c = np.array([times[routes[k][1]].sum() / alpha if k < nP else 0.0 for k in range(n)])
    mile_c = lengths[road_idx] @ U[road_idx]

    A_eq, b_eq = [], []
    for m, r in enumerate(requests):
        A_eq.append([1.0 if k < nP and routes[k][0] == m else 0.0 for k in range(n)])
        b_eq.append(r.rate)
    idx = g.node_index
    for node in road_nodes:
        row = np.zeros(n)
        for i in road_idx:
            a = g.arcs[i]
            if a.head == node:
                row += U[i]
            if a.tail == node:
                row -= U[i]
        A_eq.append(row)
        b_eq.append(0.0)
    A_ub = [U[i] for i in road_idx]
    b_ub = [g.arcs[i].capacity - g.arcs[i].baseline_usage for i in road_idx]
    A_ub.append(times[road_idx] @ U[road_idx])
    b_ub.append(design.n_v_max)
    A_eq, b_eq, A_ub, b_ub = map(np.array, (A_eq, b_eq, A_ub, b_ub))
    # drop all-zero equality rows (isolated road nodes)
    nz = np.abs(A_eq).sum(axis=1) > 0
    A_eq, b_eq = A_eq[nz], b_eq[nz]
    A_eq, b_eq = _independent_rows(A_eq, b_eq)

    st, t_star, _ = vertex_enumeration(time_c, A_ub, b_ub, A_eq, b_eq)
    if st != "Optimal":
        return st, np.inf, np.inf, np.inf
    A2 = np.vstack([A_ub, time_c])
    b2 = np.concatenate([b_ub, [t_star * (1 + 1e-9) + 1e-9]])
    st2, mileage, x2 = vertex_enumeration(mile_c, A2, b2, A_eq, b_eq)
    assert st2 == "Optimal"
    return "Optimal", t_star, mileage, float(time_c @ x2)


def _independent_rows(A, b):
    keep = []
    for i in range(A.shape[0]):
        trial = A[keep + [i]]
        if np.linalg.matrix_rank(trial) == len(keep) + 1:
            keep.append(i)
    return A[keep], b[keep]


def random_requests(g: MultilayerGraph, rng: np.random.Generator) -> list[TravelRequest]:
    reqs = [TravelRequest("A", "B", float(rng.choice([0.01, 0.05, 0.1, 0.3])))]
    if rng.random() < 0.5:
        reqs.append(TravelRequest("B", "A", float(rng.choice([0.01, 0.05, 0.1]))))
    return reqs
