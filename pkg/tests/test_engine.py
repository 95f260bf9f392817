import json
import math
from dataclasses import replace
from fractions import Fraction

import pytest

from iamod_codesign.engine import (
    Classification,
    DesignGrid,
    EvaluatedPoint,
    GridEvaluationError,
    classify,
    evaluate_grid,
    front_covers,
    min_cost_within,
    pareto_front,
    query_budget,
    sensitivity_compare,
)
from iamod_codesign.lp import SolverFailure
from iamod_codesign.network import DesignPoint
from iamod_codesign.poset import TOP, ResourceVector, leq
from iamod_codesign.scenario import load_scenario
from iamod_codesign.units import MPH

from oracles import MINI_CITY

SMALL = DesignGrid((25 * MPH, 40 * MPH, 50 * MPH), (0, 10, 30, 60), (1, Fraction(4, 3), 2))


def ep(cost, time, em, tag=None):
    return EvaluatedPoint(DesignPoint(10.0, tag or 0), ResourceVector(cost, time, em))


def test_mini_city_grid_size(mini_city):
    assert len(mini_city.grid) == 7 * 13 * 3 == 273


def test_grid_dedup_and_order():
    g = DesignGrid((10.0, 10.0, 5.0), (3, 0, 3), (Fraction(2), 1, Fraction(2)))
    assert len(g) == 2 * 2 * 2
    cells = list(g)
    assert len(cells) == len(set(cells)) == 8
    assert cells == sorted(cells)  # lexicographic over speed, fleet, factor
    assert cells[0] == DesignPoint(5.0, 0, 1) and cells[-1] == DesignPoint(10.0, 3, 2)
    with pytest.raises(ValueError):
        DesignGrid((), (0,), (1,))


def test_single_point_grid(mini_city, kernel):
    grid = DesignGrid((20 * MPH,), (0,), (1,))
    pts = evaluate_grid(mini_city, grid, kernel=kernel)
    assert len(pts) == 1 and pts[0].feasible
    assert pts[0].classification is Classification.PARETO


def test_front_examples():
    pts = classify([ep(1, 3, 0, 1), ep(3, 1, 0, 2), ep(2, 2, 0, 3), ep(2, 4, 0, 4), EvaluatedPoint(DesignPoint(1.0, 9), TOP)])
    front = pareto_front(pts)
    assert front.resource_set() == {(1, 3, 0), (3, 1, 0), (2, 2, 0)}
    assert [p.classification.value for p in pts] == ["Pareto", "Pareto", "Pareto", "FeasibleIrrational", "Infeasible"]
    assert len(pareto_front(classify([ep(1, 1, 1)]))) == 1
    assert pareto_front(classify([ep(3, 3, 3), ep(1, 1, 1), ep(2, 2, 2)])).resource_set() == {(1, 1, 1)}
    assert len(pareto_front(classify([EvaluatedPoint(DesignPoint(1.0, 0), TOP)]))) == 0


def test_query_budget():
    front = pareto_front([ep(10, 300, 5, 1), ep(20, 200, 5, 2)])
    assert query_budget(front, (math.inf,) * 3).resources.time == 200
    assert query_budget(front, (15, math.inf, math.inf)).resources.cost == 10
    assert query_budget(front, (5, math.inf, math.inf)) is None
    # time tie goes to the cheaper, then lower-emission point
    tie = pareto_front([ep(20, 200, 1, 1), ep(10, 200, 9, 2), ep(10, 200, 3, 3)])
    assert query_budget(tie, (math.inf,) * 3).resources.as_tuple() == (10, 200, 3)


def test_evaluation_error_carries_design(mini_city, monkeypatch):
    import iamod_codesign.engine as engine

    def boom(*a, **k):
        raise SolverFailure("synthetic")

    monkeypatch.setattr(engine, "solve_iamod", boom)
    with pytest.raises(GridEvaluationError) as info:
        evaluate_grid(mini_city, DesignGrid((20 * MPH,), (5,), (1,)))
    assert info.value.design == DesignPoint(20 * MPH, 5, 1)


def test_threads_equivalent(mini_city):
    small = replace(mini_city, grid=SMALL)
    a = evaluate_grid(small, threads=1)
    b = evaluate_grid(small, threads=4)
    assert [(p.design, p.resources, p.classification) for p in a] == [(p.design, p.resources, p.classification) for p in b]


def test_front_consistency(mini_points):
    pts = mini_points()
    pareto = [p for p in pts if p.classification is Classification.PARETO]
    other = [p for p in pts if p.classification is Classification.FEASIBLE_IRRATIONAL]
    assert pareto and other
    for q in other:
        assert any(leq(p.resources, q.resources) for p in pareto)
        for p in pareto:
            assert not (leq(q.resources, p.resources) and q.resources != p.resources)


def test_matches_verified_optima(mini_points):
    expected = json.loads((MINI_CITY / "expected.json").read_text())["cells"]
    pts = mini_points()
    assert len(pts) == len(expected)
    for p, e in zip(pts, expected):
        assert round(p.design.v_a / MPH, 6) == pytest.approx(e["speed_mph"])
        assert (p.design.n_v_max, str(p.design.train_factor)) == (e["fleet_size"], e["train_factor"])
        assert e["status"] == "Optimal" and p.flow.optimal
        assert p.flow.stage1_t_avg == pytest.approx(e["t_avg_s"], rel=1e-6)
        assert p.flow.s_v_tot == pytest.approx(e["mileage_m_per_s"], rel=1e-6, abs=1e-6)


def test_sensitivity_costly_automation():
    fronts = {}
    for name in ("case3_1", "case3_2"):
        sc = load_scenario(MINI_CITY / f"{name}.json")
        fronts[name] = pareto_front(evaluate_grid(replace(sc, grid=SMALL)))
    report = sensitivity_compare(fronts, 40.0)
    assert report.dominates("case3_1", "case3_2")
    assert not report.dominates("case3_2", "case3_1")
    cheap = report.series["case3_1"]
    for q in report.series["case3_2"]:
        assert any(p.resources[0] <= q.resources[0] and p.resources[1] <= q.resources[1] for p in cheap)
    # series are sorted by cost
    costs = [p.resources[0] for p in cheap]
    assert costs == sorted(costs)


def test_sensitivity_identical_and_empty():
    f = pareto_front([ep(1, 2, 3, 1), ep(2, 1, 3, 2)])
    rep = sensitivity_compare({"a": f, "b": f, "empty": pareto_front([])}, 40.0)
    assert [p.resources for p in rep.series["a"]] == [p.resources for p in rep.series["b"]]
    assert rep.series["empty"] == ()
    assert rep.dominates("a", "empty") and not rep.dominates("empty", "a")
    assert front_covers([], [])


def test_demand_scaling_monotone(mini_city):
    lams = (1.0, 1.2, 1.5)
    runs = {lam: evaluate_grid(replace(mini_city.with_demand_scale(lam), grid=SMALL)) for lam in lams}
    bounds = {(p.resources.time, p.resources.emissions) for pts in runs.values() for p in pts if p.feasible}
    bounds |= {(t, math.inf) for t, _ in bounds} | {(math.inf, e) for _, e in bounds}
    for t, e in bounds:
        costs = [min_cost_within(runs[lam], t, e) for lam in lams]
        assert costs == sorted(costs), (t, e, costs)
