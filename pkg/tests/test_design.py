import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from iamod_codesign.design import (
    CatalogError,
    SubwayCatalog,
    UnknownDesign,
    VehicleCatalog,
    VehicleRow,
    aggregate_resources,
    monetize,
    subway_dp,
    vehicle_dp,
)
from iamod_codesign.flow import FlowSolution, FlowStatus
from iamod_codesign.network import DesignPoint, ScenarioParams
from iamod_codesign.poset import TOP, ResourceVector, leq
from iamod_codesign.scenario import load_scenario
from iamod_codesign.units import MONTH, MPH

from oracles import MINI_CITY

PARAMS = ScenarioParams(beta=1 / 1.3)
BASE = load_scenario(MINI_CITY / "scenario.json")


@pytest.fixture(scope="module")
def cases():
    names = {"1": "scenario.json", "2.1": "case2_1.json", "2.2": "case2_2.json",
             "3.1": "case3_1.json", "3.2": "case3_2.json"}
    return {k: load_scenario(MINI_CITY / v) for k, v in names.items()}


def test_vehicle_dp_cases(cases):
    assert vehicle_dp(50 * MPH, cases["1"].vehicle_catalog)[0] == pytest.approx(47_000)
    assert vehicle_dp(50 * MPH, cases["2.1"].vehicle_catalog)[0] == pytest.approx(182_000)
    for v in cases["3.1"].vehicle_catalog.speeds:
        assert vehicle_dp(v, cases["3.1"].vehicle_catalog)[0] == pytest.approx(32_000)
    per_m = vehicle_dp(30 * MPH, cases["1"].vehicle_catalog)[1]
    assert per_m * 1609.344 == pytest.approx(0.084)


def test_vehicle_dp_no_interpolation(cases):
    with pytest.raises(UnknownDesign):
        vehicle_dp(22.5 * MPH, cases["1"].vehicle_catalog)


def test_subway_dp(cases):
    cat = cases["1"].subway_catalog
    s1 = subway_dp(1, cat)
    assert (s1.n_trains, s1.n_acquired, s1.acquisition_per_year) == (112, 0, 0.0)
    assert s1.operational_per_year == 148e6
    s2 = subway_dp(2, cat)
    assert (s2.n_trains, s2.n_acquired) == (224, 112)
    assert s2.acquisition_per_year == pytest.approx(54_133_333.33, abs=1)
    s43 = subway_dp(Fraction(4, 3), cat)
    assert (s43.n_trains, s43.n_acquired, s43.operational_per_year) == (149, 37, 197e6)
    with pytest.raises(UnknownDesign):
        subway_dp(Fraction(3, 2), cat)


def test_half_up_rounding():
    cat = SubwayCatalog(3, 1.0, 1.0, {Fraction(1): 1.0, Fraction(3, 2): 2.0}, 0.0)
    assert subway_dp(Fraction(3, 2), cat).n_trains == 5  # 4.5 rounds up


def _flow(s_v=0.0, co2=0.0, t=600.0, status=FlowStatus.OPTIMAL):
    return FlowSolution(status, DesignPoint(1.0, 0), t_avg=t, s_v_tot=s_v, m_co2_v_tot=co2, stage1_t_avg=t)


def test_aggregate_baseline(cases):
    sc = cases["1"]
    r = aggregate_resources(_flow(), DesignPoint(20 * MPH, 0, 1), sc.vehicle_catalog, sc.subway_catalog, PARAMS)
    assert r.cost == pytest.approx(148e6 / 12)
    assert r.emissions == pytest.approx(1_306_667, abs=1)
    assert r.time == 600.0


def test_aggregate_fleet_term(cases):
    sc = cases["1"]
    base = aggregate_resources(_flow(), DesignPoint(50 * MPH, 0), sc.vehicle_catalog, sc.subway_catalog, PARAMS)
    r = aggregate_resources(_flow(), DesignPoint(50 * MPH, 1000), sc.vehicle_catalog, sc.subway_catalog, PARAMS)
    assert r.cost - base.cost == pytest.approx(783_333.33, abs=1)


def test_aggregate_operational_and_emissions(cases):
    sc = cases["1"]
    r = aggregate_resources(_flow(s_v=100.0, co2=0.007), DesignPoint(50 * MPH, 0), sc.vehicle_catalog,
                            sc.subway_catalog, PARAMS)
    per_m = 0.084 / 1609.344
    assert r.cost == pytest.approx(148e6 / 12 + per_m * 100.0 * MONTH, rel=1e-8)
    assert r.emissions == pytest.approx(0.007 * MONTH + 140_000 * 112 / 12, rel=1e-8)


def test_aggregate_infeasible_is_top(cases):
    sc = cases["1"]
    r = aggregate_resources(_flow(status=FlowStatus.INFEASIBLE), DesignPoint(50 * MPH, 0),
                            sc.vehicle_catalog, sc.subway_catalog, PARAMS)
    assert r is TOP


def test_monetize():
    assert monetize(ResourceVector(1000, 600, 10), 40) == (1400, 600)
    assert monetize(ResourceVector(1000, 600, 10), 0) == (1000, 600)
    assert monetize(TOP, 40) == (math.inf, math.inf)
    with pytest.raises(ValueError):
        monetize(ResourceVector(1, 1, 1), -1)


vec = st.tuples(*[st.floats(0, 1e6, allow_nan=False)] * 3)


@given(vec, vec, st.floats(0, 1e3))
def test_monetize_preserves_dominance(a, b, rate):
    if leq(a, b):
        assert leq(monetize(ResourceVector(*a), rate), monetize(ResourceVector(*b), rate))


@given(st.floats(0, 1e3), st.floats(0, 1e3), st.floats(0, 1), st.floats(0, 1),
       st.integers(0, 500), st.integers(0, 500), st.sampled_from(["1", "4/3", "2"]), st.sampled_from(["1", "4/3", "2"]))
def test_aggregate_monotone(s1, s2, c1, c2, n1, n2, f1, f2):
    sc = BASE
    (s1, s2), (c1, c2), (n1, n2) = sorted((s1, s2)), sorted((c1, c2)), sorted((n1, n2))
    f1, f2 = sorted((Fraction(f1), Fraction(f2)))
    lo = aggregate_resources(_flow(s1, c1), DesignPoint(30 * MPH, n1, f1), sc.vehicle_catalog, sc.subway_catalog, PARAMS)
    hi = aggregate_resources(_flow(s2, c2), DesignPoint(30 * MPH, n2, f2), sc.vehicle_catalog, sc.subway_catalog, PARAMS)
    assert leq(lo, hi)


def test_catalog_monotonicity_rejected():
    rows = {10.0: VehicleRow(32000, 20000, 1e-4), 20.0: VehicleRow(32000, 10000, 1e-4)}
    with pytest.raises(CatalogError, match="decreases"):
        VehicleCatalog(rows, 5.0)
    with pytest.raises(CatalogError):
        SubwayCatalog(112, 1.0, 30.0, {Fraction(1): 2.0, Fraction(2): 1.0}, 0.0)
