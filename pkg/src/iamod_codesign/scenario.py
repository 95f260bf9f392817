"""Scenario files: ingestion, unit conversion and validation.

A scenario is a JSON document with sections ``graph``, ``demand``,
``params``, ``catalogs``, ``grid`` and ``monetization_rate``. Dimensional
values are strings with explicit units (``"30 mph"``, ``"0.084 USD/mile"``)
and are converted to SI on load. A file may start from another one with
``"extends": "<relative path>"``; objects are merged key by key and
everything else is replaced.

Validation collects every violation with a location (JSON path, file and
line of the enclosing object) instead of stopping at the first.
"""
from __future__ import annotations

import hashlib
import json
import json.decoder
import json.scanner
import math
from bisect import bisect_right
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any

from .design import CatalogError, SubwayCatalog, VehicleCatalog, VehicleRow
from .engine import DesignGrid
from .network import (
    Arc,
    ArcKind,
    DriveCycle,
    InvalidParameter,
    Layer,
    MultilayerGraph,
    ScenarioParams,
    TravelRequest,
)
from .units import MONTH, UnitError, parse_quantity, split_quantity

__all__ = [
    "Scenario",
    "Violation",
    "ValidationReport",
    "ScenarioError",
    "load_scenario",
    "validate_scenario",
    "parse_scenario",
    "read_scenario_document",
]


@dataclass(frozen=True)
class Violation:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


class ScenarioError(ValueError):
    def __init__(self, violations: list[Violation]):
        self.violations = list(violations)
        lines = "\n".join(f"  {v}" for v in self.violations)
        super().__init__(f"{len(self.violations)} scenario violation(s):\n{lines}")


@dataclass
class ValidationReport:
    source: str
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def format(self) -> str:
        if self.ok:
            return f"{self.source}: OK (0 violations)"
        head = f"{self.source}: {len(self.violations)} violation(s)"
        return "\n".join([head] + [f"  {v}" for v in self.violations])


@dataclass(frozen=True)
class Scenario:
    name: str
    graph: MultilayerGraph
    requests: tuple[TravelRequest, ...]
    params: ScenarioParams
    vehicle_catalog: VehicleCatalog
    subway_catalog: SubwayCatalog
    grid: DesignGrid
    monetization_rate: float  # USD/kg
    source: str = ""

    @property
    def alpha_tot(self) -> float:
        return sum(r.rate for r in self.requests)

    def with_demand_scale(self, factor: float) -> "Scenario":
        return replace(self, requests=tuple(r.scaled(factor) for r in self.requests))

    def network_hash(self) -> str:
        """Digest of graph, demand and physical parameters (catalogs excluded)."""
        p = self.params
        doc = {
            "nodes": sorted((n, l.value) for n, l in self.graph.nodes.items()),
            "arcs": [
                [a.id, a.kind.value, a.tail, a.head, a.length, a.speed_limit, a.capacity,
                 a.baseline_usage, a.scheduled_time, a.baseline_frequency]
                for a in self.graph.arcs
            ],
            "demand": [[r.origin, r.destination, r.rate] for r in self.requests],
            "params": [p.beta, p.walking_speed, p.t_wr, p.t_rw, p.t_ws, p.t_sw, p.gamma,
                       list(p.drive_cycle.speeds), list(p.drive_cycle.energy_per_meter),
                       p.seconds_per_month],
        }
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"), default=repr)
        return hashlib.sha256(blob.encode()).hexdigest()


# --- JSON with source positions -------------------------------------------

class _LocatedDict(dict):
    """dict remembering the file and line where the object literal starts."""

    __slots__ = ("source", "line")


def _located_loads(text: str, source: str) -> Any:
    line_starts = [0] + [i + 1 for i, ch in enumerate(text) if ch == "\n"]
    decoder = json.JSONDecoder()

    def parse_object(s_and_end, strict, scan_once, object_hook, object_pairs_hook, memo=None):
        _, end = s_and_end
        obj, new_end = json.decoder.JSONObject(s_and_end, strict, scan_once, object_hook, object_pairs_hook, memo)
        located = _LocatedDict(obj)
        located.source = source
        located.line = bisect_right(line_starts, end - 1)
        return located, new_end

    decoder.parse_object = parse_object
    decoder.scan_once = json.scanner.py_make_scanner(decoder)
    return decoder.decode(text)


def _merge(base: Any, override: Any) -> Any:
    if isinstance(base, dict) and isinstance(override, dict):
        out = _LocatedDict(base)
        out.source = getattr(override, "source", getattr(base, "source", ""))
        out.line = getattr(override, "line", getattr(base, "line", 0))
        for k, v in override.items():
            out[k] = _merge(base[k], v) if k in base else v
        return out
    return override


def read_scenario_document(path: str | Path, _seen: tuple[Path, ...] = ()) -> dict:
    """Parse a scenario file (following ``extends``) into a located document."""
    path = Path(path).resolve()
    if path in _seen:
        raise ScenarioError([Violation(str(path), "circular 'extends' chain")])
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError([Violation(str(path), f"cannot read file: {exc.strerror or exc}")]) from exc
    try:
        doc = _located_loads(text, path.name)
    except json.JSONDecodeError as exc:
        raise ScenarioError([Violation(f"{path.name}:{exc.lineno}:{exc.colno}", f"JSON syntax error: {exc.msg}")]) from exc
    if not isinstance(doc, dict):
        raise ScenarioError([Violation(path.name, "top level must be a JSON object")])
    parent = doc.pop("extends", None)
    if parent is not None:
        base = read_scenario_document(path.parent / parent, _seen + (path,))
        doc = _merge(base, doc)
    return doc


# --- parsing -------------------------------------------------------------

class _Collector:
    def __init__(self) -> None:
        self.violations: list[Violation] = []

    def error(self, path: str, obj: Any, message: str) -> None:
        where = path
        if isinstance(obj, _LocatedDict):
            where = f"{path} ({obj.source}:{obj.line})"
        self.violations.append(Violation(where, message))

    def section(self, doc: Any, key: str, path: str, kind: type = dict) -> Any:
        if not isinstance(doc, dict) or key not in doc:
            self.error(path, doc, f"missing required section '{key}'")
            return None
        value = doc[key]
        if not isinstance(value, kind):
            self.error(f"{path}.{key}" if path else key, doc, f"must be a JSON {kind.__name__}")
            return None
        return value

    def quantity(self, obj: dict, key: str, dim: str, path: str, *, required: bool = True,
                 default: float | None = None) -> float | None:
        if key not in obj:
            if required:
                self.error(path, obj, f"missing field '{key}'")
            return default
        try:
            return parse_quantity(obj[key], dim)
        except UnitError as exc:
            self.error(f"{path}.{key}", obj, str(exc))
            return None

    def number(self, obj: dict, key: str, path: str, *, integer: bool = False, required: bool = True,
               default: Any = None) -> Any:
        if key not in obj:
            if required:
                self.error(path, obj, f"missing field '{key}'")
            return default
        v = obj[key]
        ok = isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
        if integer:
            ok = ok and float(v).is_integer()
        if not ok:
            self.error(f"{path}.{key}", obj, f"expected {'an integer' if integer else 'a number'}, got {v!r}")
            return None
        return int(v) if integer else float(v)


def _ratio(value: Any) -> Fraction | float:
    """Number or ``"a/b"`` string; exact when both parts are exact decimals."""
    if isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        if "/" in value:
            num, den = value.split("/", 1)
            return Fraction(num.strip()) / Fraction(den.strip())
        return Fraction(value.strip())
    raise ValueError(f"expected a number or 'a/b' string, got {value!r}")


_ROAD_FIELDS = ("speed_limit", "capacity", "baseline_usage")


def _parse_arc(c: _Collector, obj: Any, path: str) -> Arc | None:
    if not isinstance(obj, dict):
        c.error(path, None, "arc must be an object")
        return None
    ok = True
    aid = obj.get("id")
    if not isinstance(aid, str) or not aid:
        c.error(path, obj, "arc requires a string 'id'")
        ok = False
    try:
        kind = ArcKind(obj.get("kind"))
    except ValueError:
        c.error(f"{path}.kind", obj, f"unknown arc kind {obj.get('kind')!r} "
                                     f"(expected one of {', '.join(k.value for k in ArcKind)})")
        return None
    ends = []
    for key in ("from", "to"):
        v = obj.get(key)
        if not isinstance(v, str):
            c.error(path, obj, f"arc requires string field '{key}'")
            ok = False
        ends.append(v)
    length = c.quantity(obj, "length", "length", path, required=kind in (ArcKind.ROAD, ArcKind.WALK), default=0.0)
    if length is None:
        ok = False
    elif length < 0:
        c.error(f"{path}.length", obj, "length must be >= 0")
        ok = False
    extra: dict[str, float | None] = {}
    if kind is ArcKind.ROAD:
        extra["speed_limit"] = c.quantity(obj, "speed_limit", "speed", path)
        extra["capacity"] = c.quantity(obj, "capacity", "rate", path)
        usage = obj.get("baseline_usage")
        if isinstance(usage, str) and usage.strip().endswith("%"):
            try:
                pct, _ = split_quantity(usage)
            except UnitError as exc:
                c.error(f"{path}.baseline_usage", obj, str(exc))
                pct = None
            cap = extra["capacity"]
            extra["baseline_usage"] = None if pct is None or cap is None else pct / 100.0 * cap
        else:
            extra["baseline_usage"] = c.quantity(obj, "baseline_usage", "rate", path)
        if any(extra[k] is None for k in _ROAD_FIELDS):
            ok = False
        else:
            if extra["speed_limit"] <= 0:
                c.error(f"{path}.speed_limit", obj, "speed limit must be > 0")
                ok = False
            if extra["baseline_usage"] < 0 or extra["capacity"] < 0:
                c.error(path, obj, "capacity and baseline usage must be >= 0")
                ok = False
            elif extra["baseline_usage"] > extra["capacity"]:
                c.error(f"{path}.baseline_usage", obj, "baseline usage exceeds capacity")
                ok = False
    elif kind is ArcKind.TRANSIT_LINE:
        extra["scheduled_time"] = c.quantity(obj, "scheduled_time", "time", path)
        if extra["scheduled_time"] is None:
            ok = False
        elif extra["scheduled_time"] < 0:
            c.error(f"{path}.scheduled_time", obj, "scheduled time must be >= 0")
            ok = False
    elif kind is ArcKind.WALK_TO_STATION:
        if "baseline_headway" in obj:
            headway = c.quantity(obj, "baseline_headway", "time", path)
            freq = 1.0 / headway if headway else None
            if headway is not None and headway <= 0:
                c.error(f"{path}.baseline_headway", obj, "headway must be > 0")
        else:
            freq = c.quantity(obj, "baseline_frequency", "rate", path)
            if freq is not None and freq <= 0:
                c.error(f"{path}.baseline_frequency", obj, "frequency must be > 0")
                freq = None
        extra["baseline_frequency"] = freq
        if freq is None:
            ok = False
    if not ok:
        return None
    return Arc(id=aid, kind=kind, tail=ends[0], head=ends[1], length=length, **extra)


def _parse_graph(c: _Collector, doc: dict) -> tuple[MultilayerGraph | None, dict[str, Layer] | None]:
    """The graph (None if any arc is broken) and the node table (None if absent)."""
    g = c.section(doc, "graph", "")
    if g is None:
        return None, None
    nodes_raw = c.section(g, "nodes", "graph", list)
    arcs_raw = c.section(g, "arcs", "graph", list)
    if nodes_raw is None:
        return None, None
    if arcs_raw is None:
        arcs_raw, missing_arcs = [], True
    else:
        missing_arcs = False
    nodes: dict[str, Layer] = {}
    for i, n in enumerate(nodes_raw):
        path = f"graph.nodes[{i}]"
        if not isinstance(n, dict) or not isinstance(n.get("id"), str):
            c.error(path, n, "node requires a string 'id'")
            continue
        try:
            layer = Layer(n.get("layer"))
        except ValueError:
            c.error(f"{path}.layer", n, f"unknown layer {n.get('layer')!r} (expected road, walk or transit)")
            continue
        if n["id"] in nodes:
            c.error(path, n, f"duplicate node id {n['id']!r}")
            continue
        nodes[n["id"]] = layer

    arcs: list[Arc] = []
    arc_objs: dict[str, tuple[str, Any]] = {}
    broken = False
    for i, a in enumerate(arcs_raw):
        path = f"graph.arcs[{i}]"
        arc = _parse_arc(c, a, path)
        if arc is None:
            broken = True
            continue
        if arc.id in arc_objs:
            c.error(path, a, f"duplicate arc id {arc.id!r}")
            broken = True
            continue
        arc_objs[arc.id] = (path, a)
        for end in (arc.tail, arc.head):
            if end not in nodes:
                c.error(path, a, f"arc {arc.id!r} references unknown node {end!r}")
                broken = True
        arcs.append(arc)
    if broken or missing_arcs:
        return None, nodes
    graph = MultilayerGraph(nodes, arcs)
    for where, msg in graph.problems():
        path, obj = arc_objs.get(where, ("graph", g))
        c.error(path, obj, msg)
    return graph, nodes


def _parse_demand(c: _Collector, doc: dict, nodes: dict[str, Layer] | None) -> list[TravelRequest]:
    raw = c.section(doc, "demand", "", list)
    out: list[TravelRequest] = []
    if raw is None:
        return out
    if not raw:
        c.error("demand", doc, "at least one travel request is required")
    for i, r in enumerate(raw):
        path = f"demand[{i}]"
        if not isinstance(r, dict):
            c.error(path, None, "travel request must be an object")
            continue
        o, d = r.get("origin"), r.get("destination")
        rate = c.quantity(r, "rate", "rate", path)
        bad = rate is None
        for key, node in (("origin", o), ("destination", d)):
            if not isinstance(node, str):
                c.error(path, r, f"missing string field '{key}'")
                bad = True
            elif nodes is not None and node not in nodes:
                c.error(f"{path}.{key}", r, f"unknown node {node!r}")
                bad = True
            elif nodes is not None and nodes[node] is not Layer.WALK:
                c.error(f"{path}.{key}", r, f"node {node!r} is not on the walking layer")
                bad = True
        if bad:
            continue
        try:
            out.append(TravelRequest(o, d, rate))
        except InvalidParameter as exc:
            c.error(path, r, str(exc))
    return out


def _parse_params(c: _Collector, doc: dict) -> ScenarioParams | None:
    p = c.section(doc, "params", "")
    if p is None:
        return None
    kwargs: dict[str, Any] = {}
    try:
        kwargs["beta"] = float(_ratio(p["beta"]))
    except KeyError:
        c.error("params", p, "missing field 'beta'")
    except (ValueError, ZeroDivisionError) as exc:
        c.error("params.beta", p, str(exc))
    kwargs["walking_speed"] = c.quantity(p, "walking_speed", "speed", "params", required=False, default=1.4)
    for key, default in (("t_wr", 300.0), ("t_rw", 60.0), ("t_ws", 60.0)):
        kwargs[key] = c.quantity(p, key, "time", "params", required=False, default=default)
    kwargs["t_sw"] = c.quantity(p, "t_sw", "time", "params", required=False, default=kwargs["t_ws"])
    kwargs["gamma"] = c.quantity(p, "gamma", "co2_per_energy", "params")
    if "seconds_per_month" in p:
        kwargs["seconds_per_month"] = c.number(p, "seconds_per_month", "params")
    else:
        kwargs["seconds_per_month"] = MONTH

    cycle_raw = p.get("drive_cycle")
    if not isinstance(cycle_raw, list):
        c.error("params", p, "missing 'drive_cycle' list of [speed, energy-per-length] pairs")
    else:
        speeds, energies = [], []
        for i, pair in enumerate(cycle_raw):
            try:
                if not (isinstance(pair, list) and len(pair) == 2):
                    raise UnitError("breakpoint must be a [speed, energy per length] pair")
                speeds.append(parse_quantity(pair[0], "speed"))
                energies.append(parse_quantity(pair[1], "energy_per_length"))
            except UnitError as exc:
                c.error(f"params.drive_cycle[{i}]", p, str(exc))
        if len(speeds) == len(cycle_raw):
            try:
                kwargs["drive_cycle"] = DriveCycle(tuple(speeds), tuple(energies))
            except InvalidParameter as exc:
                c.error("params.drive_cycle", p, str(exc))
    if any(v is None for v in kwargs.values()) or "drive_cycle" not in kwargs or "beta" not in kwargs:
        return None
    try:
        return ScenarioParams(**kwargs)
    except InvalidParameter as exc:
        c.error("params", p, str(exc))
        return None


def _parse_vehicle_catalog(c: _Collector, cats: dict) -> VehicleCatalog | None:
    v = c.section(cats, "vehicle", "catalogs")
    if v is None:
        return None
    life = c.quantity(v, "life", "years", "catalogs.vehicle")
    rows_raw = c.section(v, "rows", "catalogs.vehicle", list)
    if rows_raw is None:
        return None
    rows: dict[float, VehicleRow] = {}
    bad = life is None
    for i, r in enumerate(rows_raw):
        path = f"catalogs.vehicle.rows[{i}]"
        if not isinstance(r, dict):
            c.error(path, None, "row must be an object")
            bad = True
            continue
        speed = c.quantity(r, "speed", "speed", path)
        vals = [
            c.quantity(r, "vehicle_cost", "money", path),
            c.quantity(r, "automation_cost", "money", path),
            c.quantity(r, "operational_cost", "money_per_length", path),
        ]
        if speed is None or any(x is None for x in vals):
            bad = True
            continue
        if speed in rows:
            c.error(path, r, "duplicate catalog speed")
            bad = True
        rows[speed] = VehicleRow(*vals)
    if bad:
        return None
    try:
        return VehicleCatalog(rows, life)
    except CatalogError as exc:
        for msg in str(exc).split("; "):
            c.error("catalogs.vehicle", v, f"monotonicity violation: {msg}" if "decreases" in msg else msg)
        return None


def _parse_subway_catalog(c: _Collector, cats: dict) -> SubwayCatalog | None:
    s = c.section(cats, "subway", "catalogs")
    if s is None:
        return None
    path = "catalogs.subway"
    n_base = c.number(s, "baseline_trains", path, integer=True)
    fixed = c.quantity(s, "fixed_cost", "money", path)
    life = c.quantity(s, "life", "years", path)
    emis = c.quantity(s, "emissions_per_train", "mass_per_year", path)
    table_raw = c.section(s, "operational_cost", path, list)
    table: dict[Fraction, float] = {}
    bad = any(x is None for x in (n_base, fixed, life, emis, table_raw))
    for i, row in enumerate(table_raw or []):
        rpath = f"{path}.operational_cost[{i}]"
        if not isinstance(row, dict):
            c.error(rpath, None, "row must be an object")
            bad = True
            continue
        try:
            factor = Fraction(_ratio(row.get("factor")))
        except (ValueError, ZeroDivisionError, TypeError) as exc:
            c.error(f"{rpath}.factor", row, str(exc))
            bad = True
            continue
        cost = c.quantity(row, "cost", "money_per_year", rpath)
        if cost is None:
            bad = True
            continue
        table[factor] = cost
    if bad:
        return None
    try:
        return SubwayCatalog(n_base, fixed, life, table, emis)
    except CatalogError as exc:
        for msg in str(exc).split("; "):
            c.error(path, s, f"monotonicity violation: {msg}" if "decreases" in msg else msg)
        return None


def _parse_grid(c: _Collector, doc: dict, vcat: VehicleCatalog | None, scat: SubwayCatalog | None) -> DesignGrid | None:
    g = c.section(doc, "grid", "")
    if g is None:
        return None
    speeds: list[float] = []
    raw = g.get("speeds", "catalog")
    if raw == "catalog":
        speeds = vcat.speeds if vcat else []
    elif isinstance(raw, list):
        for i, s in enumerate(raw):
            try:
                v = parse_quantity(s, "speed")
            except UnitError as exc:
                c.error(f"grid.speeds[{i}]", g, str(exc))
                continue
            if vcat is not None:
                match = [sp for sp in vcat.speeds if math.isclose(sp, v, rel_tol=1e-9)]
                if not match:
                    c.error(f"grid.speeds[{i}]", g, f"speed {s!r} has no vehicle catalog row")
                    continue
                v = match[0]
            speeds.append(v)
    else:
        c.error("grid.speeds", g, "expected a list of speeds or \"catalog\"")

    fleets: list[int] = []
    raw = g.get("fleet_sizes")
    if isinstance(raw, dict):
        start, stop, step = (c.number(raw, k, "grid.fleet_sizes", integer=True) for k in ("start", "stop", "step"))
        if None not in (start, stop, step):
            if step <= 0:
                c.error("grid.fleet_sizes", g, "step must be > 0")
            else:
                fleets = list(range(start, stop + 1, step))
    elif isinstance(raw, list):
        for i, n in enumerate(raw):
            if isinstance(n, bool) or not isinstance(n, (int, float)) or not float(n).is_integer() or n < 0:
                c.error(f"grid.fleet_sizes[{i}]", g, f"fleet size must be a non-negative integer, got {n!r}")
            else:
                fleets.append(int(n))
    else:
        c.error("grid", g, "missing 'fleet_sizes' (list or {start, stop, step})")

    factors: list[Fraction] = []
    raw = g.get("train_factors", "catalog")
    if raw == "catalog":
        factors = scat.factors if scat else []
    elif isinstance(raw, list):
        for i, f in enumerate(raw):
            try:
                fr = Fraction(_ratio(f))
            except (ValueError, ZeroDivisionError) as exc:
                c.error(f"grid.train_factors[{i}]", g, str(exc))
                continue
            if scat is not None and fr not in scat.operational_cost:
                c.error(f"grid.train_factors[{i}]", g, f"train factor {f!r} has no subway catalog row")
                continue
            factors.append(fr)
    else:
        c.error("grid.train_factors", g, "expected a list of factors or \"catalog\"")
    if not (speeds and fleets and factors):
        if not c.violations:
            c.error("grid", g, "every design-grid axis needs at least one value")
        return None
    return DesignGrid(tuple(speeds), tuple(fleets), tuple(factors))


def _collect(doc: dict, source: str) -> tuple[Scenario | None, list[Violation]]:
    c = _Collector()
    name = doc.get("name", Path(source).stem if source else "scenario")
    graph, nodes = _parse_graph(c, doc)
    requests = _parse_demand(c, doc, nodes)
    params = _parse_params(c, doc)
    cats = c.section(doc, "catalogs", "")
    vcat = _parse_vehicle_catalog(c, cats) if cats is not None else None
    scat = _parse_subway_catalog(c, cats) if cats is not None else None
    grid = _parse_grid(c, doc, vcat, scat)
    rate = None
    if "monetization_rate" in doc:
        rate = c.quantity(doc, "monetization_rate", "money_per_mass", "")
        if rate is not None and rate < 0:
            c.error("monetization_rate", doc, "must be >= 0")
    else:
        c.error("", doc, "missing field 'monetization_rate'")
    if c.violations:
        return None, c.violations
    return Scenario(str(name), graph, tuple(requests), params, vcat, scat, grid, rate, source), []


def parse_scenario(doc: dict, source: str = "<memory>") -> Scenario:
    scenario, violations = _collect(doc, source)
    if violations:
        raise ScenarioError(violations)
    return scenario


def validate_scenario(path: str | Path) -> ValidationReport:
    report = ValidationReport(str(path))
    try:
        doc = read_scenario_document(path)
    except ScenarioError as exc:
        report.violations.extend(exc.violations)
        return report
    _, violations = _collect(doc, str(path))
    report.violations.extend(violations)
    return report


def load_scenario(path: str | Path) -> Scenario:
    doc = read_scenario_document(path)
    return parse_scenario(doc, str(path))
