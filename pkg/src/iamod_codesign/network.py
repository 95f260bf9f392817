"""Multilayer intermodal graph: road, walking and transit layers plus mode switches.

All quantities are SI (m, s, m/s, vehicles/s, J).
"""
from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .units import MONTH

__all__ = [
    "Layer",
    "ArcKind",
    "Arc",
    "MultilayerGraph",
    "TravelRequest",
    "DriveCycle",
    "ScenarioParams",
    "DesignPoint",
    "InvalidParameter",
    "prune_arcs",
    "arc_travel_time",
    "arc_energy",
    "scale_frequencies",
    "travel_times",
    "road_energies",
    "PRUNE_RTOL",
]

# ties in the speed-limit test are decided as "kept" up to float representation error
PRUNE_RTOL = 1e-12


class InvalidParameter(ValueError):
    pass


class Layer(str, enum.Enum):
    ROAD = "road"
    WALK = "walk"
    TRANSIT = "transit"


class ArcKind(str, enum.Enum):
    ROAD = "road"
    WALK = "walk"
    TRANSIT_LINE = "transit_line"
    WALK_TO_ROAD = "walk_to_road"
    ROAD_TO_WALK = "road_to_walk"
    WALK_TO_STATION = "walk_to_station"
    STATION_TO_WALK = "station_to_walk"


# required (tail layer, head layer) per arc kind
ARC_LAYERS = {
    ArcKind.ROAD: (Layer.ROAD, Layer.ROAD),
    ArcKind.WALK: (Layer.WALK, Layer.WALK),
    ArcKind.TRANSIT_LINE: (Layer.TRANSIT, Layer.TRANSIT),
    ArcKind.WALK_TO_ROAD: (Layer.WALK, Layer.ROAD),
    ArcKind.ROAD_TO_WALK: (Layer.ROAD, Layer.WALK),
    ArcKind.WALK_TO_STATION: (Layer.WALK, Layer.TRANSIT),
    ArcKind.STATION_TO_WALK: (Layer.TRANSIT, Layer.WALK),
}


@dataclass(frozen=True)
class Arc:
    id: str
    kind: ArcKind
    tail: str
    head: str
    length: float = 0.0
    speed_limit: float | None = None         # road only, m/s
    capacity: float | None = None            # road only, veh/s
    baseline_usage: float | None = None      # road only, veh/s
    scheduled_time: float | None = None      # transit line only, s
    baseline_frequency: float | None = None  # walk-to-station only, 1/s

    @property
    def is_road(self) -> bool:
        return self.kind is ArcKind.ROAD

    @property
    def residual_capacity(self) -> float:
        return self.capacity - self.baseline_usage


class MultilayerGraph:
    """Immutable node/arc container with index lookups.

    Construction does not validate; call :meth:`problems` (the scenario loader
    does) to check layer typing, road attributes and strong connectivity.
    """

    def __init__(self, nodes: Mapping[str, Layer] | Iterable[tuple[str, Layer]], arcs: Iterable[Arc]):
        items = nodes.items() if isinstance(nodes, Mapping) else nodes
        self._nodes = MappingProxyType({nid: Layer(layer) for nid, layer in items})
        self._arcs = tuple(arcs)
        self._node_index = {nid: i for i, nid in enumerate(self._nodes)}
        self._road_idx = tuple(i for i, a in enumerate(self._arcs) if a.is_road)

    @property
    def nodes(self) -> Mapping[str, Layer]:
        return self._nodes

    @property
    def arcs(self) -> tuple[Arc, ...]:
        return self._arcs

    @property
    def node_index(self) -> Mapping[str, int]:
        return self._node_index

    @property
    def road_arc_indices(self) -> tuple[int, ...]:
        return self._road_idx

    @property
    def road_arcs(self) -> tuple[Arc, ...]:
        return tuple(self._arcs[i] for i in self._road_idx)

    def nodes_in(self, layer: Layer) -> list[str]:
        return [n for n, l in self._nodes.items() if l is layer]

    def with_arcs(self, arcs: Iterable[Arc]) -> "MultilayerGraph":
        return MultilayerGraph(self._nodes, arcs)

    def is_strongly_connected(self) -> bool:
        if not self._nodes:
            return True
        fwd: dict[str, list[str]] = {n: [] for n in self._nodes}
        bwd: dict[str, list[str]] = {n: [] for n in self._nodes}
        for a in self._arcs:
            fwd[a.tail].append(a.head)
            bwd[a.head].append(a.tail)
        start = next(iter(self._nodes))
        return all(len(_reachable(start, adj)) == len(self._nodes) for adj in (fwd, bwd))

    def problems(self) -> list[tuple[str, str]]:
        """(arc or node id, message) for every structural invariant violation."""
        out: list[tuple[str, str]] = []
        seen: set[str] = set()
        for a in self._arcs:
            if a.id in seen:
                out.append((a.id, "duplicate arc id"))
            seen.add(a.id)
            missing = [n for n in (a.tail, a.head) if n not in self._nodes]
            if missing:
                out.append((a.id, f"references unknown node(s) {', '.join(missing)}"))
                continue
            want = ARC_LAYERS[a.kind]
            got = (self._nodes[a.tail], self._nodes[a.head])
            if got != want:
                out.append((a.id, f"{a.kind.value} arc must connect {want[0].value} -> {want[1].value}, "
                                  f"got {got[0].value} -> {got[1].value}"))
            if a.tail == a.head:
                out.append((a.id, "self-loop"))
            if not (a.length >= 0 and math.isfinite(a.length)):
                out.append((a.id, "length must be finite and >= 0"))
            if a.kind is ArcKind.ROAD:
                for attr in ("speed_limit", "capacity", "baseline_usage"):
                    if getattr(a, attr) is None:
                        out.append((a.id, f"road arc requires {attr}"))
                if a.speed_limit is not None and not a.speed_limit > 0:
                    out.append((a.id, "speed limit must be > 0"))
                if a.capacity is not None and a.baseline_usage is not None:
                    if a.baseline_usage < 0:
                        out.append((a.id, "baseline usage must be >= 0"))
                    if a.baseline_usage > a.capacity:
                        out.append((a.id, "baseline usage exceeds capacity"))
            if a.kind is ArcKind.TRANSIT_LINE and not (a.scheduled_time is not None and a.scheduled_time >= 0):
                out.append((a.id, "transit line arc requires a scheduled time >= 0"))
            if a.kind is ArcKind.WALK_TO_STATION and not (a.baseline_frequency is not None and a.baseline_frequency > 0):
                out.append((a.id, "walk-to-station arc requires a baseline frequency > 0"))
        freq: dict[str, float] = {}
        for a in self._arcs:
            if a.kind is ArcKind.WALK_TO_STATION and a.baseline_frequency:
                prev = freq.setdefault(a.head, a.baseline_frequency)
                if prev != a.baseline_frequency:
                    out.append((a.id, f"station {a.head} has inconsistent baseline frequencies"))
        if not out and not self.is_strongly_connected():
            out.append(("graph", "graph is not strongly connected"))
        return out


def _reachable(start: str, adj: Mapping[str, list[str]]) -> set[str]:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


@dataclass(frozen=True)
class TravelRequest:
    origin: str
    destination: str
    rate: float  # customers/s

    def __post_init__(self) -> None:
        if self.origin == self.destination:
            raise InvalidParameter(f"request {self.origin}->{self.destination}: origin equals destination")
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise InvalidParameter(f"request rate must be > 0, got {self.rate}")

    def scaled(self, factor: float) -> "TravelRequest":
        return TravelRequest(self.origin, self.destination, self.rate * factor)


@dataclass(frozen=True)
class DriveCycle:
    """Energy per meter as a piecewise-linear function of average speed."""

    speeds: tuple[float, ...]
    energy_per_meter: tuple[float, ...]

    def __post_init__(self) -> None:
        s, e = tuple(map(float, self.speeds)), tuple(map(float, self.energy_per_meter))
        if len(s) < 2 or len(s) != len(e):
            raise InvalidParameter("drive cycle needs >= 2 (speed, energy) breakpoints")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise InvalidParameter("drive cycle speeds must be strictly increasing")
        if any(v < 0 for v in e):
            raise InvalidParameter("drive cycle energies must be >= 0")
        object.__setattr__(self, "speeds", s)
        object.__setattr__(self, "energy_per_meter", e)

    def per_meter(self, v: float) -> float:
        # np.interp clamps at both ends
        return float(np.interp(v, self.speeds, self.energy_per_meter))


@dataclass(frozen=True)
class ScenarioParams:
    beta: float
    walking_speed: float = 1.4
    t_wr: float = 300.0
    t_rw: float = 60.0
    t_ws: float = 60.0
    t_sw: float = 60.0
    gamma: float = 1.4e-7  # kg CO2 per J
    drive_cycle: DriveCycle = field(default_factory=lambda: DriveCycle((1.0, 40.0), (500.0, 500.0)))
    seconds_per_month: float = MONTH

    def __post_init__(self) -> None:
        if not (0 < self.beta <= 1):
            raise InvalidParameter(f"speed-limit fraction must lie in (0, 1], got {self.beta}")
        for name in ("walking_speed", "t_wr", "t_rw", "t_ws", "t_sw", "gamma", "seconds_per_month"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise InvalidParameter(f"{name} must be > 0, got {v}")


@dataclass(frozen=True, order=True)
class DesignPoint:
    v_a: float           # AV achievable speed, m/s
    n_v_max: int         # AV fleet size
    train_factor: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if not self.v_a > 0:
            raise InvalidParameter("achievable speed must be > 0")
        if self.n_v_max < 0 or int(self.n_v_max) != self.n_v_max:
            raise InvalidParameter("fleet size must be a non-negative integer")
        object.__setattr__(self, "n_v_max", int(self.n_v_max))
        object.__setattr__(self, "train_factor", Fraction(self.train_factor))


def is_kept(arc: Arc, v_a: float, beta: float) -> bool:
    return v_a >= beta * arc.speed_limit * (1.0 - PRUNE_RTOL)


def prune_arcs(g: MultilayerGraph, v_a: float, beta: float) -> MultilayerGraph:
    """Drop road arcs whose speed limit the AVs cannot reach a ``beta`` fraction of.

    Connectivity loss is allowed here; the flow layer reports infeasibility.
    """
    return g.with_arcs(a for a in g.arcs if not a.is_road or is_kept(a, v_a, beta))


def arc_speed(arc: Arc, v_a: float) -> float:
    return min(v_a, arc.speed_limit)


def arc_travel_time(arc: Arc, v_a: float, phi: float | None, params: ScenarioParams) -> float:
    """Traversal time of ``arc`` in seconds; ``phi`` is the station frequency (1/s)."""
    kind = arc.kind
    if kind is ArcKind.ROAD:
        return arc.length / arc_speed(arc, v_a)
    if kind is ArcKind.WALK:
        return arc.length / params.walking_speed
    if kind is ArcKind.TRANSIT_LINE:
        return float(arc.scheduled_time)
    if kind is ArcKind.WALK_TO_STATION:
        if phi is None or not phi > 0:
            raise InvalidParameter(f"arc {arc.id}: station frequency must be > 0, got {phi}")
        return params.t_ws + 1.0 / (2.0 * phi)
    if kind is ArcKind.STATION_TO_WALK:
        return params.t_sw
    if kind is ArcKind.WALK_TO_ROAD:
        return params.t_wr
    if kind is ArcKind.ROAD_TO_WALK:
        return params.t_rw
    raise InvalidParameter(f"unknown arc kind {kind!r}")


def arc_energy(arc: Arc, v_a: float, cycle: DriveCycle) -> float:
    """Energy in J for one vehicle to traverse a road arc at free-flow speed."""
    if not arc.is_road:
        raise InvalidParameter(f"arc {arc.id} is not a road arc")
    if arc.length == 0:
        return 0.0
    return cycle.per_meter(arc_speed(arc, v_a)) * arc.length


def scale_frequencies(g: MultilayerGraph, train_factor) -> dict[str, float]:
    """Station node id -> service frequency (1/s) with the train fleet scaled."""
    factor = float(train_factor)
    if factor < 1:
        raise InvalidParameter(f"train factor must be >= 1, got {train_factor}")
    return {
        a.head: factor * a.baseline_frequency
        for a in g.arcs
        if a.kind is ArcKind.WALK_TO_STATION
    }


def travel_times(g: MultilayerGraph, v_a: float, freqs: Mapping[str, float], params: ScenarioParams) -> np.ndarray:
    return np.array([arc_travel_time(a, v_a, freqs.get(a.head), params) for a in g.arcs])


def road_energies(g: MultilayerGraph, v_a: float, cycle: DriveCycle) -> np.ndarray:
    """Per-arc energy in J; zero for non-road arcs."""
    return np.array([arc_energy(a, v_a, cycle) if a.is_road else 0.0 for a in g.arcs])
