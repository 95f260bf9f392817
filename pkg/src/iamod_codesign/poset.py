"""Product order on resource vectors and antichain (Pareto-minimal set) maintenance.

Resources are compared componentwise with exact float comparison; any
tolerance handling belongs to the code that computes the resources.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Sequence

__all__ = [
    "ResourceVector",
    "TOP",
    "LabeledPoint",
    "Antichain",
    "leq",
    "strictly_dominates",
    "insert_minimal",
    "minimal_elements",
    "merge",
]


@dataclass(frozen=True)
class ResourceVector:
    """(cost [USD/month], average travel time [s], emissions [kg CO2/month])."""

    cost: float
    time: float
    emissions: float

    def __post_init__(self) -> None:
        values = (self.cost, self.time, self.emissions)
        if all(math.isinf(v) and v > 0 for v in values):
            return
        for name, v in zip(("cost", "time", "emissions"), values):
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"resource component {name}={v!r} must be finite and >= 0")

    def __iter__(self) -> Iterator[float]:
        yield self.cost
        yield self.time
        yield self.emissions

    def __len__(self) -> int:
        return 3

    @property
    def is_top(self) -> bool:
        return math.isinf(self.cost)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.cost, self.time, self.emissions)


#: Infeasibility sentinel, the greatest element of the resource poset.
TOP = ResourceVector(math.inf, math.inf, math.inf)


def leq(a: Sequence[float], b: Sequence[float]) -> bool:
    """True iff every component of ``a`` is <= the matching component of ``b``."""
    if len(a) != len(b):
        raise ValueError("cannot compare vectors of different dimension")
    return all(x <= y for x, y in zip(a, b))


def strictly_dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    return leq(a, b) and tuple(a) != tuple(b)


def _is_top(resources: Sequence[float]) -> bool:
    return all(math.isinf(v) and v > 0 for v in resources)


@dataclass(frozen=True)
class LabeledPoint:
    """A resource vector tagged with whatever produced it (e.g. a design point)."""

    resources: Sequence[float]
    label: Any = None

    @property
    def key(self) -> tuple[float, ...]:
        return tuple(self.resources)


class Antichain:
    """Finite set of mutually incomparable labeled points.

    Instances are immutable; :func:`insert_minimal` and :func:`merge` return
    new antichains. Element order is insertion order, which only matters for
    presentation.
    """

    __slots__ = ("_elements",)

    def __init__(self, elements: Iterable[LabeledPoint] = ()) -> None:
        self._elements = tuple(elements)

    @property
    def elements(self) -> tuple[LabeledPoint, ...]:
        return self._elements

    def __iter__(self) -> Iterator[LabeledPoint]:
        return iter(self._elements)

    def __len__(self) -> int:
        return len(self._elements)

    def __bool__(self) -> bool:
        return bool(self._elements)

    def __repr__(self) -> str:
        return f"Antichain({[p.key for p in self._elements]})"

    def resource_set(self) -> frozenset[tuple[float, ...]]:
        return frozenset(p.key for p in self._elements)

    def sorted(self) -> list[LabeledPoint]:
        """Elements in lexicographic resource order (cost first for 3D resources)."""
        return sorted(self._elements, key=lambda p: p.key)

    def is_valid(self) -> bool:
        els = self._elements
        for i, a in enumerate(els):
            for b in els[i + 1:]:
                if leq(a.resources, b.resources) or leq(b.resources, a.resources):
                    return False
        return True


def insert_minimal(ac: Antichain, p: LabeledPoint) -> Antichain:
    """Return the minimal elements of ``ac`` together with ``p``.

    A point equal to an existing element is rejected, so the first-inserted
    label wins for duplicate resources.
    """
    if _is_top(p.resources):
        raise ValueError("the infeasibility sentinel cannot be inserted into an antichain")
    kept = []
    for q in ac:
        if leq(q.resources, p.resources):
            return ac
        if not leq(p.resources, q.resources):
            kept.append(q)
    kept.append(p)
    return Antichain(kept)


def minimal_elements(points: Iterable[LabeledPoint]) -> Antichain:
    """Batch Pareto filter.

    A stable lexicographic sort guarantees a point can only be dominated by
    points that precede it, so one forward pass against the kept set suffices.
    """
    indexed = list(points)
    for p in indexed:
        if _is_top(p.resources):
            raise ValueError("the infeasibility sentinel cannot be part of an antichain")
    order = sorted(range(len(indexed)), key=lambda i: indexed[i].key)
    kept: list[LabeledPoint] = []
    for i in order:
        p = indexed[i]
        if not any(leq(q.resources, p.resources) for q in kept):
            kept.append(p)
    # present survivors in their original order
    rank = {id(p): n for n, p in enumerate(indexed)}
    kept.sort(key=lambda p: rank[id(p)])
    return Antichain(kept)


def merge(a: Antichain, b: Antichain) -> Antichain:
    """Minimal elements of the union; elements of ``a`` win exact ties."""
    out = a
    for p in b:
        out = insert_minimal(out, p)
    return out
