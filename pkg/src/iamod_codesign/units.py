"""Unit strings accepted in scenario files and their SI conversion factors.

Quantities are written as ``"<number> <unit>"`` (for example ``"30 mph"``).
Everything past ingestion works in m, s, J, kg and USD.
"""
from __future__ import annotations

import re

MILE = 1609.344
MPH = MILE / 3600.0
HOUR = 3600.0
DAY = 86400.0
YEAR = 365.25 * DAY
MONTH = YEAR / 12.0

# dimension -> unit -> factor to SI
UNITS: dict[str, dict[str, float]] = {
    "length": {"m": 1.0, "km": 1000.0, "mi": MILE, "mile": MILE, "ft": 0.3048},
    "speed": {"m/s": 1.0, "km/h": 1000.0 / HOUR, "kph": 1000.0 / HOUR, "mph": MPH},
    "time": {"s": 1.0, "min": 60.0, "h": HOUR},
    "rate": {
        "1/s": 1.0, "1/min": 1 / 60.0, "1/h": 1 / HOUR,
        "veh/s": 1.0, "veh/min": 1 / 60.0, "veh/h": 1 / HOUR,
        "req/s": 1.0, "req/min": 1 / 60.0, "req/h": 1 / HOUR,
        "pax/s": 1.0, "pax/min": 1 / 60.0, "pax/h": 1 / HOUR,
    },
    "money": {"USD": 1.0},
    "money_per_length": {"USD/m": 1.0, "USD/km": 1e-3, "USD/mile": 1 / MILE, "USD/mi": 1 / MILE},
    "money_per_year": {"USD/year": 1.0, "USD/yr": 1.0, "USD/month": 12.0},
    "mass_per_year": {"kg/year": 1.0, "t/year": 1000.0, "ton/year": 1000.0, "kg/yr": 1.0, "t/yr": 1000.0},
    "years": {"years": 1.0, "year": 1.0, "yr": 1.0},
    "co2_per_energy": {"kg/J": 1.0, "g/kJ": 1e-6, "g/kWh": 1e-3 / 3.6e6, "kg/kWh": 1 / 3.6e6},
    "energy_per_length": {"J/m": 1.0, "kJ/km": 1.0, "Wh/km": 3.6, "Wh/mi": 3600.0 / MILE, "kWh/100km": 36.0},
    "money_per_mass": {"USD/kg": 1.0, "USD/t": 1e-3, "USD/ton": 1e-3},
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S.*?)\s*$")


class UnitError(ValueError):
    pass


def parse_quantity(value, dimension: str) -> float:
    """Convert a ``"<number> <unit>"`` string of the given dimension to SI."""
    table = UNITS[dimension]
    if isinstance(value, bool) or not isinstance(value, str):
        raise UnitError(
            f"expected a quantity string with a unit ({', '.join(table)}), got {value!r}"
        )
    match = _QUANTITY.match(value)
    if not match:
        raise UnitError(f"cannot parse quantity {value!r}; expected e.g. '12 {next(iter(table))}'")
    number, unit = float(match.group(1)), match.group(2)
    if unit not in table:
        raise UnitError(f"unit {unit!r} is not a {dimension} unit (expected one of {', '.join(table)})")
    return number * table[unit]


def split_quantity(value: str) -> tuple[float, str]:
    match = _QUANTITY.match(value) if isinstance(value, str) else None
    if not match:
        raise UnitError(f"cannot parse quantity {value!r}")
    return float(match.group(1)), match.group(2)


def mps_to_mph(v: float) -> float:
    return v / MPH
