"""Geometry and scenario types.

Flat-earth model: positions are (x, y, altitude) in kilometres over a common
ground plane. HAP antenna sectors are abstracted into a single integer
capacity per platform.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

from .errors import ConfigError

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class GeoPoint:
    """A point in km: ground coordinates x, y and altitude above ground."""

    x_km: float
    y_km: float
    alt_km: float

    def __post_init__(self):
        for name in ("x_km", "y_km", "alt_km"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"GeoPoint.{name} must be finite, got {v!r}")
        if self.alt_km < 0:
            raise ValueError(f"GeoPoint.alt_km must be >= 0, got {self.alt_km}")


@dataclass(frozen=True)
class Hap:
    """A high-altitude platform with an integer link capacity."""

    id: int
    pos: GeoPoint
    capacity: int

    def __post_init__(self):
        if self.id < 0:
            raise ValueError(f"Hap.id must be >= 0, got {self.id}")
        if self.capacity < 1:
            raise ValueError(f"Hap.capacity must be >= 1, got {self.capacity}")


@dataclass(frozen=True)
class Uav:
    """A UAV relay node serving `served_users` ground users."""

    id: int
    pos: GeoPoint
    served_users: int

    def __post_init__(self):
        if self.id < 0:
            raise ValueError(f"Uav.id must be >= 0, got {self.id}")
        if self.served_users < 0:
            raise ValueError(
                f"Uav.served_users must be >= 0, got {self.served_users}"
            )


@dataclass(frozen=True)
class Scenario:
    """An immutable snapshot of all platforms and UAVs plus the seed used.

    Both id spaces must be dense, i.e. haps[i].id == i and uavs[j].id == j.
    """

    haps: tuple[Hap, ...]
    uavs: tuple[Uav, ...]
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "haps", tuple(self.haps))
        object.__setattr__(self, "uavs", tuple(self.uavs))
        for i, hap in enumerate(self.haps):
            if hap.id != i:
                raise ValueError(f"hap ids must be dense 0..n-1, index {i} has id {hap.id}")
        for j, uav in enumerate(self.uavs):
            if uav.id != j:
                raise ValueError(f"uav ids must be dense 0..m-1, index {j} has id {uav.id}")
        if not (0 <= self.seed <= MAX_SEED):
            raise ValueError(f"seed must be an unsigned 64-bit int, got {self.seed}")

    @property
    def n_haps(self) -> int:
        return len(self.haps)

    @property
    def m_uavs(self) -> int:
        return len(self.uavs)


def distance_3d(a: GeoPoint, b: GeoPoint) -> float:
    """Euclidean distance in km between two points."""
    return math.hypot(a.x_km - b.x_km, a.y_km - b.y_km, a.alt_km - b.alt_km)


def _require(obj: dict, field: str, where: str) -> Any:
    if field not in obj:
        raise ConfigError(f"scenario file: missing field '{field}' in {where}")
    return obj[field]


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "seed": scenario.seed,
        "haps": [
            {"id": h.id, "x": h.pos.x_km, "y": h.pos.y_km, "alt": h.pos.alt_km,
             "capacity": h.capacity}
            for h in scenario.haps
        ],
        "uavs": [
            {"id": u.id, "x": u.pos.x_km, "y": u.pos.y_km, "alt": u.pos.alt_km,
             "served_users": u.served_users}
            for u in scenario.uavs
        ],
    }


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ConfigError("scenario file: top level must be an object")
    seed = _require(doc, "seed", "top level")
    try:
        haps = []
        for i, entry in enumerate(_require(doc, "haps", "top level")):
            haps.append(Hap(
                id=_require(entry, "id", f"haps[{i}]"),
                pos=GeoPoint(
                    _require(entry, "x", f"haps[{i}]"),
                    _require(entry, "y", f"haps[{i}]"),
                    _require(entry, "alt", f"haps[{i}]"),
                ),
                capacity=_require(entry, "capacity", f"haps[{i}]"),
            ))
        uavs = []
        for j, entry in enumerate(_require(doc, "uavs", "top level")):
            uavs.append(Uav(
                id=_require(entry, "id", f"uavs[{j}]"),
                pos=GeoPoint(
                    _require(entry, "x", f"uavs[{j}]"),
                    _require(entry, "y", f"uavs[{j}]"),
                    _require(entry, "alt", f"uavs[{j}]"),
                ),
                served_users=_require(entry, "served_users", f"uavs[{j}]"),
            ))
        return Scenario(haps=tuple(haps), uavs=tuple(uavs), seed=seed)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"scenario file: {exc}") from exc


def save_scenario(scenario: Scenario, path: str) -> None:
    """Write a scenario as JSON. Floats round-trip exactly."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=2)
        fh.write("\n")


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"scenario file {path}: invalid JSON ({exc})") from exc
    return scenario_from_dict(doc)
