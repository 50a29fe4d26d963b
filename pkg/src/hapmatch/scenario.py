"""Random scenario generation.

Platforms and UAVs are placed uniformly over a square service area, with
altitudes and served-user counts drawn uniformly from configured ranges.
Given the same config (seed included) the generator reproduces the same
scenario exactly: agents are drawn by ascending id, HAPs before UAVs, and
each agent's fields in declaration order (x, y, altitude, then users for
UAVs).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .geo import MAX_SEED, GeoPoint, Hap, Scenario, Uav

DEFAULT_AREA_SIDE_KM = 100.0
DEFAULT_HAP_ALT_RANGE_KM = (18.0, 22.0)
DEFAULT_UAV_ALT_RANGE_KM = (0.05, 0.35)
DEFAULT_USERS_RANGE = (1, 10)
DEFAULT_HAP_CAPACITY = 5


@dataclass(frozen=True)
class ScenarioConfig:
    """Parameters of the random topology generator.

    Ranges are closed intervals. users_range is in whole users; the
    remaining ranges are in km.
    """

    n_haps: int
    m_uavs: int
    hap_capacity: int = DEFAULT_HAP_CAPACITY
    area_side_km: float = DEFAULT_AREA_SIDE_KM
    hap_alt_range_km: tuple[float, float] = DEFAULT_HAP_ALT_RANGE_KM
    uav_alt_range_km: tuple[float, float] = DEFAULT_UAV_ALT_RANGE_KM
    users_range: tuple[int, int] = DEFAULT_USERS_RANGE
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hap_alt_range_km", tuple(self.hap_alt_range_km))
        object.__setattr__(self, "uav_alt_range_km", tuple(self.uav_alt_range_km))
        object.__setattr__(self, "users_range", tuple(self.users_range))
        bad = []
        if self.n_haps < 1:
            bad.append(f"n_haps must be >= 1, got {self.n_haps}")
        if self.m_uavs < 1:
            bad.append(f"m_uavs must be >= 1, got {self.m_uavs}")
        if self.hap_capacity < 1:
            bad.append(f"hap_capacity must be >= 1, got {self.hap_capacity}")
        if not self.area_side_km > 0:
            bad.append(f"area_side_km must be > 0, got {self.area_side_km}")
        for name, rng_ in (("hap_alt_range_km", self.hap_alt_range_km),
                           ("uav_alt_range_km", self.uav_alt_range_km),
                           ("users_range", self.users_range)):
            if len(rng_) != 2 or rng_[0] > rng_[1]:
                bad.append(f"{name} must be (lo, hi) with lo <= hi, got {rng_}")
        if len(self.hap_alt_range_km) == 2 and self.hap_alt_range_km[0] < 0:
            bad.append("hap_alt_range_km low bound must be >= 0")
        if len(self.uav_alt_range_km) == 2 and self.uav_alt_range_km[0] < 0:
            bad.append("uav_alt_range_km low bound must be >= 0")
        if len(self.users_range) == 2 and self.users_range[0] < 0:
            bad.append("users_range low bound must be >= 0")
        if not (0 <= self.seed <= MAX_SEED):
            bad.append(f"seed must be an unsigned 64-bit int, got {self.seed}")
        if bad:
            raise ConfigError("invalid scenario config: " + "; ".join(bad))


def generate_scenario(config: ScenarioConfig) -> Scenario:
    """Draw a random scenario from a config.

    The draw order is fixed (HAPs by id then UAVs by id, fields in
    declaration order), so the output is a pure function of the config.
    """
    rng = np.random.default_rng(config.seed)
    area = config.area_side_km
    haps = []
    for i in range(config.n_haps):
        x = rng.uniform(0.0, area)
        y = rng.uniform(0.0, area)
        alt = rng.uniform(*config.hap_alt_range_km)
        haps.append(Hap(id=i, pos=GeoPoint(x, y, alt), capacity=config.hap_capacity))
    uavs = []
    lo_users, hi_users = config.users_range
    for j in range(config.m_uavs):
        x = rng.uniform(0.0, area)
        y = rng.uniform(0.0, area)
        alt = rng.uniform(*config.uav_alt_range_km)
        users = int(rng.integers(lo_users, hi_users + 1))
        uavs.append(Uav(id=j, pos=GeoPoint(x, y, alt), served_users=users))
    return Scenario(haps=tuple(haps), uavs=tuple(uavs), seed=config.seed)
