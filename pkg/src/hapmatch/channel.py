"""Air-to-air link budget between HAPs and UAVs.

Total loss on a link is assembled from three parts, all in dB:

    PL = PL_b + PL_g + PL_s

where PL_b = FSPL(d, f_c) + SF + CL is the basic path loss (free-space term,
lognormal shadow fading, clutter loss), PL_g is the atmospheric absorption
loss and PL_s the scintillation loss. FSPL uses the km/GHz form

    FSPL(d, f) = 92.45 + 20 log10(f) + 20 log10(d).

The links considered here sit at high elevation angles, where scintillation
is negligible and absorption is flat, so PL_g and PL_s are plain constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geo import Scenario

FSPL_CONST_DB = 92.45

DEFAULT_CARRIER_FREQ_GHZ = 2.0
DEFAULT_ATMOSPHERIC_LOSS_DB = 23.0
DEFAULT_SCINTILLATION_LOSS_DB = 0.0
DEFAULT_CLUTTER_LOSS_DB = 25.5
DEFAULT_SHADOW_FADING_VARIANCE_DB2 = 6.0


@dataclass(frozen=True)
class ChannelParams:
    """Constants of the link-budget model.

    shadow_fading_variance_db2 is the variance of the zero-mean Gaussian
    shadow-fading term in dB^2. elevation_angle_deg is retained to record
    which table row the constants were taken from; it does not enter the
    loss computation.
    """

    carrier_freq_ghz: float = DEFAULT_CARRIER_FREQ_GHZ
    atmospheric_loss_db: float = DEFAULT_ATMOSPHERIC_LOSS_DB
    scintillation_loss_db: float = DEFAULT_SCINTILLATION_LOSS_DB
    clutter_loss_db: float = DEFAULT_CLUTTER_LOSS_DB
    shadow_fading_variance_db2: float = DEFAULT_SHADOW_FADING_VARIANCE_DB2
    elevation_angle_deg: float = 90.0

    def __post_init__(self):
        if self.carrier_freq_ghz <= 0:
            raise ValueError(
                f"carrier_freq_ghz must be > 0, got {self.carrier_freq_ghz}"
            )
        if self.shadow_fading_variance_db2 < 0:
            raise ValueError(
                "shadow_fading_variance_db2 must be >= 0, got "
                f"{self.shadow_fading_variance_db2}"
            )


@dataclass(frozen=True)
class PathLossMatrix:
    """Dense HAP x UAV matrix of total link loss in dB, plus the params used.

    loss_db[h, u] is the total loss between HAP h and UAV u. The array is
    frozen after construction.
    """

    loss_db: np.ndarray
    params: ChannelParams

    def __post_init__(self):
        arr = np.array(self.loss_db, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"loss_db must be 2-dimensional, got shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "loss_db", arr)

    @property
    def n_haps(self) -> int:
        return self.loss_db.shape[0]

    @property
    def m_uavs(self) -> int:
        return self.loss_db.shape[1]


def fspl(distance_km: float, freq_ghz: float) -> float:
    """Free-space path loss in dB for a distance in km and frequency in GHz.

    Args:
        distance_km: link distance (> 0)
        freq_ghz: carrier frequency (> 0)
    """
    if distance_km <= 0:
        raise ValueError(f"distance_km must be > 0, got {distance_km}")
    if freq_ghz <= 0:
        raise ValueError(f"freq_ghz must be > 0, got {freq_ghz}")
    return FSPL_CONST_DB + 20.0 * math.log10(freq_ghz) + 20.0 * math.log10(distance_km)


def basic_path_loss(distance_km: float, freq_ghz: float,
                    shadow_fading_db: float, clutter_loss_db: float) -> float:
    """Basic path loss PL_b = FSPL + SF + CL in dB."""
    return fspl(distance_km, freq_ghz) + shadow_fading_db + clutter_loss_db


def total_path_loss(basic_loss_db: float, atmospheric_loss_db: float,
                    scintillation_loss_db: float) -> float:
    """Total path loss PL = PL_b + PL_g + PL_s in dB."""
    return basic_loss_db + atmospheric_loss_db + scintillation_loss_db


def sample_shadow_fading(rng: np.random.Generator, variance_db2: float) -> float:
    """Draw one shadow-fading value in dB: N(0, variance_db2).

    Consumes exactly one draw from `rng`. A variance of zero yields exactly
    0.0.
    """
    if variance_db2 < 0:
        raise ValueError(f"variance_db2 must be >= 0, got {variance_db2}")
    return float(rng.normal(0.0, math.sqrt(variance_db2)))


def build_path_loss_matrix(scenario: Scenario, params: ChannelParams,
                           rng: np.random.Generator) -> PathLossMatrix:
    """Compute the total-loss matrix for every HAP-UAV link in a scenario.

    Shadow fading is drawn independently per link, in row-major order (all
    links of HAP 0 in UAV id order, then HAP 1, ...). With the same rng state
    the same matrix is produced bit for bit.

    Args:
        scenario: platform and UAV positions
        params: link-budget constants
        rng: source for the shadow-fading draws

    Raises:
        ValueError: if any HAP and UAV are coincident (zero distance).
    """
    hap_pos = np.array(
        [[h.pos.x_km, h.pos.y_km, h.pos.alt_km] for h in scenario.haps]
    )
    uav_pos = np.array(
        [[u.pos.x_km, u.pos.y_km, u.pos.alt_km] for u in scenario.uavs]
    )
    diff = hap_pos[:, None, :] - uav_pos[None, :, :]
    dist_km = np.sqrt(np.sum(diff * diff, axis=2))
    if np.any(dist_km <= 0.0):
        h, u = np.argwhere(dist_km <= 0.0)[0]
        raise ValueError(
            f"hap {h} and uav {u} are coincident; link distance must be > 0"
        )
    sigma = math.sqrt(params.shadow_fading_variance_db2)
    # one draw per link, numpy fills C-order which matches the documented
    # h-then-u order
    sf = rng.normal(0.0, sigma, size=dist_km.shape)
    fspl_db = (FSPL_CONST_DB
               + 20.0 * np.log10(params.carrier_freq_ghz)
               + 20.0 * np.log10(dist_km))
    loss = (fspl_db + sf + params.clutter_loss_db
            + params.atmospheric_loss_db + params.scintillation_loss_db)
    return PathLossMatrix(loss_db=loss, params=params)
