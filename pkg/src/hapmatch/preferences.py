"""Preference lists and match scoring.

Both sides rank the other side by link quality. A HAP additionally discounts
UAVs that already serve many ground users: its ranking key is

    key(h, u) = loss_db(h, u) - w * served_users(u)

with w in dB per user. Lower keys are better. UAVs rank HAPs by raw loss.
The same key doubles as the per-match score, so the mean score of a matching
measures how good the accepted links are (lower is better).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence, Union

import numpy as np

from .channel import PathLossMatrix

if TYPE_CHECKING:
    from .matching import Matching

DEFAULT_USER_WEIGHT_DB_PER_USER = 1.0


@dataclass(frozen=True)
class PreferenceProfile:
    """Complete strict preference lists for both sides.

    hap_prefs[h] lists all UAV ids, best first; uav_prefs[u] lists all HAP
    ids, best first. Each row is a permutation of the opposite side's ids.
    """

    hap_prefs: np.ndarray
    uav_prefs: np.ndarray
    user_weight_db_per_user: float

    def __post_init__(self):
        hp = np.array(self.hap_prefs, dtype=np.int64)
        up = np.array(self.uav_prefs, dtype=np.int64)
        if hp.ndim != 2 or up.ndim != 2:
            raise ValueError("preference tables must be 2-dimensional")
        if hp.shape[0] != up.shape[1] or hp.shape[1] != up.shape[0]:
            raise ValueError(
                f"inconsistent table shapes {hp.shape} and {up.shape}"
            )
        hp.flags.writeable = False
        up.flags.writeable = False
        object.__setattr__(self, "hap_prefs", hp)
        object.__setattr__(self, "uav_prefs", up)

    @property
    def n_haps(self) -> int:
        return self.hap_prefs.shape[0]

    @property
    def m_uavs(self) -> int:
        return self.uav_prefs.shape[0]

    def validate(self) -> None:
        """Check that every row is a permutation of the opposite side."""
        for name, table, size in (("hap_prefs", self.hap_prefs, self.m_uavs),
                                  ("uav_prefs", self.uav_prefs, self.n_haps)):
            expected = np.arange(size)
            for i, row in enumerate(table):
                if not np.array_equal(np.sort(row), expected):
                    raise ValueError(f"{name}[{i}] is not a permutation of 0..{size - 1}")


@dataclass(frozen=True)
class ScoreReport:
    """Per-match scores of a matching under one loss matrix."""

    per_match_scores: tuple[float, ...]
    mean_score: float | None
    matched_count: int
    unmatched_uavs: tuple[int, ...]


def hap_preference_key(loss_db: float, served_users: int,
                       user_weight_db_per_user: float) -> float:
    """Ranking key a HAP assigns to a UAV; lower is better."""
    return loss_db - user_weight_db_per_user * served_users


def _as_loss_array(matrix: Union[PathLossMatrix, np.ndarray]) -> np.ndarray:
    if isinstance(matrix, PathLossMatrix):
        return matrix.loss_db
    return np.asarray(matrix, dtype=float)


def build_preferences(matrix: Union[PathLossMatrix, np.ndarray],
                      served_users: Sequence[int],
                      user_weight_db_per_user: float = DEFAULT_USER_WEIGHT_DB_PER_USER,
                      ) -> PreferenceProfile:
    """Derive both sides' preference lists from a loss matrix.

    HAP h ranks UAVs by ascending hap_preference_key; UAV u ranks HAPs by
    ascending loss. Key ties are broken by ascending id of the ranked side,
    so all lists are strict.

    Args:
        matrix: PathLossMatrix or plain (n_haps, m_uavs) loss array in dB
        served_users: users served per UAV, aligned with UAV ids
        user_weight_db_per_user: discount per served user in the HAP key
    """
    loss = _as_loss_array(matrix)
    users = np.asarray(served_users, dtype=float)
    if users.ndim != 1 or users.shape[0] != loss.shape[1]:
        raise ValueError(
            f"served_users length {users.shape} does not match "
            f"{loss.shape[1]} UAVs"
        )
    keys = loss - user_weight_db_per_user * users[None, :]
    # stable sort keeps equal keys in ascending-id order
    hap_prefs = np.argsort(keys, axis=1, kind="stable")
    uav_prefs = np.argsort(loss.T, axis=1, kind="stable")
    return PreferenceProfile(hap_prefs=hap_prefs, uav_prefs=uav_prefs,
                             user_weight_db_per_user=user_weight_db_per_user)


def score_matching(matching: "Matching", matrix: Union[PathLossMatrix, np.ndarray],
                   served_users: Sequence[int],
                   user_weight_db_per_user: float = DEFAULT_USER_WEIGHT_DB_PER_USER,
                   ) -> ScoreReport:
    """Score a matching: per-match preference keys and their mean.

    UAVs are visited in ascending id order. The mean is over matched pairs
    only; an empty matching has no mean.
    """
    loss = _as_loss_array(matrix)
    users = np.asarray(served_users, dtype=float)
    scores = []
    unmatched = []
    for u, h in enumerate(matching.uav_to_hap):
        if h < 0:
            unmatched.append(u)
            continue
        scores.append(hap_preference_key(float(loss[h, u]), users[u],
                                         user_weight_db_per_user))
    mean = sum(scores) / len(scores) if scores else None
    return ScoreReport(per_match_scores=tuple(scores), mean_score=mean,
                       matched_count=len(scores), unmatched_uavs=tuple(unmatched))
