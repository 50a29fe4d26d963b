"""Capacity-constrained two-sided matching between HAPs and UAVs.

The main solver is HAP-proposing deferred acceptance: every HAP works down
its preference list proposing to UAVs; a UAV accepts when free and otherwise
keeps the proposer it ranks higher, releasing the other. This yields the
unique HAP-optimal stable matching. A seeded uniform-random assignment is
provided as a baseline, along with a blocking-pair checker and a brute-force
enumeration of all stable matchings for small instances.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, Sequence

import numpy as np

from .preferences import PreferenceProfile

# brute-force enumeration is exponential; refuse instances above this size
ENUMERATION_MAX_CAPACITY = 8
ENUMERATION_MAX_UAVS = 8

TraceFn = Callable[[str], None]


class BlockingReason(Enum):
    UAV_UNMATCHED = "uav_unmatched"
    UAV_PREFERS = "uav_prefers"
    HAP_HAS_FREE_SLOT = "hap_has_free_slot"
    HAP_PREFERS_OVER_WORST = "hap_prefers_over_worst"


@dataclass(frozen=True)
class BlockingPair:
    """An unmatched (hap, uav) pair where both sides would rather deviate.

    reasons holds the conjunction that makes the pair blocking: the UAV-side
    condition first, the HAP-side condition second.
    """

    hap_id: int
    uav_id: int
    reasons: tuple[BlockingReason, BlockingReason]


@dataclass(frozen=True)
class Matching:
    """A capacity-respecting partial assignment of UAVs to HAPs.

    uav_to_hap[u] is the HAP id serving UAV u, or -1 if u is unmatched.
    """

    uav_to_hap: tuple[int, ...]
    n_haps: int

    def __post_init__(self):
        object.__setattr__(self, "uav_to_hap", tuple(int(h) for h in self.uav_to_hap))
        for u, h in enumerate(self.uav_to_hap):
            if h != -1 and not (0 <= h < self.n_haps):
                raise ValueError(f"uav {u} assigned to unknown hap {h}")

    @property
    def m_uavs(self) -> int:
        return len(self.uav_to_hap)

    @property
    def matched_count(self) -> int:
        return sum(1 for h in self.uav_to_hap if h >= 0)

    @property
    def assignment(self) -> dict[int, int]:
        """Partial map UAV id -> HAP id (unmatched UAVs absent)."""
        return {u: h for u, h in enumerate(self.uav_to_hap) if h >= 0}

    def pairs(self) -> Iterator[tuple[int, int]]:
        """Matched (hap_id, uav_id) pairs in ascending UAV id order."""
        for u, h in enumerate(self.uav_to_hap):
            if h >= 0:
                yield h, u

    def loads(self) -> tuple[int, ...]:
        """Number of UAVs assigned to each HAP."""
        counts = [0] * self.n_haps
        for h in self.uav_to_hap:
            if h >= 0:
                counts[h] += 1
        return tuple(counts)


def _check_capacities(capacities: Sequence[int], n_haps: int) -> list[int]:
    caps = [int(c) for c in capacities]
    if len(caps) != n_haps:
        raise ValueError(
            f"capacities length {len(caps)} does not match {n_haps} HAPs"
        )
    if any(c < 1 for c in caps):
        raise ValueError("every capacity must be >= 1")
    return caps


def gale_shapley(profile: PreferenceProfile, capacities: Sequence[int],
                 on_event: TraceFn | None = None) -> Matching:
    """HAP-proposing deferred acceptance under per-HAP capacities.

    HAPs enter a FIFO queue in ascending id order and issue one proposal per
    activation, working down their lists. A proposed UAV accepts if free;
    otherwise it compares the proposer against its current HAP and keeps the
    one it ranks higher. A HAP that still has a free slot and untried UAVs
    re-enters the queue. The schedule does not affect the result: deferred
    acceptance with complete strict lists always ends in the HAP-optimal
    stable matching of size min(total capacity, number of UAVs).

    Args:
        profile: complete strict preference lists for both sides
        capacities: per-HAP slot counts, aligned with HAP ids
        on_event: optional trace callback; receives lines of the form
            "PROPOSE h u", "ACCEPT h u", "REJECT h u", "SWAP u h_old h_new"

    Raises:
        ValueError: on a malformed profile or misaligned capacities.
    """
    profile.validate()
    n, m = profile.n_haps, profile.m_uavs
    caps = _check_capacities(capacities, n)

    # plain lists keep the inner loop cheap at scale
    prefs = [row.tolist() for row in profile.hap_prefs]
    uav_rank = _invert_rows(profile.uav_prefs).tolist()

    uav_to_hap = [-1] * m
    load = [0] * n
    next_idx = [0] * n
    queue = deque(range(n))
    in_queue = [True] * n

    while queue:
        h = queue.popleft()
        in_queue[h] = False
        if load[h] >= caps[h] or next_idx[h] >= m:
            continue
        u = prefs[h][next_idx[h]]
        next_idx[h] += 1
        if on_event is not None:
            on_event(f"PROPOSE {h} {u}")
        current = uav_to_hap[u]
        if current == -1:
            uav_to_hap[u] = h
            load[h] += 1
            if on_event is not None:
                on_event(f"ACCEPT {h} {u}")
        elif uav_rank[u][h] < uav_rank[u][current]:
            uav_to_hap[u] = h
            load[h] += 1
            load[current] -= 1
            if on_event is not None:
                on_event(f"SWAP {u} {current} {h}")
            if not in_queue[current] and next_idx[current] < m:
                queue.append(current)
                in_queue[current] = True
        else:
            if on_event is not None:
                on_event(f"REJECT {h} {u}")
        if load[h] < caps[h] and next_idx[h] < m and not in_queue[h]:
            queue.append(h)
            in_queue[h] = True

    return Matching(uav_to_hap=tuple(uav_to_hap), n_haps=n)


def random_matching(rng: np.random.Generator, n_haps: int,
                    capacities: Sequence[int], m_uavs: int) -> Matching:
    """Assign UAVs to HAPs uniformly at random, respecting capacities.

    UAVs are visited in a seed-determined uniform shuffle; each is assigned
    to a HAP drawn uniformly from those with remaining capacity. When total
    capacity runs out the rest stay unmatched, so the matching has size
    min(total capacity, m_uavs).
    """
    caps = _check_capacities(capacities, n_haps)
    remaining = list(caps)
    available = list(range(n_haps))
    uav_to_hap = [-1] * m_uavs
    order = rng.permutation(m_uavs)
    for u in order:
        if not available:
            break
        k = int(rng.integers(len(available)))
        h = available[k]
        uav_to_hap[u] = h
        remaining[h] -= 1
        if remaining[h] == 0:
            # swap-pop keeps the draw a single uniform index
            available[k] = available[-1]
            available.pop()
    return Matching(uav_to_hap=tuple(uav_to_hap), n_haps=n_haps)


def _invert_rows(perm_table: np.ndarray) -> np.ndarray:
    """Rank lookup from preference rows: out[i, x] = position of x in row i."""
    rows, width = perm_table.shape
    out = np.empty_like(perm_table)
    out[np.arange(rows)[:, None], perm_table] = np.arange(width)[None, :]
    return out


def _blocking_mask(matching: Matching, profile: PreferenceProfile,
                   capacities: Sequence[int]) -> np.ndarray:
    """Boolean (n, m) mask marking every blocking pair."""
    n, m = profile.n_haps, profile.m_uavs
    caps = np.asarray(list(capacities), dtype=np.int64)
    assigned = np.asarray(matching.uav_to_hap, dtype=np.int64)

    hap_rank = _invert_rows(profile.hap_prefs)
    uav_rank = _invert_rows(profile.uav_prefs)

    # UAV side: unmatched UAVs accept anyone, matched ones anyone strictly
    # better than their current HAP
    uav_threshold = np.full(m, n, dtype=np.int64)
    matched = assigned >= 0
    uav_threshold[matched] = uav_rank[np.flatnonzero(matched), assigned[matched]]
    wants = uav_rank.T < uav_threshold[None, :]

    # HAP side: free slot accepts anyone, full HAPs anyone strictly better
    # than their worst assigned UAV
    loads = np.zeros(n, dtype=np.int64)
    np.add.at(loads, assigned[matched], 1)
    hap_threshold = np.full(n, m, dtype=np.int64)
    for h in range(n):
        if loads[h] >= caps[h]:
            assignees = np.flatnonzero(assigned == h)
            hap_threshold[h] = hap_rank[h, assignees].max()
    accepts = hap_rank < hap_threshold[:, None]

    return wants & accepts


def find_blocking_pairs(matching: Matching, profile: PreferenceProfile,
                        capacities: Sequence[int]) -> list[BlockingPair]:
    """List every blocking pair of a matching, in (hap, uav) id order.

    A pair (h, u) not matched together blocks when both hold:
      (a) u is unmatched, or prefers h to its current HAP;
      (b) h has a free slot, or prefers u to the worst UAV it serves.
    An empty list means the matching is stable.
    """
    mask = _blocking_mask(matching, profile, capacities)
    if not mask.any():
        return []
    caps = list(capacities)
    assigned = matching.uav_to_hap
    loads = matching.loads()
    out = []
    for h, u in np.argwhere(mask):
        h, u = int(h), int(u)
        uav_side = (BlockingReason.UAV_UNMATCHED if assigned[u] == -1
                    else BlockingReason.UAV_PREFERS)
        hap_side = (BlockingReason.HAP_HAS_FREE_SLOT if loads[h] < caps[h]
                    else BlockingReason.HAP_PREFERS_OVER_WORST)
        out.append(BlockingPair(hap_id=h, uav_id=u, reasons=(uav_side, hap_side)))
    return out


def is_stable(matching: Matching, profile: PreferenceProfile,
              capacities: Sequence[int]) -> bool:
    """True iff the matching admits no blocking pair."""
    return not _blocking_mask(matching, profile, capacities).any()


def enumerate_stable_matchings(profile: PreferenceProfile,
                               capacities: Sequence[int]) -> list[Matching]:
    """All stable matchings of a small instance, by exhaustive search.

    Generates every capacity-respecting assignment of size
    min(total capacity, m_uavs) and keeps those without blocking pairs.
    Exponential by nature, so instances with total capacity above
    ENUMERATION_MAX_CAPACITY or more than ENUMERATION_MAX_UAVS UAVs are
    rejected.

    Raises:
        ValueError: if the instance exceeds the enumeration size guard.
    """
    profile.validate()
    n, m = profile.n_haps, profile.m_uavs
    caps = _check_capacities(capacities, n)
    total_cap = sum(caps)
    if total_cap > ENUMERATION_MAX_CAPACITY or m > ENUMERATION_MAX_UAVS:
        raise ValueError(
            f"instance too large to enumerate: total capacity {total_cap} "
            f"(max {ENUMERATION_MAX_CAPACITY}), {m} UAVs "
            f"(max {ENUMERATION_MAX_UAVS})"
        )
    target = min(total_cap, m)
    remaining = list(caps)
    assignment = [-1] * m
    stable: list[Matching] = []

    def extend(u: int, matched: int) -> None:
        if matched + (m - u) < target:
            return
        if u == m:
            if matched == target:
                candidate = Matching(uav_to_hap=tuple(assignment), n_haps=n)
                if is_stable(candidate, profile, caps):
                    stable.append(candidate)
            return
        for h in range(n):
            if remaining[h] > 0:
                remaining[h] -= 1
                assignment[u] = h
                extend(u + 1, matched + 1)
                assignment[u] = -1
                remaining[h] += 1
        if matched + (m - u - 1) >= target:
            extend(u + 1, matched)

    extend(0, 0)
    return stable
