import numpy as np
import pytest

from hapmatch.matching import (
    BlockingReason,
    Matching,
    enumerate_stable_matchings,
    find_blocking_pairs,
    gale_shapley,
    is_stable,
    random_matching,
)
from hapmatch.preferences import PreferenceProfile, build_preferences


def profile_from_lists(hap_prefs, uav_prefs) -> PreferenceProfile:
    return PreferenceProfile(hap_prefs=np.array(hap_prefs),
                             uav_prefs=np.array(uav_prefs),
                             user_weight_db_per_user=1.0)


def random_instance(rng, max_haps=8, max_uavs=12, max_cap=3):
    """A random complete-preferences instance built through the real pipeline."""
    n = int(rng.integers(1, max_haps + 1))
    m = int(rng.integers(1, max_uavs + 1))
    loss = rng.uniform(80.0, 180.0, size=(n, m))
    users = rng.integers(0, 10, size=m)
    profile = build_preferences(loss, users, 1.0)
    caps = [int(c) for c in rng.integers(1, max_cap + 1, size=n)]
    return profile, caps


# the contested 2x2 instance: both HAPs want u0 first, u0 prefers h1
CONTESTED_2X2 = profile_from_lists([[0, 1], [0, 1]], [[1, 0], [0, 1]])

# 3x3 cyclic instance: hap i's list starts at uav i; uav j ranks hap j last.
# It has several stable matchings, so it separates the solver's optimality
# guarantee from mere stability.
CYCLIC_3X3 = profile_from_lists(
    [[0, 1, 2], [1, 2, 0], [2, 0, 1]],
    [[1, 2, 0], [2, 0, 1], [0, 1, 2]],
)


class TestGaleShapley:
    def test_single_pair(self):
        profile = profile_from_lists([[0]], [[0]])
        assert gale_shapley(profile, [1]).uav_to_hap == (0,)

    def test_capacity_two_takes_both(self):
        profile = profile_from_lists([[0, 1]], [[0], [0]])
        matching = gale_shapley(profile, [2])
        assert matching.uav_to_hap == (0, 0)
        assert matching.loads() == (2,)

    def test_contested_instance_resolves_by_uav_preference(self):
        matching = gale_shapley(CONTESTED_2X2, [1, 1])
        assert matching.uav_to_hap == (1, 0)

    def test_contested_instance_matches_enumeration(self):
        stable = enumerate_stable_matchings(CONTESTED_2X2, [1, 1])
        assert [s.uav_to_hap for s in stable] == [(1, 0)]

    def test_cyclic_instance_gives_every_hap_its_top_choice(self):
        matching = gale_shapley(CYCLIC_3X3, [1, 1, 1])
        assert matching.uav_to_hap == (0, 1, 2)

    def test_cyclic_instance_has_multiple_stable_matchings(self):
        stable = enumerate_stable_matchings(CYCLIC_3X3, [1, 1, 1])
        assert len(stable) == 3
        assert Matching(uav_to_hap=(0, 1, 2), n_haps=3) in stable

    def test_matching_size_is_min_capacity_uavs(self):
        rng = np.random.default_rng(200)
        for _ in range(100):
            profile, caps = random_instance(rng)
            matching = gale_shapley(profile, caps)
            assert matching.matched_count == min(sum(caps), profile.m_uavs)

    def test_stability_on_random_instances(self):
        rng = np.random.default_rng(201)
        for _ in range(150):
            profile, caps = random_instance(rng)
            matching = gale_shapley(profile, caps)
            assert find_blocking_pairs(matching, profile, caps) == []

    def test_loads_never_exceed_capacity(self):
        rng = np.random.default_rng(202)
        for _ in range(100):
            profile, caps = random_instance(rng)
            matching = gale_shapley(profile, caps)
            assert all(load <= cap for load, cap in zip(matching.loads(), caps))

    def test_rejects_misaligned_capacities(self):
        with pytest.raises(ValueError):
            gale_shapley(CONTESTED_2X2, [1])
        with pytest.raises(ValueError):
            gale_shapley(CONTESTED_2X2, [1, 0])

    def test_rejects_non_permutation_profile(self):
        bad = profile_from_lists([[0, 0], [0, 1]], [[1, 0], [0, 1]])
        with pytest.raises(ValueError):
            gale_shapley(bad, [1, 1])


class TestTrace:
    def test_contested_instance_event_log(self):
        events = []
        gale_shapley(CONTESTED_2X2, [1, 1], on_event=events.append)
        assert events == [
            "PROPOSE 0 0",
            "ACCEPT 0 0",
            "PROPOSE 1 0",
            "SWAP 0 0 1",
            "PROPOSE 0 1",
            "ACCEPT 0 1",
        ]

    def test_proposal_count_bounded_by_n_times_m(self):
        rng = np.random.default_rng(203)
        for _ in range(50):
            profile, caps = random_instance(rng)
            events = []
            gale_shapley(profile, caps, on_event=events.append)
            proposals = sum(1 for e in events if e.startswith("PROPOSE"))
            assert proposals <= profile.n_haps * profile.m_uavs

    def test_replayed_events_respect_capacity_throughout(self):
        rng = np.random.default_rng(204)
        for _ in range(30):
            profile, caps = random_instance(rng)
            events = []
            final = gale_shapley(profile, caps, on_event=events.append)
            load = [0] * profile.n_haps
            holder = [-1] * profile.m_uavs
            for event in events:
                parts = event.split()
                if parts[0] == "ACCEPT":
                    h, u = int(parts[1]), int(parts[2])
                    load[h] += 1
                    holder[u] = h
                elif parts[0] == "SWAP":
                    u, old, new = (int(p) for p in parts[1:])
                    assert holder[u] == old
                    load[old] -= 1
                    load[new] += 1
                    holder[u] = new
                assert all(l <= c for l, c in zip(load, caps))
            assert tuple(holder) == final.uav_to_hap


class TestRandomMatching:
    def test_respects_capacities_and_size(self):
        rng_instances = np.random.default_rng(205)
        for _ in range(100):
            profile, caps = random_instance(rng_instances)
            matching = random_matching(np.random.default_rng(50), profile.n_haps,
                                       caps, profile.m_uavs)
            assert all(l <= c for l, c in zip(matching.loads(), caps))
            assert matching.matched_count == min(sum(caps), profile.m_uavs)

    def test_deterministic_given_seed(self):
        a = random_matching(np.random.default_rng(60), 5, [2] * 5, 12)
        b = random_matching(np.random.default_rng(60), 5, [2] * 5, 12)
        assert a == b

    def test_different_seeds_usually_differ(self):
        base = random_matching(np.random.default_rng(61), 6, [2] * 6, 12)
        assert any(
            random_matching(np.random.default_rng(s), 6, [2] * 6, 12) != base
            for s in range(62, 70)
        )


class TestBlockingPairs:
    def test_empty_matching_blocks_everywhere(self):
        empty = Matching(uav_to_hap=(-1, -1), n_haps=2)
        pairs = find_blocking_pairs(empty, CONTESTED_2X2, [1, 1])
        assert [(p.hap_id, p.uav_id) for p in pairs] == [(0, 0), (0, 1),
                                                         (1, 0), (1, 1)]
        for pair in pairs:
            assert pair.reasons == (BlockingReason.UAV_UNMATCHED,
                                    BlockingReason.HAP_HAS_FREE_SLOT)

    def test_misassigned_full_matching_reports_the_swap(self):
        # u0 with h0 and u1 with h1: u0 and h1 both prefer each other
        wrong = Matching(uav_to_hap=(0, 1), n_haps=2)
        pairs = find_blocking_pairs(wrong, CONTESTED_2X2, [1, 1])
        assert [(p.hap_id, p.uav_id) for p in pairs] == [(1, 0)]
        assert pairs[0].reasons == (BlockingReason.UAV_PREFERS,
                                    BlockingReason.HAP_PREFERS_OVER_WORST)

    def test_free_slot_reason(self):
        profile = profile_from_lists([[0, 1]], [[0], [0]])
        half = Matching(uav_to_hap=(0, -1), n_haps=1)
        pairs = find_blocking_pairs(half, profile, [2])
        assert [(p.hap_id, p.uav_id) for p in pairs] == [(0, 1)]
        assert pairs[0].reasons == (BlockingReason.UAV_UNMATCHED,
                                    BlockingReason.HAP_HAS_FREE_SLOT)

    def test_stable_matching_has_no_pairs(self):
        matching = gale_shapley(CYCLIC_3X3, [1, 1, 1])
        assert find_blocking_pairs(matching, CYCLIC_3X3, [1, 1, 1]) == []
        assert is_stable(matching, CYCLIC_3X3, [1, 1, 1])


def hap_slotwise_at_least_as_good(profile, mine: Matching, other: Matching) -> bool:
    """True if every HAP weakly prefers its slots in `mine`, slot by slot."""
    hap_rank = {h: {int(u): r for r, u in enumerate(profile.hap_prefs[h])}
                for h in range(profile.n_haps)}
    for h in range(profile.n_haps):
        mine_ranks = sorted(hap_rank[h][u] for u, a in enumerate(mine.uav_to_hap)
                            if a == h)
        other_ranks = sorted(hap_rank[h][u] for u, a in enumerate(other.uav_to_hap)
                             if a == h)
        if len(mine_ranks) != len(other_ranks):
            return False
        if any(r_mine > r_other
               for r_mine, r_other in zip(mine_ranks, other_ranks)):
            return False
    return True


class TestEnumeration:
    def test_guard_rejects_large_instances(self):
        rng = np.random.default_rng(206)
        loss = rng.uniform(80.0, 180.0, size=(3, 9))
        profile = build_preferences(loss, [0] * 9, 1.0)
        with pytest.raises(ValueError, match="too large"):
            enumerate_stable_matchings(profile, [3, 3, 3])
        loss = rng.uniform(80.0, 180.0, size=(3, 4))
        profile = build_preferences(loss, [0] * 4, 1.0)
        with pytest.raises(ValueError, match="too large"):
            enumerate_stable_matchings(profile, [3, 3, 3])

    def test_solver_output_is_stable_and_hap_optimal(self):
        rng = np.random.default_rng(207)
        for _ in range(40):
            n = int(rng.integers(1, 5))
            m = int(rng.integers(1, 9))
            caps = [int(c) for c in rng.integers(1, 3, size=n)]
            loss = rng.uniform(80.0, 180.0, size=(n, m))
            users = rng.integers(0, 10, size=m)
            profile = build_preferences(loss, users, 1.0)
            solved = gale_shapley(profile, caps)
            stable = enumerate_stable_matchings(profile, caps)
            assert solved in stable
            assert all(hap_slotwise_at_least_as_good(profile, solved, other)
                       for other in stable)

    def test_every_enumerated_matching_is_stable_and_sized(self):
        rng = np.random.default_rng(208)
        for _ in range(20):
            n = int(rng.integers(1, 4))
            m = int(rng.integers(1, 7))
            caps = [int(c) for c in rng.integers(1, 3, size=n)]
            loss = rng.uniform(80.0, 180.0, size=(n, m))
            profile = build_preferences(loss, [0] * m, 1.0)
            target = min(sum(caps), m)
            for matching in enumerate_stable_matchings(profile, caps):
                assert matching.matched_count == target
                assert find_blocking_pairs(matching, profile, caps) == []


class TestMatchingType:
    def test_assignment_map_skips_unmatched(self):
        matching = Matching(uav_to_hap=(2, -1, 0), n_haps=3)
        assert matching.assignment == {0: 2, 2: 0}
        assert matching.matched_count == 2
        assert list(matching.pairs()) == [(2, 0), (0, 2)]
        assert matching.loads() == (1, 0, 1)

    def test_rejects_out_of_range_hap(self):
        with pytest.raises(ValueError):
            Matching(uav_to_hap=(3,), n_haps=3)
        with pytest.raises(ValueError):
            Matching(uav_to_hap=(-2,), n_haps=3)
