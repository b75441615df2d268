"""Landscape: range derivation branches, binning, queries, merge,
serialization, and the distribution invariants."""

from __future__ import annotations

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bidscape.auction_log import AuctionSnapshot, GroupingKey, ParticipantRecord
from bidscape.errors import (
    CostUndefinedError,
    EmptyLandscapeError,
    SchemaError,
    ValidationError,
)
from bidscape.landscape import (
    BidLandscape,
    RangeObservation,
    bin_index,
    build_landscape,
    build_landscapes,
    derive_ecpm_ranges,
    dumps_landscape,
    group_observations,
    landscape_from_dict,
    landscape_to_dict,
    loads_landscape,
    merge_landscapes,
    query_cost,
    query_winrate,
    read_ranges,
    win_range_observations,
    write_ranges,
)

from conftest import reference_observations


class TestBinIndex:
    def test_exact_multiples_stay_in_their_bin(self):
        # raw IEEE division would put 0.03 in bin 2
        assert bin_index(0.03, 0.01) == 3
        assert bin_index(0.05, 0.01) == 5
        for k in range(1, 2000):
            assert bin_index(k * 0.01, 0.01) == k

    def test_interior_values(self):
        assert bin_index(0.034, 0.01) == 3
        assert bin_index(0.0099, 0.01) == 0

    def test_bad_bin_size(self):
        with pytest.raises(ValidationError):
            bin_index(0.05, 0.0)


class TestRangeObservationInvariants:
    def test_empty_interval_rejected(self):
        with pytest.raises(ValidationError):
            RangeObservation("a", "c", 1, ecpm_up=0.01, ecpm_dn=0.02, ecpm_cost=0.005)

    def test_cost_above_up_rejected(self):
        with pytest.raises(ValidationError):
            RangeObservation("a", "c", 1, ecpm_up=0.01, ecpm_dn=0.005, ecpm_cost=0.02)

    def test_cost_equal_up_within_slack_accepted(self):
        o = RangeObservation("a", "c", 1, ecpm_up=0.01, ecpm_dn=0.005, ecpm_cost=0.01)
        assert o.ecpm_cost == o.ecpm_up


class TestDeriveRanges:
    def expected_tuples(self, snap: AuctionSnapshot, max_ecpm: float):
        """Independent re-derivation of the branch rules, written longhand."""
        parts = snap.participants
        n = len(parts)
        s = [p.ranking_score for p in parts]
        out = {}
        for i in range(n):
            bp = (parts[i].cpc_bid / 1e6) * parts[i].pctr
            ec = (parts[i].cpc_cost / 1e6) * parts[i].pctr
            for j in range(n):
                if j <= i:
                    up = max_ecpm if j == 0 else s[j - 1] / s[i] * bp
                else:
                    up = s[j] / s[i] * bp
                if j < i:
                    dn = s[j] / s[i] * bp
                elif j == n - 1:
                    dn = bp
                else:
                    dn = s[j + 1] / s[i] * bp
                if up >= dn and ec <= up * (1 + 1e-9):
                    out[(parts[i].advertiser_id, j + 1)] = (up, dn, ec)
        return out

    def test_reference_auction_emits_seven_tuples(self, three_bidder_snapshot):
        obs = derive_ecpm_ranges(three_bidder_snapshot, max_ecpm=9.99)
        assert len(obs) == 7
        expected = self.expected_tuples(three_bidder_snapshot, 9.99)
        assert len(expected) == 7
        for o in obs:
            up, dn, ec = expected[(o.advertiser_id, o.position)]
            assert o.ecpm_up == up
            assert o.ecpm_dn == dn
            assert o.ecpm_cost == ec

    def test_two_bidders_filtered_at_last_position(self, three_bidder_snapshot):
        """The top two bidders' intervals at the last position are empty
        (their own eCPM bid exceeds the score-ratio bound), so no tuple."""
        obs = derive_ecpm_ranges(three_bidder_snapshot, max_ecpm=9.99)
        at_pos3 = {o.advertiser_id for o in obs if o.position == 3}
        assert at_pos3 == {"9575604786"}

    def test_own_position_brackets_own_ecpm_bid(self, three_bidder_snapshot):
        """Interior participants at their own position satisfy
        dn <= bid x pctr <= up."""
        p = three_bidder_snapshot.participants[1]
        own_ecpm = (p.cpc_bid / 1e6) * p.pctr
        obs = [
            o
            for o in derive_ecpm_ranges(three_bidder_snapshot)
            if o.advertiser_id == p.advertiser_id and o.position == p.position
        ]
        assert len(obs) == 1
        assert obs[0].ecpm_dn <= own_ecpm <= obs[0].ecpm_up

    def test_emits_at_most_n_squared(self, three_bidder_snapshot):
        assert len(derive_ecpm_ranges(three_bidder_snapshot)) <= 9

    def test_single_participant_snapshot(self):
        snap = AuctionSnapshot(
            auction_id="solo",
            ts=0,
            participants=(
                ParticipantRecord("a", "c", 1, 1e-4, 1_000_000, 400_000, 0.01),
            ),
        )
        obs = derive_ecpm_ranges(snap, max_ecpm=9.99)
        assert len(obs) == 1
        assert obs[0].ecpm_up == 9.99
        assert obs[0].ecpm_dn == pytest.approx(0.01)

    def test_max_ecpm_validated(self, three_bidder_snapshot):
        with pytest.raises(ValidationError):
            derive_ecpm_ranges(three_bidder_snapshot, max_ecpm=0.0)


class TestBuild:
    def test_reference_pdf_rows(self, reference_landscape):
        L = reference_landscape
        assert L.pdf_dn == {1: 1.0, 2: 1.0, 3: 1.0}
        assert L.pdf_up == {4: 1.0, 5: 2.0}
        assert L.pdf_cost_dn == {1: 0.008, 2: 0.015, 3: 0.02}
        assert L.pdf_cost_up == {4: 0.008, 5: pytest.approx(0.035, abs=0)}
        assert L.n == 3.0 and L.max_index == 5

    def test_reference_cdf_rows(self, reference_landscape):
        L = reference_landscape
        np.testing.assert_array_equal(L.cdf_dn[1:], [1, 2, 3, 3, 3])
        np.testing.assert_array_equal(L.cdf_up[1:], [0, 0, 0, 1, 3])
        np.testing.assert_allclose(
            L.cdf_cost_dn[1:], [0.008, 0.023, 0.043, 0.043, 0.043], atol=1e-9
        )
        np.testing.assert_allclose(
            L.cdf_cost_up[1:], [0, 0, 0, 0.008, 0.043], atol=1e-9
        )

    def test_below_range_observation_skipped_but_counted(self):
        obs = reference_observations() + [
            RangeObservation("adv", "ctx", 1, 0.005, 0.001, 0.0004)
        ]
        L = build_landscape(obs, bin_size=0.01, group="g", built_at=0)
        assert L.n == 4.0
        assert L.pdf_dn == {1: 1.0, 2: 1.0, 3: 1.0}
        # the divisor includes the skipped observation
        assert query_winrate(L, 0.03) == 3 / 4

    def test_all_skipped_raises(self):
        with pytest.raises(EmptyLandscapeError):
            build_landscape(
                [RangeObservation("a", "c", 1, 0.005, 0.001, 0.0)],
                bin_size=0.01,
            )

    def test_order_independence_is_bit_exact(self):
        rng = random.Random(5)
        obs = []
        for _ in range(300):
            dn = rng.uniform(0.0, 0.2)
            up = dn + rng.uniform(0.0, 0.3)
            obs.append(RangeObservation("a", "c", 1, up, dn, rng.uniform(0, dn + 1e-6)))
        builds = []
        for _ in range(5):
            shuffled = obs[:]
            rng.shuffle(shuffled)
            builds.append(build_landscape(shuffled, bin_size=0.01, group="g", built_at=0))
        for other in builds[1:]:
            assert other.pdf_cost_dn == builds[0].pdf_cost_dn
            assert other.pdf_cost_up == builds[0].pdf_cost_up
            assert other.pdf_dn == builds[0].pdf_dn
            assert other.pdf_up == builds[0].pdf_up


class TestQueries:
    def test_winrate_by_index(self, reference_landscape):
        L = reference_landscape
        expected = {1: 1 / 3, 2: 2 / 3, 3: 1.0, 4: 2 / 3, 5: 0.0}
        for k, wr in expected.items():
            assert query_winrate(L, k * 0.01) == pytest.approx(wr, rel=1e-12)

    def test_winrate_below_support_is_zero(self, reference_landscape):
        assert query_winrate(reference_landscape, 0.004) == 0.0
        assert query_winrate(reference_landscape, -1.0) == 0.0

    def test_winrate_clamps_past_support(self, reference_landscape):
        assert query_winrate(reference_landscape, 99.0) == query_winrate(
            reference_landscape, 0.05
        )

    def test_monotone_option_takes_running_max(self, reference_landscape):
        assert query_winrate(reference_landscape, 0.04, monotone=True) == 1.0
        assert query_winrate(reference_landscape, 0.02, monotone=True) == pytest.approx(2 / 3)

    def test_cost_by_index(self, reference_landscape):
        L = reference_landscape
        assert query_cost(L, 0.01) == pytest.approx(0.008, rel=1e-12)
        assert query_cost(L, 0.02) == pytest.approx(0.0115, rel=1e-12)
        assert query_cost(L, 0.03) == pytest.approx(0.043 / 3, rel=1e-12)
        assert query_cost(L, 0.04) == pytest.approx(0.0175, rel=1e-12)

    def test_cost_falls_back_to_nearest_populated_bin(self, reference_landscape):
        # index 5 has no straddling mass; index 4 answers
        assert query_cost(reference_landscape, 0.05) == query_cost(
            reference_landscape, 0.04
        )

    def test_cost_undefined_below_support(self, reference_landscape):
        with pytest.raises(CostUndefinedError):
            query_cost(reference_landscape, 0.004)

    def test_empty_landscape_queries(self):
        L = BidLandscape.empty("e")
        assert query_winrate(L, 0.05) == 0.0
        with pytest.raises(CostUndefinedError):
            query_cost(L, 0.05)


class TestMerge:
    def test_decay_one_matches_batch_build(self):
        rng = random.Random(11)
        obs = []
        for _ in range(200):
            dn = rng.uniform(0.0, 0.1)
            up = dn + rng.uniform(0.0, 0.2)
            obs.append(RangeObservation("a", "c", 1, up, dn, rng.uniform(0, dn + 1e-6)))
        cut = 70
        a = build_landscape(obs[:cut], bin_size=0.01, group="g", built_at=1)
        b = build_landscape(obs[cut:], bin_size=0.01, group="g", built_at=2)
        merged = merge_landscapes(a, b, decay=1.0)
        batch = build_landscape(obs, bin_size=0.01, group="g", built_at=2)
        assert merged.n == batch.n
        assert merged.pdf_dn == batch.pdf_dn
        assert merged.pdf_up == batch.pdf_up
        for key in batch.pdf_cost_dn:
            assert merged.pdf_cost_dn[key] == pytest.approx(
                batch.pdf_cost_dn[key], rel=1e-12
            )
        for key in batch.pdf_cost_up:
            assert merged.pdf_cost_up[key] == pytest.approx(
                batch.pdf_cost_up[key], rel=1e-12
            )
        assert merged.built_at == 2

    def test_decay_one_is_associative(self):
        rng = random.Random(13)
        chunks = []
        for _ in range(3):
            obs = []
            for _ in range(50):
                dn = rng.uniform(0.0, 0.1)
                up = dn + rng.uniform(0.0, 0.2)
                obs.append(RangeObservation("a", "c", 1, up, dn, rng.uniform(0, dn)))
            chunks.append(build_landscape(obs, bin_size=0.01, group="g", built_at=0))
        left = merge_landscapes(merge_landscapes(chunks[0], chunks[1]), chunks[2])
        right = merge_landscapes(chunks[0], merge_landscapes(chunks[1], chunks[2]))
        assert left.pdf_dn == right.pdf_dn
        for key in left.pdf_cost_dn:
            assert left.pdf_cost_dn[key] == pytest.approx(
                right.pdf_cost_dn[key], rel=1e-12
            )

    def test_self_merge_with_decay_keeps_winrates(self, reference_landscape):
        L = reference_landscape
        merged = merge_landscapes(L, L, decay=0.5)
        assert merged.n == pytest.approx(1.5 * L.n)
        for k in range(1, 7):
            assert query_winrate(merged, k * 0.01) == pytest.approx(
                query_winrate(L, k * 0.01), rel=1e-12
            )

    def test_group_and_bin_mismatch_rejected(self, reference_landscape):
        other = build_landscape(
            reference_observations(), bin_size=0.02, group="ref", built_at=0
        )
        with pytest.raises(ValidationError):
            merge_landscapes(reference_landscape, other)
        renamed = build_landscape(
            reference_observations(), bin_size=0.01, group="other", built_at=0
        )
        with pytest.raises(ValidationError):
            merge_landscapes(reference_landscape, renamed)

    def test_decay_bounds(self, reference_landscape):
        with pytest.raises(ValidationError):
            merge_landscapes(reference_landscape, reference_landscape, decay=0.0)
        with pytest.raises(ValidationError):
            merge_landscapes(reference_landscape, reference_landscape, decay=1.5)


class TestWinRanges:
    def test_union_of_slot_tuples_per_participant(self, three_bidder_snapshot):
        """With all three positions winnable, each participant collapses to
        [lowest surviving slot floor, top ceiling)."""
        obs = {
            o.advertiser_id: o
            for o in win_range_observations([three_bidder_snapshot], slots=3)
        }
        assert len(obs) == 3
        per_slot = derive_ecpm_ranges(three_bidder_snapshot)
        for adv_id, o in obs.items():
            mine = [t for t in per_slot if t.advertiser_id == adv_id]
            assert o.ecpm_dn == min(t.ecpm_dn for t in mine)
            assert o.ecpm_up == max(t.ecpm_up for t in mine)
            assert o.ecpm_up == 9.99
            assert o.ecpm_cost == mine[0].ecpm_cost

    def test_single_slot_keeps_top_tuple_only(self, three_bidder_snapshot):
        narrow = {
            o.advertiser_id: o
            for o in win_range_observations([three_bidder_snapshot], slots=1)
        }
        top = {
            t.advertiser_id: t
            for t in derive_ecpm_ranges(three_bidder_snapshot)
            if t.position == 1
        }
        assert set(narrow) == set(top)
        for adv_id, o in narrow.items():
            assert (o.ecpm_dn, o.ecpm_up) == (top[adv_id].ecpm_dn, top[adv_id].ecpm_up)

    def test_position_field_carries_logged_position(self, three_bidder_snapshot):
        obs = win_range_observations([three_bidder_snapshot], slots=2)
        logged = {
            p.advertiser_id: p.position for p in three_bidder_snapshot.participants
        }
        for o in obs:
            assert o.position == logged[o.advertiser_id]

    def test_empty_input(self):
        assert win_range_observations([], slots=2) == []

    def test_validation(self, three_bidder_snapshot):
        with pytest.raises(ValidationError):
            win_range_observations([three_bidder_snapshot], slots=0)
        with pytest.raises(ValidationError):
            win_range_observations([three_bidder_snapshot], slots=1, max_ecpm=0)

    def test_landscape_winrate_saturates_at_one(self):
        """Union observations make the win-rate curve reach 1 at high bids
        whenever every participant can afford the top slot."""
        from bidscape.gsp_sim import generate_log

        from conftest import duopoly_market

        log = generate_log(duopoly_market(jitter=0.2), 200)
        obs = win_range_observations(log, slots=1)
        assert len(obs) == 400  # both bidders, every auction
        L = build_landscape(obs, bin_size=0.001, group="ctx")
        # any bid below the shared 9.99 ceiling but above every floor wins
        assert query_winrate(L, 9.0) == 1.0


class TestPipeline:
    def test_grouping_assigns_each_observation_once(self, three_bidder_snapshot):
        obs = derive_ecpm_ranges(three_bidder_snapshot)
        groups = group_observations(obs, GroupingKey.BY_CONTEXT)
        assert sum(len(v) for v in groups.values()) == len(obs)
        assert set(groups) == {"1_mobile", "1_desktop"}

    def test_build_landscapes_matches_manual_per_group_build(self, three_bidder_snapshot):
        built = build_landscapes(
            [three_bidder_snapshot], key=GroupingKey.BY_CONTEXT, built_at=9
        )
        obs = derive_ecpm_ranges(three_bidder_snapshot)
        for label, group_obs in group_observations(obs, GroupingKey.BY_CONTEXT).items():
            try:
                manual = build_landscape(
                    group_obs, bin_size=0.01, group=label, built_at=9
                )
            except EmptyLandscapeError:
                # everything below bin 1: the pipeline omits such groups
                assert label not in built
                continue
            assert built[label] == manual
        wide = build_landscapes(
            [three_bidder_snapshot],
            key=GroupingKey.BY_CONTEXT,
            bin_size=0.0001,
            built_at=9,
        )
        assert set(wide) == {"1_mobile", "1_desktop"}

    def test_empty_input_builds_nothing(self):
        assert build_landscapes([]) == {}


class TestSerialization:
    def test_round_trip_equality(self, reference_landscape):
        back = landscape_from_dict(landscape_to_dict(reference_landscape))
        assert back == reference_landscape

    def test_counts_serialize_as_integers(self, reference_landscape):
        payload = landscape_to_dict(reference_landscape)
        assert payload["pdf_dn"] == {"1": 1, "2": 1, "3": 1}
        assert payload["pdf_up"] == {"4": 1, "5": 2}
        assert payload["n"] == 3
        assert all(isinstance(v, int) for v in payload["pdf_dn"].values())

    def test_json_text_round_trip(self, reference_landscape):
        assert loads_landscape(dumps_landscape(reference_landscape)) == reference_landscape

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda d: d.pop("group"),
            lambda d: d.update(bin_size="wide"),
            lambda d: d.update(pdf_dn={"x": 1}),
            lambda d: d.update(pdf_dn={"1": "one"}),
            lambda d: d.update(n=True),
        ],
    )
    def test_schema_violations_rejected(self, reference_landscape, mutate):
        payload = landscape_to_dict(reference_landscape)
        mutate(payload)
        with pytest.raises(SchemaError):
            landscape_from_dict(payload)

    def test_range_observation_file_round_trip(self, tmp_path):
        obs = reference_observations()
        path = tmp_path / "ranges.jsonl"
        with path.open("w") as fh:
            write_ranges(obs, fh)
        assert read_ranges(path.read_text()) == obs

    def test_range_reader_reports_line(self):
        with pytest.raises(SchemaError, match="line 2"):
            read_ranges(
                '{"advertiser": "a", "context": "c", "position": 1,'
                ' "ecpm_up": 1.0, "ecpm_dn": 0.5, "ecpm_cost": 0.1}\nnot json\n'
            )


@st.composite
def observation_lists(draw):
    n = draw(st.integers(min_value=1, max_value=40))
    obs = []
    for _ in range(n):
        dn = draw(st.floats(min_value=0.0, max_value=0.3, allow_nan=False))
        width = draw(st.floats(min_value=0.0, max_value=0.3, allow_nan=False))
        up = dn + width
        cost = draw(st.floats(min_value=0.0, max_value=1.0, allow_nan=False)) * up
        obs.append(RangeObservation("a", "c", 1, up, dn, cost))
    return obs


class TestDistributionProperties:
    @given(observation_lists(), st.floats(min_value=0.001, max_value=2.0))
    @settings(max_examples=200, deadline=None)
    def test_winrate_bounded_and_cdfs_ordered(self, obs, bid):
        try:
            L = build_landscape(obs, bin_size=0.01, group="g", built_at=0)
        except EmptyLandscapeError:
            return
        assert 0.0 <= query_winrate(L, bid) <= 1.0
        diffs_dn = np.diff(L.cdf_dn)
        diffs_up = np.diff(L.cdf_up)
        assert np.all(diffs_dn >= 0) and np.all(diffs_up >= 0)
        assert np.all(L.cdf_dn - L.cdf_up >= -1e-12)
