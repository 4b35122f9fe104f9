import itertools

import pytest

import elastic_mine as em
from elastic_mine.errors import ClockResolutionError, ParseError
from elastic_mine.planner import (
    QUERY_ELASTICITY,
    QUERY_MAX_QUALITY,
    QUERY_MIN_INVESTMENT,
    ResultPoint,
    simulate_spot,
)

# Hourly spot prices: cheapest at midnight, peaking at noon.
SPOT_PRICES = (
    0.10, 0.11, 0.12, 0.14, 0.16, 0.18, 0.20, 0.22, 0.24, 0.26, 0.28, 0.30,
    0.30, 0.28, 0.26, 0.24, 0.22, 0.20, 0.18, 0.16, 0.14, 0.12, 0.11, 0.10,
)
FIXED_PRICE = 0.5

# Quality and cumulative execution hours of a four-result refinement series.
RESULTS = [
    ResultPoint(0.74, 6.0),
    ResultPoint(0.80, 10.6),
    ResultPoint(0.86, 22.24),
    ResultPoint(0.91, 40.0),
]


@pytest.fixture(scope="module")
def schedule():
    return em.PriceSchedule(FIXED_PRICE, SPOT_PRICES)


class TestThroughput:
    def test_calibrate_with_fake_clock(self, fourclass_book, fourclass_split):
        _, test = fourclass_split
        queries = [em.KnnQuery(test.features[i], 5) for i in range(5)]
        ticks = iter([0.0, 2.0])
        profile = em.calibrate(fourclass_book, queries, actuals=test.labels[:5],
                               clock=lambda: next(ticks))
        total = 5 * sum(
            fourclass_book.code_at_depth(d).length for d in fourclass_book.depths()
        )
        assert profile.nodes_per_second == pytest.approx(total / 2.0)
        assert sum(profile.time_fractions) == pytest.approx(1.0)
        assert len(profile.qualities) == len(fourclass_book.depths())

    def test_zero_elapsed_rejected(self, fourclass_book, fourclass_split):
        _, test = fourclass_split
        queries = [em.KnnQuery(test.features[0], 5)]
        with pytest.raises(ClockResolutionError):
            em.calibrate(fourclass_book, queries, clock=lambda: 1.0)

    def test_length_budget(self):
        profile = em.ThroughputProfile(nodes_per_second=2000.0)
        assert em.length_budget(0.01, profile) == 20
        assert em.length_budget(1e-6, profile) == 0

    def test_profiles_within_sanity_band(self):
        a = em.ThroughputProfile(nodes_per_second=2000.0)
        b = em.ThroughputProfile(nodes_per_second=1400.0)
        c = em.ThroughputProfile(nodes_per_second=600.0)
        assert a.within_band(b)
        assert not a.within_band(c)

    def test_quality_discrepancy_reported(self, fourclass_book, fourclass_split):
        _, test = fourclass_split
        queries = [em.KnnQuery(test.features[i], 5) for i in range(10)]
        ticks = iter([0.0, 1.0])
        profile = em.calibrate(fourclass_book, queries, actuals=test.labels[:10],
                               clock=lambda: next(ticks))
        gaps = profile.quality_discrepancy([1.0] * len(fourclass_book.depths()))
        assert len(gaps) == len(fourclass_book.depths())
        assert all(0.0 <= g <= 1.0 for g in gaps)


class TestSchedule:
    def test_from_csv_round_trip(self):
        text = "hour,price\n" + "\n".join(f"{h},{p}" for h, p in enumerate(SPOT_PRICES))
        schedule = em.PriceSchedule.from_csv(text, FIXED_PRICE)
        assert schedule.spot_prices == SPOT_PRICES

    def test_missing_hours_rejected(self):
        with pytest.raises(ParseError):
            em.PriceSchedule.from_csv("0,0.1\n1,0.2", FIXED_PRICE)

    def test_availability_at_16_cents(self, schedule):
        hours, count = em.spot_availability(schedule, 0.16)
        assert count == 10
        assert hours == (0, 1, 2, 3, 4, 19, 20, 21, 22, 23)

    def test_availability_at_12_cents(self, schedule):
        hours, count = em.spot_availability(schedule, 0.12)
        assert count == 6
        assert hours == (0, 1, 2, 21, 22, 23)

    def test_availability_below_minimum(self, schedule):
        assert em.spot_availability(schedule, 0.09)[1] == 0

    def test_availability_monotone_and_full_at_max(self, schedule):
        counts = [em.spot_availability(schedule, b)[1] for b in schedule.levels()]
        assert counts == sorted(counts)
        assert counts[-1] == 24


class TestFixedPlan:
    def test_quality_floor_costs_5_dollars_30(self):
        answer = em.fixed_plan(RESULTS, FIXED_PRICE, QUERY_MIN_INVESTMENT,
                               budget=20.0, required_quality=0.8)
        assert answer.feasible
        assert answer.result_index == 1
        assert answer.investment == pytest.approx(5.3)
        assert answer.quality == 0.80

    def test_best_quality_within_budget(self):
        answer = em.fixed_plan(RESULTS, FIXED_PRICE, QUERY_MAX_QUALITY, budget=20.0)
        assert answer.result_index == 3
        assert answer.quality == 0.91
        assert answer.investment == pytest.approx(20.0)

    def test_elasticity_floor_stops_after_second_result(self):
        answer = em.fixed_plan(RESULTS, FIXED_PRICE, QUERY_ELASTICITY,
                               budget=20.0, elasticity_floor=0.10)
        assert answer.result_index == 1
        assert answer.quality == 0.80

    def test_budget_below_first_result(self):
        answer = em.fixed_plan(RESULTS, FIXED_PRICE, QUERY_MAX_QUALITY, budget=1.0)
        assert not answer.feasible
        assert answer.binding == "budget"

    def test_investment_consistency(self):
        answer = em.fixed_plan(RESULTS, FIXED_PRICE, QUERY_MIN_INVESTMENT,
                               required_quality=0.86)
        assert answer.investment == pytest.approx(
            answer.execution_hours * answer.price, abs=1e-12
        )


class TestSpotPlan:
    def test_two_day_deadline_takes_12_cent_bid(self, schedule):
        answer = em.spot_plan(RESULTS, schedule, deadline_hours=48.0,
                              required_quality=0.8, budget=20.0)
        assert answer.feasible
        assert answer.price == pytest.approx(0.12)
        assert answer.execution_hours == pytest.approx(12.0)
        assert answer.investment == pytest.approx(1.44)
        assert answer.hours_per_day == 6
        assert answer.completion_hours == pytest.approx(46.6)

    def test_full_series_needs_26_cent_bid(self, schedule):
        answer = em.spot_plan(RESULTS, schedule, deadline_hours=48.0,
                              required_quality=0.91, budget=20.0)
        assert answer.feasible
        assert answer.price == pytest.approx(0.26)
        assert answer.investment == pytest.approx(10.4)
        assert answer.execution_hours == pytest.approx(40.0)

    def test_tiny_deadline_infeasible(self, schedule):
        answer = em.spot_plan(RESULTS, schedule, deadline_hours=0.1, required_quality=0.8)
        assert not answer.feasible
        assert answer.binding == "deadline"
        assert answer.completion_hours == pytest.approx(10.6)

    def test_unreachable_quality(self, schedule):
        answer = em.spot_plan(RESULTS, schedule, deadline_hours=48.0, required_quality=0.99)
        assert not answer.feasible
        assert answer.binding == "quality"

    def test_investment_consistency_and_deadline_respect(self, schedule):
        for quality, deadline in itertools.product((0.74, 0.8, 0.86, 0.91), (24.0, 48.0, 96.0)):
            answer = em.spot_plan(RESULTS, schedule, deadline, required_quality=quality)
            if not answer.feasible:
                continue
            assert answer.investment == pytest.approx(
                answer.execution_hours * answer.price, abs=1e-12
            )
            assert answer.execution_hours + answer.suspended_hours <= deadline + 1e-9
            assert answer.completion_hours <= deadline + 1e-9

    def test_spot_beats_fixed_price_for_same_result(self, schedule):
        spot = em.spot_plan(RESULTS, schedule, deadline_hours=96.0, required_quality=0.8)
        fixed = em.fixed_plan(RESULTS, FIXED_PRICE, QUERY_MIN_INVESTMENT, required_quality=0.8)
        assert spot.price < FIXED_PRICE
        assert spot.work_hours * spot.price < fixed.investment


class TestSpotElasticityBids:
    def test_third_result_bid_derived_from_floor(self, schedule):
        rows = em.spot_elasticity_bids(RESULTS, schedule, elasticity_floor=0.10)
        assert rows[0].bid == pytest.approx(0.30)  # base bid: the peak price level
        assert not rows[1].capped
        assert rows[1].cumulative_investment == pytest.approx(3.18)
        assert rows[2].capped
        assert rows[2].delta_investment == pytest.approx(2.385)
        assert rows[2].bid == pytest.approx(0.20, abs=0.005)
        assert rows[2].hours_per_day == 14

    def test_flat_quality_rejected(self, schedule):
        flat = [ResultPoint(0.8, 5.0), ResultPoint(0.8, 10.0)]
        with pytest.raises(ValueError):
            em.spot_elasticity_bids(flat, schedule, elasticity_floor=0.10)

    def test_simulation_helper(self, schedule):
        window = simulate_spot(schedule, 0.12, 48.0, 10.6)
        assert window.granted_hours == pytest.approx(12.0)
        assert window.completion == pytest.approx(46.6)
        assert window.window_end == pytest.approx(48.0)
        assert window.resumes == 2  # restarts at hours 21 and 45; hour 0 is the start

    def test_resume_overhead_delays_completion(self, schedule):
        base = simulate_spot(schedule, 0.12, 48.0, 10.6)
        slow = simulate_spot(schedule, 0.12, 48.0, 10.6, resume_overhead_hours=0.4)
        assert slow.completion > base.completion
        assert slow.granted_hours == base.granted_hours  # billing never changes
        blocked = simulate_spot(schedule, 0.12, 48.0, 10.6, resume_overhead_hours=3.0)
        assert blocked.completion is None
        answer = em.spot_plan(RESULTS, schedule, 48.0, required_quality=0.8,
                              resume_overhead_hours=3.0)
        # the heavy overhead forces a higher bid than the overhead-free 0.12
        assert answer.feasible and answer.price > 0.12
