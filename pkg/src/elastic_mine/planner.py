"""Budget planning under fixed and spot pricing.

Maps time budgets to code-length budgets through a throughput profile, and
answers planning queries over a series of approximate results: cheapest
result meeting a quality floor, best quality within a budget, minimal spot
bid meeting a deadline, and elasticity-constrained refinement bids.

Spot semantics: a bid grants every hour whose posted price it covers
(boundary inclusive). Billing follows day-granularity arithmetic: a
feasible answer pays the bid for every granted hour inside the deadline
window, while the hour-by-hour simulation reports when the mining work
itself completes. Suspension/resume overhead defaults to zero.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .coding import CodeBook
from .errors import ClockResolutionError, ParseError
from .knn import KnnQuery, accuracy, classify

QUERY_MAX_QUALITY = "max-quality-within-budget"
QUERY_MIN_INVESTMENT = "min-investment-for-quality"
QUERY_MIN_BID = "min-bid-for-deadline"
QUERY_ELASTICITY = "elasticity-constrained-quality"


class ResultPoint(NamedTuple):
    """One approximate result: quality and cumulative execution hours."""

    quality: float
    hours: float


@dataclass(frozen=True)
class ThroughputProfile:
    nodes_per_second: float
    qualities: tuple[float, ...] | None = None
    time_fractions: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.nodes_per_second <= 0:
            raise ValueError("nodes_per_second must be positive")

    def within_band(self, other: "ThroughputProfile", tolerance: float = 0.5) -> bool:
        """Sanity check: two calibrations of one machine should roughly agree."""
        lo, hi = sorted((self.nodes_per_second, other.nodes_per_second))
        return (hi - lo) / hi <= tolerance

    def quality_discrepancy(self, full_qualities) -> tuple[float, ...]:
        """Per-result gap between profiled and full-run quality (reported, not asserted)."""
        if self.qualities is None:
            raise ValueError("profile carries no quality predictions")
        if len(full_qualities) != len(self.qualities):
            raise ValueError("quality series lengths disagree")
        return tuple(abs(a - b) for a, b in zip(self.qualities, full_qualities))


def calibrate(
    book: CodeBook, queries: Sequence[KnnQuery], actuals=None, depths=None, clock=time.perf_counter
) -> ThroughputProfile:
    """Measure scanning throughput on a profiling subset of queries.

    Classifies every query at every depth, timing the whole run on the
    given monotone clock. Per-depth time fractions come from scan counts;
    when actual labels are supplied the per-depth accuracy is recorded as
    the predicted quality of each result.
    """
    if not queries:
        raise ValueError("need at least one sample query")
    depths = list(depths) if depths is not None else list(book.depths())
    scanned = [0] * len(depths)
    predictions = [[] for _ in depths]
    start = clock()
    for query in queries:
        for j, depth in enumerate(depths):
            result = classify(book, depth, query)
            scanned[j] += result.scanned
            predictions[j].append(result.predicted)
    elapsed = clock() - start
    if elapsed <= 0.0:
        raise ClockResolutionError("profiling run elapsed no measurable time")
    total = sum(scanned)
    qualities = None
    if actuals is not None:
        qualities = tuple(accuracy(p, actuals) for p in predictions)
    return ThroughputProfile(
        nodes_per_second=total / elapsed,
        qualities=qualities,
        time_fractions=tuple(s / total for s in scanned),
    )


def length_budget(time_budget_seconds: float, profile: ThroughputProfile) -> int:
    """Largest code length processable within the time budget."""
    if time_budget_seconds <= 0:
        raise ValueError("time budget must be positive")
    return int(math.floor(time_budget_seconds * profile.nodes_per_second))


@dataclass(frozen=True)
class PriceSchedule:
    """A fixed hourly price and 24 hourly spot prices."""

    fixed_price: float
    spot_prices: tuple[float, ...]

    def __post_init__(self):
        if self.fixed_price <= 0:
            raise ValueError("fixed price must be positive")
        if len(self.spot_prices) != 24 or any(p <= 0 for p in self.spot_prices):
            raise ValueError("spot schedule needs exactly 24 positive hourly prices")

    def levels(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.spot_prices)))

    @classmethod
    def from_csv(cls, text: str, fixed_price: float) -> "PriceSchedule":
        prices: dict[int, float] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 2:
                raise ParseError(f"expected 'hour,price', got {line!r}", lineno)
            try:
                hour = int(parts[0])
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise ParseError(f"non-numeric hour {parts[0]!r}", lineno) from None
            prices[hour] = float(parts[1])
        if sorted(prices) != list(range(24)):
            raise ParseError(f"schedule must cover hours 0-23, got {sorted(prices)}")
        return cls(fixed_price, tuple(prices[h] for h in range(24)))


def spot_availability(schedule: PriceSchedule, bid: float) -> tuple[tuple[int, ...], int]:
    """Hours of the day the bid covers (price <= bid) and their count."""
    if bid <= 0:
        raise ValueError("bid must be positive")
    hours = tuple(h for h, p in enumerate(schedule.spot_prices) if p <= bid + 1e-12)
    return hours, len(hours)


class SpotWindow(NamedTuple):
    granted_hours: float  # total granted time inside the window
    window_end: float  # end of the last granted hour (0 when none)
    completion: float | None  # when `work` hours of mining finish, None if never
    resumes: int  # suspend/resume cycles before completion (or window end)


def simulate_spot(
    schedule: PriceSchedule,
    bid: float,
    deadline_hours: float,
    work_hours: float,
    resume_overhead_hours: float = 0.0,
) -> SpotWindow:
    """Hour-by-hour grant simulation from hour 0 of day 1.

    Each suspend/resume cycle burns ``resume_overhead_hours`` of granted
    time before mining continues (zero by default, and never billed).
    """
    granted = 0.0
    done = 0.0  # mining progress net of resume overheads
    pending = 0.0  # overhead still to burn before mining continues
    window_end = 0.0
    completion = None
    resumes = 0
    previous_granted = False
    hour = 0
    while hour < deadline_hours:
        if schedule.spot_prices[hour % 24] <= bid + 1e-12:
            duration = min(1.0, deadline_hours - hour)
            if not previous_granted and granted > 0.0:
                pending += resume_overhead_hours
                if completion is None:
                    resumes += 1
            burn = min(pending, duration)
            pending -= burn
            usable = duration - burn
            if completion is None and done + usable >= work_hours - 1e-12:
                completion = hour + burn + (work_hours - done)
            done += usable
            granted += duration
            window_end = hour + duration
            previous_granted = True
        else:
            previous_granted = False
        hour += 1
    return SpotWindow(granted, window_end, completion, resumes)


@dataclass(frozen=True)
class PlanAnswer:
    query: str
    feasible: bool
    result_index: int | None = None  # 0-based into the result series
    quality: float | None = None
    price: float | None = None  # fixed price or winning bid
    investment: float | None = None
    work_hours: float | None = None  # machine time the mining itself needs
    execution_hours: float | None = None  # billed (granted) hours
    suspended_hours: float | None = None
    elapsed_hours: float | None = None
    completion_hours: float | None = None  # simulated finish of the mining work
    hours_per_day: int | None = None
    binding: str | None = None  # name of the constraint that decided the answer


def _check_results(results: Sequence[ResultPoint]):
    if not results:
        raise ValueError("empty result series")
    hours = [r.hours for r in results]
    if any(b < a for a, b in zip(hours, hours[1:])):
        raise ValueError("results must be ordered by cumulative execution time")


def fixed_plan(
    results: Sequence[ResultPoint],
    fixed_price: float,
    query: str,
    budget: float | None = None,
    required_quality: float | None = None,
    elasticity_floor: float | None = None,
) -> PlanAnswer:
    """Answer a fixed-price query by scanning the cumulative result series."""
    results = [ResultPoint(*r) for r in results]
    _check_results(results)
    invest = [r.hours * fixed_price for r in results]

    def answer(i, feasible=True, binding=None):
        return PlanAnswer(
            query=query, feasible=feasible, result_index=i,
            quality=results[i].quality if i is not None else None,
            price=fixed_price,
            investment=invest[i] if i is not None else None,
            work_hours=results[i].hours if i is not None else None,
            execution_hours=results[i].hours if i is not None else None,
            suspended_hours=0.0 if i is not None else None,
            elapsed_hours=results[i].hours if i is not None else None,
            binding=binding,
        )

    if query == QUERY_MIN_INVESTMENT:
        if required_quality is None:
            raise ValueError("min-investment query needs required_quality")
        for i, r in enumerate(results):
            if r.quality >= required_quality - 1e-12:
                if budget is not None and invest[i] > budget + 1e-12:
                    return answer(None, feasible=False, binding="budget")
                return answer(i, binding="quality")
        return answer(None, feasible=False, binding="quality")

    if query == QUERY_MAX_QUALITY:
        if budget is None:
            raise ValueError("max-quality query needs a budget")
        affordable = [i for i in range(len(results)) if invest[i] <= budget + 1e-12]
        if not affordable:
            return answer(None, feasible=False, binding="budget")
        best = max(affordable, key=lambda i: (results[i].quality, -i))
        return answer(best, binding="budget")

    if query == QUERY_ELASTICITY:
        if elasticity_floor is None:
            raise ValueError("elasticity-constrained query needs elasticity_floor")
        if budget is not None and invest[0] > budget + 1e-12:
            return answer(None, feasible=False, binding="budget")
        last = 0
        for i in range(len(results) - 1):
            q0, q1 = results[i].quality, results[i + 1].quality
            i0, i1 = invest[i], invest[i + 1]
            if q0 <= 0 or i0 <= 0 or i1 <= i0:
                break
            elasticity = ((q1 - q0) / q0) / ((i1 - i0) / i0)
            if elasticity < elasticity_floor - 1e-12:
                break
            if budget is not None and i1 > budget + 1e-12:
                break
            last = i + 1
        return answer(last, binding="elasticity")

    raise ValueError(f"unknown fixed-price query {query!r}")


def spot_plan(
    results: Sequence[ResultPoint],
    schedule: PriceSchedule,
    deadline_hours: float,
    required_quality: float | None = None,
    budget: float | None = None,
    resume_overhead_hours: float = 0.0,
) -> PlanAnswer:
    """Minimal bid whose granted hours fit the target result before the deadline.

    The target is the first result meeting ``required_quality`` (the last
    result when no floor is given). Candidate bids are the schedule's
    distinct price levels; billing covers every granted hour inside the
    deadline window, never the suspend/resume overhead. Infeasible
    deadlines report the best achievable completion time at the maximum
    level.
    """
    results = [ResultPoint(*r) for r in results]
    _check_results(results)
    if deadline_hours <= 0:
        raise ValueError("deadline must be positive")
    target = None
    if required_quality is None:
        target = len(results) - 1
    else:
        for i, r in enumerate(results):
            if r.quality >= required_quality - 1e-12:
                target = i
                break
    if target is None:
        return PlanAnswer(query=QUERY_MIN_BID, feasible=False, binding="quality")
    work = results[target].hours
    for bid in schedule.levels():
        window = simulate_spot(schedule, bid, deadline_hours, work, resume_overhead_hours)
        if window.completion is not None:
            investment = window.granted_hours * bid
            if budget is not None and investment > budget + 1e-12:
                return PlanAnswer(
                    query=QUERY_MIN_BID, feasible=False, result_index=target,
                    quality=results[target].quality, price=bid, investment=investment,
                    work_hours=work, binding="budget",
                )
            _, per_day = spot_availability(schedule, bid)
            return PlanAnswer(
                query=QUERY_MIN_BID, feasible=True, result_index=target,
                quality=results[target].quality, price=bid, investment=investment,
                work_hours=work,
                execution_hours=window.granted_hours,
                suspended_hours=window.window_end - window.granted_hours,
                elapsed_hours=window.window_end,
                completion_hours=window.completion,
                hours_per_day=per_day,
                binding="deadline",
            )
    return PlanAnswer(
        query=QUERY_MIN_BID, feasible=False, result_index=target,
        quality=results[target].quality, work_hours=work,
        completion_hours=work,  # best case: the maximum bid grants every hour
        binding="deadline",
    )


class ElasticityBid(NamedTuple):
    """Per-result spot bid under an investment-elasticity floor."""

    index: int
    bid: float
    delta_investment: float
    cumulative_investment: float
    hours_per_day: int
    capped: bool  # True when the elasticity floor forced a bid below the base


def spot_elasticity_bids(
    results: Sequence[ResultPoint],
    schedule: PriceSchedule,
    elasticity_floor: float,
    base_bid: float | None = None,
) -> tuple[ElasticityBid, ...]:
    """Derive one bid per result so every refinement meets the elasticity floor.

    The first result pays the base bid (the maximum price level unless
    given). Each later result first tries the base bid; when the implied
    elasticity falls below the floor, its investment increment is capped at
    quality-gain / floor of the cumulative investment and the bid becomes
    that increment divided by the result's execution time.
    """
    results = [ResultPoint(*r) for r in results]
    _check_results(results)
    if elasticity_floor <= 0:
        raise ValueError("elasticity floor must be positive")
    base = base_bid if base_bid is not None else max(schedule.levels())
    increments = [results[0].hours] + [
        b.hours - a.hours for a, b in zip(results, results[1:])
    ]
    rows = []
    cumulative = increments[0] * base
    rows.append(ElasticityBid(0, base, cumulative, cumulative,
                              spot_availability(schedule, base)[1], False))
    for i in range(1, len(results)):
        q0, q1 = results[i - 1].quality, results[i].quality
        if q0 <= 0:
            raise ValueError(f"result {i - 1} has non-positive quality")
        if q1 <= q0:
            raise ValueError(
                f"result {i} does not improve on result {i - 1}; no bid can meet the floor"
            )
        gain = (q1 - q0) / q0
        delta = increments[i] * base
        capped = False
        if cumulative > 0 and delta / cumulative > 0 and gain / (delta / cumulative) < elasticity_floor - 1e-12:
            delta = (gain / elasticity_floor) * cumulative
            capped = True
        bid = delta / increments[i] if increments[i] > 0 else base
        cumulative += delta
        rows.append(ElasticityBid(i, bid, delta, cumulative,
                                  spot_availability(schedule, bid)[1], capped))
    return tuple(rows)
