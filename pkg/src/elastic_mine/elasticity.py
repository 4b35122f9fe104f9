"""Resolution of codes and the investment/resource/price elasticity calculus.

Resolution measures a code's information gain about the training set: with
n equiprobable point placements and m actual points, recovering the exact
dataset needs log C(n, m) bits, so a code confining the data to fewer
possible points resolves more. Possible-point counts for R-tree codes
derive from total bounding-box volume through a configurable cell volume;
the monotonicity verdict does not depend on that constant.

Elasticity between consecutive results is the percentage quality gain per
percentage investment increase. Under the product investment model
I = R * P with a state independent of resource and price, the resource and
price elasticities coincide with the investment elasticity.
"""

from __future__ import annotations

import math
import warnings as _warnings
from dataclasses import dataclass
from typing import Sequence

from .coding import CodeBook, total_mbr_volume
from .errors import AssumptionRequiredError, ResolutionInfeasibleError


def log_binomial(n: int, m: int, base: float = 2.0) -> float:
    """log_base of C(n, m), via log-gamma so large n cannot overflow."""
    if m < 0 or n < m:
        raise ValueError(f"need 0 <= m <= n, got n={n}, m={m}")
    value = math.lgamma(n + 1) - math.lgamma(m + 1) - math.lgamma(n - m + 1)
    return value / math.log(base)


@dataclass(frozen=True)
class CodeResolution:
    depth: int
    length: int
    volume: float | None
    possible_points: int
    conditional_entropy: float
    resolution: float


@dataclass(frozen=True)
class ResolutionReport:
    m: int
    log_base: float
    prior_points: int
    prior_entropy: float
    codes: tuple[CodeResolution, ...]
    cell_volume: float | None = None

    @property
    def monotone(self) -> bool:
        """True when resolution never decreases from one code to the next."""
        res = [c.resolution for c in self.codes]
        return all(res[i] <= res[i + 1] + 1e-12 for i in range(len(res) - 1))

    def first_violation(self) -> tuple[int, int] | None:
        res = [c.resolution for c in self.codes]
        for i in range(len(res) - 1):
            if res[i] > res[i + 1] + 1e-12:
                return self.codes[i].depth, self.codes[i + 1].depth
        return None


def resolution(
    counts: Sequence[int],
    m: int,
    prior_points: int,
    log_base: float = 2.0,
    depths: Sequence[int] | None = None,
    lengths: Sequence[int] | None = None,
    volumes: Sequence[float] | None = None,
) -> ResolutionReport:
    """Resolution of codes given their possible-point counts.

    ``counts[j]`` is the number of point placements consistent with code j;
    the prior admits ``prior_points`` placements. Entropy is
    log C(count, m); resolution is the prior entropy minus it.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if log_base <= 1.0:
        raise ValueError("log_base must exceed 1")
    for c in list(counts) + [prior_points]:
        if c < m:
            raise ResolutionInfeasibleError(
                f"possible-point count {c} cannot represent {m} points"
            )
    prior_entropy = log_binomial(prior_points, m, log_base)
    rows = []
    for j, count in enumerate(counts):
        h = log_binomial(int(count), m, log_base)
        rows.append(
            CodeResolution(
                depth=depths[j] if depths is not None else j + 1,
                length=lengths[j] if lengths is not None else 0,
                volume=volumes[j] if volumes is not None else None,
                possible_points=int(count),
                conditional_entropy=h,
                resolution=prior_entropy - h,
            )
        )
    return ResolutionReport(m, log_base, int(prior_points), prior_entropy, tuple(rows))


def default_cell_volume(book: CodeBook) -> float:
    """Half the smallest positive extent in the deepest code, to the power d.

    Chosen so every non-degenerate leaf box holds at least one possible
    point; the audit verdict is invariant to this constant anyway.
    """
    deepest = book.code_at_depth(book.depths()[-1])
    extents = []
    for nid in deepest.node_ids:
        mbr = book.node(nid).mbr
        for e in (mbr.upp - mbr.low):
            if e > 0:
                extents.append(float(e))
    if not extents:
        raise ResolutionInfeasibleError(
            "every leaf box is a point; volumes carry no resolution signal"
        )
    d = book.node(deepest.node_ids[0]).mbr.dimensionality
    return (min(extents) / 2.0) ** d


def audit_entropy_monotonicity(
    book: CodeBook,
    m: int | None = None,
    cell_volume: float | None = None,
    log_base: float = 2.0,
) -> ResolutionReport:
    """Resolution per code of an R-tree book, with the monotonicity verdict.

    Possible-point counts are total code volume divided by ``cell_volume``
    (floored); the prior count comes from the root boxes. Any count below
    m raises, reporting the largest cell volume that would have worked.
    """
    depths = list(book.depths())
    if not depths:
        raise ValueError("book has no usable codes")
    if len(depths) == 1:
        _warnings.warn("single usable code: the monotonicity verdict is vacuous")
    if m is None:
        m = sum(book.node(r).count for r in book.roots)
    cell = cell_volume if cell_volume is not None else default_cell_volume(book)
    root_volume = sum(book.node(r).mbr.volume() for r in book.roots)
    volumes = [total_mbr_volume(book, book.code_at_depth(d)) for d in depths]
    lengths = [book.code_at_depth(d).length for d in depths]
    counts = [int(v / cell) for v in volumes]
    prior = int(root_volume / cell)
    if any(c < m for c in counts) or prior < m:
        smallest = min(volumes + [root_volume])
        workable = smallest / m if smallest > 0 else None
        raise ResolutionInfeasibleError(
            f"cell volume {cell} too coarse: a code admits fewer than m={m} points",
            min_cell_volume=workable,
        )
    return ResolutionReport(
        m=m,
        log_base=log_base,
        prior_points=prior,
        prior_entropy=log_binomial(prior, m, log_base),
        codes=resolution(counts, m, prior, log_base, depths=depths,
                         lengths=lengths, volumes=volumes).codes,
        cell_volume=cell,
    )


# ---------------------------------------------------------------------------
# Elasticity of quality against investment, resource, and price


@dataclass(frozen=True)
class InvestmentPoint:
    """One approximate result: its quality and cumulative investment,
    optionally with the resource amount and unit price that produced it."""

    quality: float
    investment: float
    resource: float | None = None
    price: float | None = None


@dataclass(frozen=True)
class PairElasticity:
    start: int  # index of the base result (0-based)
    quality_gain_pct: float
    investment_gain_pct: float
    elasticity: float | None  # None when a base quantity is zero


@dataclass(frozen=True)
class ElasticityReport:
    pairs: tuple[PairElasticity, ...]

    def argmax_pair(self) -> int:
        """Base index of the pair with the greatest defined elasticity."""
        best = None
        for p in self.pairs:
            if p.elasticity is not None and (best is None or p.elasticity > best.elasticity):
                best = p
        if best is None:
            raise ValueError("no pair has a defined elasticity")
        return best.start


def investment_elasticity(series: Sequence[InvestmentPoint]) -> ElasticityReport:
    """Pairwise elasticity over consecutive results of an investment series."""
    if len(series) < 2:
        raise ValueError("need at least two results")
    pairs = []
    for i in range(len(series) - 1):
        a, b = series[i], series[i + 1]
        if b.investment < a.investment:
            raise ValueError(f"cumulative investment decreases at pair {i}")
        if a.quality <= 0.0 or a.investment <= 0.0:
            pairs.append(PairElasticity(i, math.nan, math.nan, None))
            continue
        dq = (b.quality - a.quality) / a.quality
        di = (b.investment - a.investment) / a.investment
        pairs.append(PairElasticity(i, dq, di, dq / di if di > 0 else None))
    return ElasticityReport(tuple(pairs))


@dataclass(frozen=True)
class EquivalentElasticities:
    investment: ElasticityReport
    resource: ElasticityReport
    price: ElasticityReport


def resource_and_price_elasticity(
    series: Sequence[InvestmentPoint],
    product_investment_model: bool = False,
    state_independent: bool = False,
) -> EquivalentElasticities:
    """Resource and price elasticity under the declared equivalence conditions.

    Requires the caller to declare both the product model I = R * P and
    state independence; only then do the three elasticities coincide and
    the function returns the investment elasticity for all three. Series
    entries must carry consistent resource and price values.
    """
    if not (product_investment_model and state_independent):
        raise AssumptionRequiredError(
            "resource/price elasticity needs product_investment_model=True and "
            "state_independent=True; with a state-dependent investment the "
            "equivalence to investment elasticity does not hold"
        )
    for i, p in enumerate(series):
        if p.resource is None or p.price is None:
            raise ValueError(f"series entry {i} lacks resource or price")
        if not math.isclose(p.investment, p.resource * p.price, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(
                f"entry {i} violates I = R * P: {p.investment} != {p.resource * p.price}"
            )
    report = investment_elasticity(series)
    return EquivalentElasticities(report, report, report)


@dataclass(frozen=True)
class MonotonicityVerdict:
    measurable: bool
    meaningful: bool
    quality_monotone: bool
    dips: tuple[tuple[int, float], ...]  # (pair start index, dip size)
    accumulative: bool | None  # None when no per-start-state costs supplied

    @property
    def all_passed(self) -> bool:
        parts = [self.measurable, self.meaningful, self.quality_monotone]
        if self.accumulative is not None:
            parts.append(self.accumulative)
        return all(parts)


def audit_quality_monotonicity(
    series: Sequence[InvestmentPoint],
    slack: float = 0.02,
    refine_costs: Sequence[float] | None = None,
) -> MonotonicityVerdict:
    """Operational check of the four elastic-algorithm properties.

    Quality must be computable (finite) and non-negative; quality may dip
    by at most ``slack`` against any earlier result as investment grows
    (dips within slack are reported, not failed). When ``refine_costs``
    gives the cost of reaching a common target from each result's state,
    those costs must not increase with result quality.
    """
    if len(series) < 2:
        raise ValueError("need at least two results")
    measurable = all(math.isfinite(p.quality) and math.isfinite(p.investment) for p in series)
    meaningful = measurable and all(p.quality >= 0.0 for p in series)
    dips = []
    monotone = True
    best = series[0].quality
    for i in range(1, len(series)):
        drop = best - series[i].quality
        if drop > 1e-12:
            dips.append((i - 1, float(drop)))
        if drop > slack:
            monotone = False
        best = max(best, series[i].quality)
    accumulative = None
    if refine_costs is not None:
        if len(refine_costs) != len(series):
            raise ValueError("refine_costs must align with the series")
        accumulative = all(
            refine_costs[i + 1] <= refine_costs[i] + 1e-12 for i in range(len(refine_costs) - 1)
        )
    return MonotonicityVerdict(measurable, meaningful, monotone, tuple(dips), accumulative)
