"""Quartile thresholds per subject category and conference assignment.

Thresholds come from the journal and book-series population of a category:
sources are ranked by SJR (descending), the 1-based rank ``r`` of ``N``
sources falls into block ``floor(4*(r-1)/N)``, and each quartile threshold is
the smallest SJR inside its block. A conference then takes the best quartile
whose threshold its SJR reaches (``>=``). Conferences below the Q4 minimum
are placed in Q4 and flagged.
"""

from __future__ import annotations

import enum
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import (
    ConfRankError,
    EmptyAssignments,
    EmptyPopulation,
    NoCategories,
    NoPublications,
    PopulationTooSmall,
)
from .ingest import AsjcCode, PubCount, SourceRecord


class Quartile(enum.IntEnum):
    """Q1 is best. Integer value is the ordinal code 1..4, so *lower* is better."""

    Q1 = 1
    Q2 = 2
    Q3 = 3
    Q4 = 4

    def __str__(self) -> str:
        return self.name

    @classmethod
    def parse(cls, text: str) -> "Quartile":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ConfRankError(f"not a quartile: {text!r}") from None


@dataclass(frozen=True)
class CategoryThresholds:
    category: AsjcCode
    population_size: int
    q1_min: float
    q2_min: float
    q3_min: float
    q4_min: float

    def __post_init__(self):
        if not self.q1_min >= self.q2_min >= self.q3_min >= self.q4_min >= 0:
            raise ConfRankError(f"thresholds not monotone for category {self.category}: {self.minima}")

    @property
    def minima(self) -> tuple[float, float, float, float]:
        return (self.q1_min, self.q2_min, self.q3_min, self.q4_min)


@dataclass(frozen=True)
class QuartileAssignment:
    source_id: str
    category: AsjcCode
    sjr: float
    quartile: Quartile
    clamped_below_q4: bool = False


def quartile_blocks(n: int) -> list[int]:
    """Block index (0..3) for each 1-based rank 1..n."""
    return [4 * (r - 1) // n for r in range(1, n + 1)]


def compute_thresholds(population, category: AsjcCode | int | None = None) -> CategoryThresholds:
    """Quartile block minima for one category.

    ``population`` is an iterable of ``(source_id, sjr)`` pairs or bare SJR
    values. Fewer than four sources raise :class:`PopulationTooSmall`.
    """
    values = sorted((p[1] if isinstance(p, tuple) else p for p in population), reverse=True)
    if not values:
        raise EmptyPopulation(f"no sources in category {category}")
    if any(not v >= 0 for v in values):
        raise ConfRankError(f"negative SJR in population of category {category}")
    n = len(values)
    if n < 4:
        raise PopulationTooSmall(n, category)
    minima = [float("inf")] * 4
    for value, block in zip(values, quartile_blocks(n)):
        minima[block] = min(minima[block], value)
    if isinstance(category, int):
        category = AsjcCode(category)
    return CategoryThresholds(category, n, *minima)


def assign_quartile(sjr: float, thresholds: CategoryThresholds) -> tuple[Quartile, bool]:
    """Quartile for ``sjr`` and whether it was clamped up into Q4."""
    if sjr >= thresholds.q1_min:
        q = Quartile.Q1
    elif sjr >= thresholds.q2_min:
        q = Quartile.Q2
    elif sjr >= thresholds.q3_min:
        q = Quartile.Q3
    else:
        q = Quartile.Q4
    return q, sjr < thresholds.q4_min


@dataclass
class ThresholdTable:
    """Thresholds for every rankable category, plus the ones refused."""

    thresholds: dict = field(default_factory=dict)
    unrankable: dict = field(default_factory=dict)


def build_thresholds(population: Iterable[SourceRecord]) -> ThresholdTable:
    """Group a journal/book-series population by category and threshold each."""
    groups: dict[AsjcCode, list[tuple[str, float]]] = defaultdict(list)
    for rec in population:
        if rec.sjr is None:
            continue
        for cat in rec.categories:
            groups[cat].append((rec.source_id, rec.sjr))
    table = ThresholdTable()
    for cat in sorted(groups):
        try:
            table.thresholds[cat.code] = compute_thresholds(groups[cat], cat)
        except PopulationTooSmall as exc:
            table.unrankable[cat.code] = exc.size
    return table


@dataclass
class ClassifyReport:
    skipped: list = field(default_factory=list)  # (source_id, asjc code) without thresholds
    no_categories: list = field(default_factory=list)  # source_ids


def classify_conferences(
    conferences: Iterable[SourceRecord],
    thresholds: Mapping[int, CategoryThresholds],
    report: ClassifyReport | None = None,
    strict: bool = False,
) -> list[QuartileAssignment]:
    """One assignment per (conference, category) with thresholds.

    Categories without thresholds are recorded in ``report.skipped``;
    conferences without any category go to ``report.no_categories`` (or raise
    :class:`NoCategories` when ``strict``). Output is ordered by source_id,
    then category code.
    """
    report = report if report is not None else ClassifyReport()
    out = []
    for conf in sorted(conferences, key=lambda c: c.source_id):
        if conf.sjr is None:
            raise ConfRankError(f"conference {conf.source_id} has no SJR")
        if not conf.categories:
            if strict:
                raise NoCategories(f"conference {conf.source_id} has no subject category")
            report.no_categories.append(conf.source_id)
            continue
        for cat in sorted(conf.categories):
            th = thresholds.get(cat.code)
            if th is None:
                report.skipped.append((conf.source_id, cat.code))
                continue
            q, clamped = assign_quartile(conf.sjr, th)
            out.append(QuartileAssignment(conf.source_id, th.category, conf.sjr, q, clamped))
    return out


def deduce_categories(source_id: str, counts: Iterable[PubCount], share_threshold: float = 0.20) -> set:
    """Categories for a source lacking them, from where its papers are indexed.

    Keeps every category holding at least ``share_threshold`` of the source's
    publications; if none does, the most frequent one (lowest code on ties).
    """
    totals: Counter = Counter()
    for pc in counts:
        if pc.source_id == source_id:
            totals[pc.category] += pc.count
    total = sum(totals.values())
    if total <= 0:
        raise NoPublications(f"no publications recorded for {source_id}")
    chosen = {cat for cat, n in totals.items() if n / total >= share_threshold}
    if not chosen:
        top = max(totals.values())
        chosen = {min(cat for cat, n in totals.items() if n == top)}
    return chosen


def best_quartile(assignments: Iterable[QuartileAssignment]) -> Quartile:
    assignments = list(assignments)
    if not assignments:
        raise EmptyAssignments("no quartile assignments given")
    ids = {a.source_id for a in assignments}
    if len(ids) > 1:
        raise ConfRankError(f"assignments span several sources: {sorted(ids)}")
    return min(a.quartile for a in assignments)


def best_quartiles(assignments: Iterable[QuartileAssignment]) -> dict:
    """source_id -> best quartile across its categories."""
    best: dict[str, Quartile] = {}
    for a in assignments:
        cur = best.get(a.source_id)
        best[a.source_id] = a.quartile if cur is None else min(cur, a.quartile)
    return best


def category_multiplicity(conferences: Iterable[SourceRecord]) -> dict:
    hist = Counter(len(c.categories) for c in conferences)
    return dict(sorted(hist.items()))


def quartile_distribution(assignments: Iterable[QuartileAssignment]) -> dict:
    """category code -> {Quartile: count}; all four quartiles always present."""
    dist: dict[int, dict[Quartile, int]] = {}
    for a in assignments:
        row = dist.setdefault(a.category.code, {q: 0 for q in Quartile})
        row[a.quartile] += 1
    return dict(sorted(dist.items()))
