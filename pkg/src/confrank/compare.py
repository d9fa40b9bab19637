"""Alignment of the bibliometric classification with an expert ranking.

Covers venue-name linkage (overrides, acronym, exact normalized title,
token-set Jaccard), the quartile/expert-rank mapping, the average-rank
Spearman coefficient and the 5x5 contingency table with NA margins.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .classify import Quartile
from .errors import (
    AmbiguousOverride,
    ConfRankError,
    CountExceedsTotal,
    DegenerateInput,
    EmptyAfterNormalization,
    MissingColumn,
    RowParseError,
    ZeroScope,
    ZeroTotal,
)
from .ingest import ByteSource, ExpertEntry, SourceRecord, read_text


# --------------------------------------------------------------------------
# rank mapping


def _label_key(label: str) -> str:
    return re.sub(r"\s+", "", label or "").upper()


@dataclass(frozen=True)
class RankMapping:
    """Quartile <-> expert label pairs. Labels outside the mapping are NA."""

    pairs: tuple = (
        (Quartile.Q1, "A*"),
        (Quartile.Q2, "A"),
        (Quartile.Q3, "B"),
        (Quartile.Q4, "C"),
    )

    def __post_init__(self):
        quartiles = [q for q, _ in self.pairs]
        keys = [_label_key(lbl) for _, lbl in self.pairs]
        if len(set(quartiles)) != len(quartiles) or len(set(keys)) != len(keys):
            raise ConfRankError("rank mapping must be one-to-one")

    @property
    def labels(self) -> list[str]:
        return [lbl for _, lbl in sorted(self.pairs)]

    def quartile_for(self, label: str) -> Quartile | None:
        key = _label_key(label)
        for q, lbl in self.pairs:
            if _label_key(lbl) == key:
                return q
        return None

    def label_for(self, quartile: Quartile) -> str:
        for q, lbl in self.pairs:
            if q == quartile:
                return lbl
        raise KeyError(quartile)


DEFAULT_MAPPING = RankMapping()


# --------------------------------------------------------------------------
# venue-name normalization

_ORDINAL_WORDS = {
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth",
    "eleventh", "twelfth", "thirteenth", "fourteenth", "fifteenth", "sixteenth", "seventeenth",
    "eighteenth", "nineteenth", "twentieth", "thirtieth", "fortieth", "fiftieth",
}
STOPWORDS = frozenset(
    {"proceedings", "proceeding", "of", "the", "international", "annual", "conference", "conferences", "on"}
    | _ORDINAL_WORDS
)
_ORDINAL_NUMBER = re.compile(r"^\d+(st|nd|rd|th)$")
_YEAR = re.compile(r"^(19|20)\d\d$")
_PARENS = re.compile(r"\([^()]*\)|\[[^\[\]]*\]")
_NON_WORD = re.compile(r"[^0-9a-z]+")


def raw_tokens(text: str) -> list[str]:
    return [t for t in _NON_WORD.split(text.lower()) if t]


def normalize_venue_name(text: str) -> list[str]:
    """Content tokens of a venue name, in order.

    Lowercases, drops parentheticals, punctuation, stopwords, ordinals and
    standalone years. Raises :class:`EmptyAfterNormalization` when nothing
    is left; :func:`venue_tokens` falls back to the raw tokens instead.
    """
    if not text or not text.strip():
        raise EmptyAfterNormalization("empty venue name")
    s = text.lower()
    prev = None
    while prev != s:
        prev, s = s, _PARENS.sub(" ", s)
    s = s.replace("'", "").replace("’", "")
    tokens = []
    for tok in _NON_WORD.split(s):
        if not tok or tok in STOPWORDS or _ORDINAL_NUMBER.match(tok) or _YEAR.match(tok):
            continue
        tokens.append(tok)
    if not tokens:
        raise EmptyAfterNormalization(f"nothing left of {text!r} after normalization")
    return tokens


def venue_tokens(text: str) -> list[str]:
    try:
        return normalize_venue_name(text)
    except EmptyAfterNormalization:
        return raw_tokens(text)


# --------------------------------------------------------------------------
# overrides


class OverrideAction(str, enum.Enum):
    MATCH = "match"
    EXCLUDE = "exclude"
    AGGREGATOR = "aggregator"


@dataclass(frozen=True)
class Override:
    source_id: str
    entry_id: str | None
    action: OverrideAction


def parse_overrides(stream: ByteSource) -> list[Override]:
    """Read ``source_id,entry_id,action`` rows; validates and de-duplicates."""
    text = read_text(stream)
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = [h.strip().lower() for h in next(reader)]
    except StopIteration:
        return []
    for col in ("source_id", "entry_id", "action"):
        if col not in header:
            raise MissingColumn(col, "override file")
    idx = {name: header.index(name) for name in ("source_id", "entry_id", "action")}
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not any(c.strip() for c in row):
            continue
        cells = {k: (row[i].strip() if i < len(row) else "") for k, i in idx.items()}
        try:
            action = OverrideAction(cells["action"].lower())
        except ValueError:
            raise RowParseError(lineno, f"unknown override action {cells['action']!r}") from None
        if not cells["source_id"]:
            raise RowParseError(lineno, "empty source_id")
        if action is OverrideAction.MATCH and not cells["entry_id"]:
            raise RowParseError(lineno, "match override needs an entry_id")
        out.append(Override(cells["source_id"], cells["entry_id"] or None, action))
    _check_overrides(out)
    return out


def _check_overrides(overrides: Iterable[Override]) -> dict:
    by_source: dict[str, Override] = {}
    claimed: dict[str, str] = {}
    for ov in overrides:
        prev = by_source.get(ov.source_id)
        if prev is not None and prev != ov:
            raise AmbiguousOverride(f"conflicting overrides for source {ov.source_id}")
        by_source[ov.source_id] = ov
        if ov.action is OverrideAction.MATCH:
            other = claimed.get(ov.entry_id)
            if other is not None and other != ov.source_id:
                raise AmbiguousOverride(f"entry {ov.entry_id} matched by overrides for {other} and {ov.source_id}")
            claimed[ov.entry_id] = ov.source_id
    return by_source


# --------------------------------------------------------------------------
# matching


class MatchMethod(str, enum.Enum):
    OVERRIDE = "override"
    ACRONYM_EXACT = "acronym_exact"
    TITLE_EXACT = "title_exact"
    TOKEN_OVERLAP = "token_overlap"


_METHOD_RANK = {m: i for i, m in enumerate(MatchMethod)}

# publisher/society names that look like acronyms but never identify a venue
_ACRONYM_BLOCKLIST = frozenset({"ieee", "acm", "ifip", "siam", "spie", "asme", "iet", "aip", "ceur", "lncs"})


@dataclass(frozen=True)
class MatchResult:
    source_id: str
    entry_id: str
    method: MatchMethod
    score: float

    def to_dict(self) -> dict:
        return {"source_id": self.source_id, "entry_id": self.entry_id, "method": self.method.value, "score": self.score}


@dataclass
class Matching:
    matches: list = field(default_factory=list)
    unmatched_conferences: list = field(default_factory=list)
    unmatched_entries: list = field(default_factory=list)
    aggregators: list = field(default_factory=list)
    excluded: list = field(default_factory=list)

    def __iter__(self):
        # allows ``matches, unmatched_confs, unmatched_entries = match_expert(...)``
        return iter((self.matches, self.unmatched_conferences, self.unmatched_entries))


def _acronym_match(title: str, conf_tokens: list[str], entry: ExpertEntry, entry_tokens: set) -> bool:
    if entry.acronym:
        acr = "".join(raw_tokens(entry.acronym))
        if len(acr) >= 2 and acr not in _ACRONYM_BLOCKLIST:
            if acr in conf_tokens:
                return True
            if any(a + b == acr for a, b in zip(conf_tokens, conf_tokens[1:])):
                return True
    # the other direction: an acronym written in the conference title
    for word in re.findall(r"\b[A-Z][A-Z0-9]{2,}\b", title):
        w = word.lower()
        if w not in _ACRONYM_BLOCKLIST and w in entry_tokens:
            return True
    return False


def jaccard(a: set, b: set) -> float:
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


def match_expert(
    conferences: Sequence[SourceRecord],
    entries: Sequence[ExpertEntry],
    overrides: Iterable[Override] = (),
    threshold: float = 0.6,
) -> Matching:
    """Link conferences to expert entries, one-to-one.

    Overrides are applied first (``exclude``/``aggregator`` remove a
    conference from matching). Remaining conferences collect candidates by
    acronym, exact normalized title and token-set Jaccard >= ``threshold``;
    candidates are accepted greedily by (score desc, method, source_id,
    entry_id) so that each side is used at most once.
    """
    by_source = _check_overrides(overrides)
    entry_ids = {e.entry_id for e in entries}
    result = Matching()
    used_sources: set[str] = set()
    used_entries: set[str] = set()

    active = []
    for conf in sorted(conferences, key=lambda c: c.source_id):
        ov = by_source.get(conf.source_id)
        if ov is None:
            active.append(conf)
        elif ov.action is OverrideAction.AGGREGATOR:
            result.aggregators.append(conf.source_id)
        elif ov.action is OverrideAction.EXCLUDE:
            result.excluded.append(conf.source_id)
        else:
            if ov.entry_id not in entry_ids:
                raise ConfRankError(f"override for {conf.source_id} names unknown entry {ov.entry_id}")
            result.matches.append(MatchResult(conf.source_id, ov.entry_id, MatchMethod.OVERRIDE, 1.0))
            used_sources.add(conf.source_id)
            used_entries.add(ov.entry_id)

    entry_norm = {}
    entry_raw = {}
    postings: dict[str, list[ExpertEntry]] = defaultdict(list)
    for e in entries:
        toks = venue_tokens(e.title) if e.title else []
        entry_norm[e.entry_id] = toks
        entry_raw[e.entry_id] = set(raw_tokens(e.title))
        for t in set(toks):
            postings[t].append(e)

    candidates = []
    for conf in active:
        conf_raw = raw_tokens(conf.title)
        conf_norm = venue_tokens(conf.title)
        conf_set = set(conf_norm)
        for e in entries:
            if _acronym_match(conf.title, conf_raw, e, entry_raw[e.entry_id]):
                candidates.append((1.0, MatchMethod.ACRONYM_EXACT, conf.source_id, e.entry_id))
        seen = set()
        for t in conf_set:
            for e in postings.get(t, ()):
                if e.entry_id in seen:
                    continue
                seen.add(e.entry_id)
                toks = entry_norm[e.entry_id]
                if toks == conf_norm:
                    candidates.append((1.0, MatchMethod.TITLE_EXACT, conf.source_id, e.entry_id))
                    continue
                score = jaccard(conf_set, set(toks))
                if score >= threshold:
                    candidates.append((score, MatchMethod.TOKEN_OVERLAP, conf.source_id, e.entry_id))

    candidates.sort(key=lambda c: (-c[0], _METHOD_RANK[c[1]], c[2], c[3]))
    for score, method, source_id, entry_id in candidates:
        if source_id in used_sources or entry_id in used_entries:
            continue
        result.matches.append(MatchResult(source_id, entry_id, method, score))
        used_sources.add(source_id)
        used_entries.add(entry_id)

    result.matches.sort(key=lambda m: (m.source_id, m.entry_id))
    result.unmatched_conferences = [c.source_id for c in active if c.source_id not in used_sources]
    result.unmatched_entries = sorted((e.entry_id for e in entries if e.entry_id not in used_entries))
    return result


# --------------------------------------------------------------------------
# statistics


def spearman_avg_rank(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman's rho with tied values given their average rank.

    Raises :class:`DegenerateInput` when either list is constant, since the
    coefficient is undefined there.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ConfRankError("spearman_avg_rank needs two 1-d sequences of equal length")
    if len(x) < 2:
        raise DegenerateInput("need at least two pairs")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateInput("correlation undefined for a constant list")
    rx = rankdata(x, method="average")
    ry = rankdata(y, method="average")
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    rho = float(np.sum(dx * dy) / math.sqrt(float(np.sum(dx * dx)) * float(np.sum(dy * dy))))
    return max(-1.0, min(1.0, rho))


@dataclass(frozen=True)
class ContingencyTable:
    """Quartile rows (Q1..Q4, NA) by expert columns (labels..., NA)."""

    counts: np.ndarray
    row_labels: tuple = ("Q1", "Q2", "Q3", "Q4", "NA")
    col_labels: tuple = ("A*", "A", "B", "C", "NA")

    @property
    def core(self) -> np.ndarray:
        return self.counts[:4, :4]

    @property
    def na_column(self) -> np.ndarray:
        return self.counts[:4, 4]

    @property
    def na_row(self) -> np.ndarray:
        return self.counts[4, :4]

    def pairs(self) -> tuple[list[int], list[int]]:
        """Expand the core back into (quartile code, expert code) pairs."""
        xs, ys = [], []
        for i in range(4):
            for j in range(4):
                n = int(self.core[i, j])
                xs += [i + 1] * n
                ys += [j + 1] * n
        return xs, ys

    def to_dict(self) -> dict:
        return {
            "rows": list(self.row_labels),
            "cols": list(self.col_labels),
            "cells": self.counts.astype(int).tolist(),
        }


def build_contingency(
    quartiles: Mapping[str, Quartile],
    matches: Iterable[MatchResult],
    entries: Iterable[ExpertEntry],
    mapping: RankMapping = DEFAULT_MAPPING,
) -> ContingencyTable:
    """Cross-tabulate in-scope conferences against expert entries.

    ``quartiles`` holds every in-scope conference. Matched pairs fill the
    core (or the NA column if the expert label is not mapped), unmatched
    conferences fill the NA column and unmatched entries with a mapped label
    fill the NA row. The NA/NA cell stays 0.
    """
    counts = np.zeros((5, 5), dtype=np.int64)
    labels = {e.entry_id: e.rank_label for e in entries}
    matched_sources = set()
    matched_entries = set()
    for m in matches:
        if m.source_id not in quartiles:
            continue
        matched_sources.add(m.source_id)
        matched_entries.add(m.entry_id)
        row = int(quartiles[m.source_id]) - 1
        q = mapping.quartile_for(labels.get(m.entry_id, ""))
        col = 4 if q is None else int(q) - 1
        counts[row, col] += 1
    for source_id, q in quartiles.items():
        if source_id not in matched_sources:
            counts[int(q) - 1, 4] += 1
    for entry_id, label in labels.items():
        if entry_id in matched_entries:
            continue
        q = mapping.quartile_for(label)
        if q is not None:
            counts[4, int(q) - 1] += 1
    return ContingencyTable(counts, col_labels=tuple(mapping.labels) + ("NA",))


def overlap_stats(matches: Sequence, conferences_in_scope: int) -> float:
    if conferences_in_scope <= 0:
        raise ZeroScope("no conferences in scope")
    n = matches if isinstance(matches, int) else len(matches)
    return n / conferences_in_scope


def format_percent(fraction: float) -> str:
    # round half up, not banker's rounding
    return f"{math.floor(fraction * 100 + 0.5)}%"


def proceedings_share(counts: Mapping, floor: float = 0.10) -> dict:
    """Share of proceedings among all publications per category.

    ``counts`` maps a category to ``(proceedings_count, total_count)``;
    categories with a share not above ``floor`` are left out.
    """
    shares = {}
    for key, (proc, total) in counts.items():
        if total <= 0:
            raise ZeroTotal(f"total publication count is zero for {key}")
        if proc < 0 or proc > total:
            raise CountExceedsTotal(f"proceedings count {proc} outside 0..{total} for {key}")
        share = proc / total
        if share > floor:
            shares[key] = share
    return shares


@dataclass
class ComparisonStats:
    spearman_rho: float | None
    n_matched: int
    overlap: float
    contingency: ContingencyTable


def comparison_stats(
    quartiles: Mapping[str, Quartile],
    matching: Matching,
    entries: Sequence[ExpertEntry],
    mapping: RankMapping = DEFAULT_MAPPING,
) -> ComparisonStats:
    """Contingency, overlap and rho for one scoped set of conferences.

    Rho is computed over the matched pairs whose expert label is mapped; it is
    None when undefined (fewer than two pairs or a constant side).
    """
    table = build_contingency(quartiles, matching.matches, entries, mapping)
    xs, ys = table.pairs()
    try:
        rho = spearman_avg_rank(xs, ys)
    except DegenerateInput:
        rho = None
    in_scope = [m for m in matching.matches if m.source_id in quartiles]
    return ComparisonStats(
        spearman_rho=rho,
        n_matched=len(xs),
        overlap=overlap_stats(len(in_scope), len(quartiles)) if quartiles else 0.0,
        contingency=table,
    )
