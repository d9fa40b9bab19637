"""Parsers and canonical records for the input file families.

Four inputs are understood:

* a SCImago export (``Sourceid;Title;Type;Issn;SJR;Categories`` and friends),
* the canonical source list CSV
  (``source_id,title,issn,e_issn,type,status,asjc_codes``),
* an expert conference ranking (``entry_id,title,acronym,rank``, header optional),
* publication counts (``source_id,asjc_code,publication_count``).

All parsers take bytes or a binary stream and are pure functions of the input.
Row-level problems raise immediately in strict mode; in lenient mode they are
appended to a :class:`ParseReport` and the row is skipped.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import BinaryIO, Iterable, Mapping, Union

from .errors import (
    ChecksumMismatch,
    ConfRankError,
    DuplicateJoinKey,
    EmptyFile,
    MalformedIssn,
    MissingColumn,
    RowParseError,
    UnknownEnumValue,
)

log = logging.getLogger(__name__)

ByteSource = Union[bytes, bytearray, BinaryIO]

SOURCE_LIST_COLUMNS = ["source_id", "title", "issn", "e_issn", "type", "status", "asjc_codes"]
SCIMAGO_REQUIRED = ["sourceid", "title", "type", "issn", "sjr", "categories"]


# --------------------------------------------------------------------------
# identifiers

_ISSN_WEIGHTS = (8, 7, 6, 5, 4, 3, 2)


def issn_check_digit(first7: str) -> str:
    """Check character for the first seven ISSN digits (mod-11 rule)."""
    remainder = sum(int(d) * w for d, w in zip(first7, _ISSN_WEIGHTS)) % 11
    if remainder == 0:
        return "0"
    if remainder == 1:
        return "X"
    return str(11 - remainder)


@dataclass(frozen=True, order=True)
class Issn:
    value: str

    def __str__(self) -> str:
        return self.value

    @property
    def compact(self) -> str:
        return self.value.replace("-", "")


_ISSN_STRIP = re.compile(r"[\s\-]")
_ISSN_SHAPE = re.compile(r"^[0-9]{7}[0-9X]$")


def normalize_issn(raw: str) -> Issn:
    """Validate an ISSN and return it as ``NNNN-NNNC``.

    Hyphens and whitespace are dropped and a lowercase ``x`` check character is
    accepted. Raises :class:`MalformedIssn` for the wrong length or characters
    and :class:`ChecksumMismatch` when only the check digit is wrong.
    """
    if raw is None or not str(raw).strip():
        raise MalformedIssn("empty ISSN")
    compact = _ISSN_STRIP.sub("", str(raw)).upper()
    if not _ISSN_SHAPE.match(compact):
        raise MalformedIssn(f"not an ISSN: {raw!r}")
    expected = issn_check_digit(compact[:7])
    if compact[7] != expected:
        raise ChecksumMismatch(f"ISSN {raw!r} has check digit {compact[7]}, expected {expected}")
    return Issn(f"{compact[:4]}-{compact[4:]}")


# --------------------------------------------------------------------------
# subject categories


@dataclass(frozen=True, order=True)
class AsjcCode:
    code: int
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if not isinstance(self.code, int) or not 1000 <= self.code <= 9999:
            raise ConfRankError(f"ASJC code out of range: {self.code!r}")

    def __str__(self) -> str:
        return str(self.code)


@lru_cache(maxsize=1)
def _bundled_asjc() -> tuple[dict[str, int], dict[int, str]]:
    by_name: dict[str, int] = {}
    by_code: dict[int, str] = {}
    text = resources.files("confrank").joinpath("data/asjc_codes.csv").read_text(encoding="utf-8")
    for row in csv.DictReader(io.StringIO(text)):
        code = int(row["code"])
        by_name[_name_key(row["name"])] = code
        # first row per code is the preferred display name
        by_code.setdefault(code, row["name"])
    return by_name, by_code


def _name_key(name: str) -> str:
    return re.sub(r"\s+", " ", name).strip().casefold()


def asjc_name(code: int) -> str | None:
    return _bundled_asjc()[1].get(code)


def asjc(code: int | str) -> AsjcCode:
    """AsjcCode with its display name filled from the bundled table."""
    code = int(code)
    return AsjcCode(code, asjc_name(code))


def lookup_category(name: str, table: Mapping[str, int] | None = None) -> AsjcCode | None:
    """Map a category name (as printed by SCImago) to its code, or None."""
    if table is not None:
        table = {_name_key(k): v for k, v in table.items()}
    else:
        table = _bundled_asjc()[0]
    code = table.get(_name_key(name))
    if code is None:
        return None
    return AsjcCode(code, asjc_name(code) or name.strip())


# --------------------------------------------------------------------------
# records


class SourceType(str, enum.Enum):
    JOURNAL = "journal"
    BOOK_SERIES = "book series"
    CONFERENCE_PROCEEDINGS = "conference proceedings"
    TRADE_JOURNAL = "trade journal"


_TYPE_ALIASES = {
    "journal": SourceType.JOURNAL,
    "book series": SourceType.BOOK_SERIES,
    "conference proceedings": SourceType.CONFERENCE_PROCEEDINGS,
    "conference proceeding": SourceType.CONFERENCE_PROCEEDINGS,
    # SCImago's spelling
    "conference and proceedings": SourceType.CONFERENCE_PROCEEDINGS,
    "trade journal": SourceType.TRADE_JOURNAL,
}


class Status(str, enum.Enum):
    ONGOING = "ongoing"
    DISCONTINUED = "discontinued"


@dataclass(frozen=True)
class SourceRecord:
    """One serial source. ``status`` is None for SCImago rows, which carry none."""

    source_id: str
    title: str
    issns: frozenset = frozenset()
    source_type: SourceType = SourceType.JOURNAL
    status: Status | None = None
    sjr: float | None = None
    categories: frozenset = frozenset()

    def __post_init__(self):
        if not self.source_id:
            raise ConfRankError("source_id must be non-empty")
        if self.sjr is not None and not self.sjr >= 0:
            raise ConfRankError(f"negative or NaN SJR for {self.source_id}: {self.sjr}")


@dataclass(frozen=True)
class ExpertEntry:
    entry_id: str
    title: str
    acronym: str | None
    rank_label: str


@dataclass(frozen=True)
class PubCount:
    source_id: str
    category: AsjcCode
    count: int

    def __post_init__(self):
        if self.count < 0:
            raise ConfRankError(f"negative publication count for {self.source_id}")


@dataclass
class ParseReport:
    """Collects non-fatal problems from lenient parsing."""

    errors: list = field(default_factory=list)
    unmatched_categories: Counter = field(default_factory=Counter)

    def __bool__(self) -> bool:
        return bool(self.errors or self.unmatched_categories)


class _Rows:
    """Strict/lenient error policy for one parse run."""

    def __init__(self, strict: bool, report: ParseReport | None, max_errors: int | None):
        self.strict = strict
        self.report = report if report is not None else ParseReport()
        self.limit = 0 if strict else max_errors
        self.count = 0

    def fail(self, exc: ConfRankError) -> None:
        self.count += 1
        if self.limit is not None and self.count > self.limit:
            raise exc
        log.warning("%s", exc)
        self.report.errors.append(exc)


# --------------------------------------------------------------------------
# low-level CSV helpers


def read_text(stream: ByteSource) -> str:
    if isinstance(stream, (bytes, bytearray)):
        data = bytes(stream)
    else:
        data = stream.read()
    if isinstance(data, str):
        return data
    return data.decode("utf-8-sig")


def sniff_delimiter(header_line: str) -> str:
    counts = {d: header_line.count(d) for d in (";", ",", "\t")}
    best = max(counts.values())
    if best == 0:
        return ","
    # SCImago's own delimiter wins ties
    for d in (";", ",", "\t"):
        if counts[d] == best:
            return d
    return ","


def _header_index(header: list[str], required: Iterable[str], source: str) -> dict[str, int]:
    index: dict[str, int] = {}
    for i, name in enumerate(header):
        index.setdefault(name.strip().lower(), i)
    for col in required:
        if col not in index:
            raise MissingColumn(col, source)
    return index


def parse_decimal(text: str, decimal: str | None = None) -> float:
    """Parse a number written with either '.' or ',' as the decimal mark.

    With ``decimal=None`` the mark is inferred: when both characters occur, the
    rightmost one is the decimal mark and the other a grouping separator.
    """
    s = text.strip().replace(" ", "").replace(" ", "")
    if decimal is None:
        if "," in s and "." in s:
            decimal = "," if s.rfind(",") > s.rfind(".") else "."
        elif "," in s:
            decimal = ","
        else:
            decimal = "."
    group = "." if decimal == "," else ","
    s = s.replace(group, "").replace(decimal, ".")
    value = float(s)
    if value != value:
        raise ValueError("NaN")
    return value


def _cell(row: list[str], index: dict[str, int], col: str) -> str:
    i = index.get(col)
    if i is None or i >= len(row):
        return ""
    return row[i].strip()


def _split_issns(text: str) -> list[str]:
    parts = re.split(r"[;,\s]+", text.strip())
    return [p for p in parts if p and p != "-"]


# --------------------------------------------------------------------------
# SCImago export

_QUARTILE_SUFFIX = re.compile(r"\s*\((?:Q[1-4]|-)\)\s*$", re.IGNORECASE)


def split_scimago_categories(field_text: str) -> list[str]:
    """``"Software (Q1); Artificial Intelligence (Q2)"`` -> category names."""
    names = []
    for part in field_text.split(";"):
        name = _QUARTILE_SUFFIX.sub("", part).strip()
        if name:
            names.append(name)
    return names


def parse_scimago_csv(
    stream: ByteSource,
    delimiter: str | None = None,
    decimal: str | None = None,
    strict: bool = True,
    report: ParseReport | None = None,
    max_errors: int | None = None,
    category_table: Mapping[str, int] | None = None,
) -> list[SourceRecord]:
    """Parse a SCImago journal-rank export into SourceRecords.

    ``delimiter``/``decimal`` default to auto-detection. Category quartiles
    printed in the export are discarded; names are mapped to ASJC codes and
    unknown names are counted in ``report.unmatched_categories``.
    """
    text = read_text(stream)
    if not text.strip():
        raise EmptyFile("SCImago export is empty")
    delim = delimiter or sniff_delimiter(text.splitlines()[0])
    reader = csv.reader(io.StringIO(text, newline=""), delimiter=delim)
    header = next(reader)
    index = _header_index(header, SCIMAGO_REQUIRED, "SCImago export")
    rows = _Rows(strict, report, max_errors)
    seen: set[str] = set()
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not any(c.strip() for c in row):
            continue
        try:
            source_id = _cell(row, index, "sourceid")
            if not source_id:
                raise RowParseError(lineno, "empty Sourceid")
            if source_id in seen:
                raise RowParseError(lineno, f"duplicate Sourceid {source_id}")
            type_text = _cell(row, index, "type").lower()
            if type_text not in _TYPE_ALIASES:
                raise UnknownEnumValue(lineno, f"unknown source type {type_text!r}")
            issns = set()
            for raw in _split_issns(_cell(row, index, "issn")):
                try:
                    issns.add(normalize_issn(raw))
                except ConfRankError as exc:
                    raise RowParseError(lineno, str(exc)) from exc
            sjr_text = _cell(row, index, "sjr")
            sjr = None
            if sjr_text and sjr_text != "-":
                try:
                    sjr = parse_decimal(sjr_text, decimal)
                except ValueError as exc:
                    raise RowParseError(lineno, f"bad SJR value {sjr_text!r}") from exc
                if sjr < 0:
                    raise RowParseError(lineno, f"negative SJR {sjr_text!r}")
            categories = set()
            for name in split_scimago_categories(_cell(row, index, "categories")):
                code = lookup_category(name, category_table)
                if code is None:
                    rows.report.unmatched_categories[name] += 1
                else:
                    categories.add(code)
        except RowParseError as exc:
            rows.fail(exc)
            continue
        seen.add(source_id)
        records.append(
            SourceRecord(
                source_id=source_id,
                title=_cell(row, index, "title"),
                issns=frozenset(issns),
                source_type=_TYPE_ALIASES[type_text],
                status=None,
                sjr=sjr,
                categories=frozenset(categories),
            )
        )
    for name, n in sorted(rows.report.unmatched_categories.items()):
        log.warning("unmatched category name %r (%d rows)", name, n)
    return records


# --------------------------------------------------------------------------
# canonical source list


def parse_source_list(
    stream: ByteSource,
    strict: bool = True,
    report: ParseReport | None = None,
    max_errors: int | None = None,
) -> list[SourceRecord]:
    text = read_text(stream)
    if not text.strip():
        raise EmptyFile("source list is empty")
    reader = csv.reader(io.StringIO(text, newline=""))
    index = _header_index(next(reader), SOURCE_LIST_COLUMNS, "source list")
    rows = _Rows(strict, report, max_errors)
    seen: set[str] = set()
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not any(c.strip() for c in row):
            continue
        try:
            source_id = _cell(row, index, "source_id")
            if not source_id:
                raise RowParseError(lineno, "empty source_id")
            if source_id in seen:
                raise RowParseError(lineno, f"duplicate source_id {source_id}")
            type_text = _cell(row, index, "type").lower().replace("_", " ")
            if type_text not in _TYPE_ALIASES:
                raise UnknownEnumValue(lineno, f"unknown type {type_text!r}")
            status_text = _cell(row, index, "status").lower()
            try:
                status = Status(status_text)
            except ValueError:
                raise UnknownEnumValue(lineno, f"unknown status {status_text!r}") from None
            issns = set()
            for raw in _split_issns(_cell(row, index, "issn")) + _split_issns(_cell(row, index, "e_issn")):
                try:
                    issns.add(normalize_issn(raw))
                except ConfRankError as exc:
                    raise RowParseError(lineno, str(exc)) from exc
            categories = set()
            for code_text in _cell(row, index, "asjc_codes").split(";"):
                code_text = code_text.strip()
                if not code_text:
                    continue
                if not re.fullmatch(r"[0-9]{4}", code_text):
                    raise RowParseError(lineno, f"bad ASJC code {code_text!r}")
                categories.add(asjc(code_text))
        except RowParseError as exc:
            rows.fail(exc)
            continue
        seen.add(source_id)
        records.append(
            SourceRecord(
                source_id=source_id,
                title=_cell(row, index, "title"),
                issns=frozenset(issns),
                source_type=_TYPE_ALIASES[type_text],
                status=status,
                categories=frozenset(categories),
            )
        )
    return records


def emit_source_list(records: Iterable[SourceRecord]) -> bytes:
    """Render records as the canonical source list CSV (UTF-8, LF).

    The lowest ISSN goes to ``issn``; any others are ';'-joined in ``e_issn``.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SOURCE_LIST_COLUMNS)
    for rec in records:
        if rec.status is None:
            raise ConfRankError(f"source {rec.source_id} has no status; cannot emit canonical row")
        issns = sorted(str(i) for i in rec.issns)
        writer.writerow(
            [
                rec.source_id,
                rec.title,
                issns[0] if issns else "",
                ";".join(issns[1:]),
                rec.source_type.value,
                rec.status.value,
                ";".join(str(c.code) for c in sorted(rec.categories)),
            ]
        )
    return buf.getvalue().encode("utf-8")


# --------------------------------------------------------------------------
# expert ranking


def _looks_numeric(text: str) -> bool:
    return bool(re.fullmatch(r"\s*[0-9]+\s*", text))


def parse_expert_csv(stream: ByteSource) -> list[ExpertEntry]:
    """Parse an expert conference ranking.

    With a header row, columns ``title``, ``acronym`` and ``rank`` are required
    and ``entry_id`` is optional (row numbers are used when absent). A file
    whose first field is numeric is taken as headerless: four columns are read
    as ``entry_id,title,acronym,rank``; five or more follow the CORE portal
    export layout ``id,title,acronym,source,rank,...``.
    """
    text = read_text(stream)
    rows = [r for r in csv.reader(io.StringIO(text, newline="")) if any(c.strip() for c in r)]
    if not rows:
        raise EmptyFile("expert ranking is empty")
    first = rows[0]
    entries = []
    if _looks_numeric(first[0]):
        width = len(first)
        if width < 4:
            raise MissingColumn("rank", "headerless expert ranking")
        rank_col = 3 if width == 4 else 4
        data = [(r[0], r[1], r[2], r[rank_col] if len(r) > rank_col else "") for r in rows]
    else:
        index = _header_index(first, ["title", "acronym", "rank"], "expert ranking")
        data = []
        for n, r in enumerate(rows[1:], start=1):
            entry_id = _cell(r, index, "entry_id") if "entry_id" in index else str(n)
            data.append((entry_id, _cell(r, index, "title"), _cell(r, index, "acronym"), _cell(r, index, "rank")))
    seen: set[str] = set()
    for lineno, (entry_id, title, acronym, rank) in enumerate(data, start=1):
        entry_id = entry_id.strip()
        if entry_id in seen:
            raise RowParseError(lineno, f"duplicate entry_id {entry_id}")
        seen.add(entry_id)
        entries.append(ExpertEntry(entry_id, title.strip(), acronym.strip() or None, rank.strip()))
    return entries


# --------------------------------------------------------------------------
# publication counts


def parse_pubcounts(stream: ByteSource) -> list[PubCount]:
    text = read_text(stream)
    if not text.strip():
        raise EmptyFile("publication counts file is empty")
    reader = csv.reader(io.StringIO(text, newline=""))
    index = _header_index(next(reader), ["source_id", "asjc_code", "publication_count"], "publication counts")
    counts = []
    for lineno, row in enumerate(reader, start=2):
        if not any(c.strip() for c in row):
            continue
        try:
            code = asjc(_cell(row, index, "asjc_code"))
            n = int(_cell(row, index, "publication_count"))
        except (ValueError, ConfRankError) as exc:
            raise RowParseError(lineno, str(exc)) from exc
        if n < 0:
            raise RowParseError(lineno, "negative publication_count")
        counts.append(PubCount(_cell(row, index, "source_id"), code, n))
    return counts


# --------------------------------------------------------------------------
# joining

_POPULATION_TYPES = (SourceType.JOURNAL, SourceType.BOOK_SERIES)


def merge_sources(
    scimago: list[SourceRecord],
    source_list: list[SourceRecord],
    strict: bool = True,
    report: ParseReport | None = None,
) -> tuple[list[SourceRecord], list[SourceRecord]]:
    """Join SCImago rows to the source list and split the result.

    Returns ``(conferences, rank_population)``: ongoing conference proceedings
    with an SJR, and journals/book series with an SJR. Rows are joined on
    ``source_id`` first and on any shared ISSN otherwise; unjoined rows drop
    out. Type and status come from the source list, SJR from SCImago, and
    categories are the union of both.
    """
    by_id = {rec.source_id: rec for rec in source_list}
    by_issn: dict[Issn, SourceRecord] = {}
    for rec in source_list:
        for issn in sorted(rec.issns):
            other = by_issn.get(issn)
            if other is not None and other.source_id != rec.source_id:
                exc = DuplicateJoinKey(f"ISSN {issn} claimed by sources {other.source_id} and {rec.source_id}")
                if strict:
                    raise exc
                log.warning("%s; keeping %s", exc, other.source_id)
                if report is not None:
                    report.errors.append(exc)
                continue
            by_issn[issn] = rec

    conferences, population = [], []
    for sci in scimago:
        listed = by_id.get(sci.source_id)
        if listed is None:
            for issn in sorted(sci.issns):
                if issn in by_issn:
                    listed = by_issn[issn]
                    break
        if listed is None or sci.sjr is None:
            continue
        merged = SourceRecord(
            source_id=listed.source_id,
            title=listed.title or sci.title,
            issns=listed.issns | sci.issns,
            source_type=listed.source_type,
            status=listed.status,
            sjr=sci.sjr,
            categories=listed.categories | sci.categories,
        )
        if merged.source_type is SourceType.CONFERENCE_PROCEEDINGS:
            if merged.status is Status.ONGOING:
                conferences.append(merged)
        elif merged.source_type in _POPULATION_TYPES:
            population.append(merged)
    return conferences, population
