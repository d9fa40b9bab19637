"""Artifact emitters: CSV/JSON tables, Markdown report and SVG bar charts.

Every emitter returns bytes (or text) computed only from its arguments;
:func:`write_artifact` does the file write and wraps failures in
:class:`IoFailure`.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .classify import CategoryThresholds, Quartile, QuartileAssignment, best_quartiles, quartile_distribution
from .compare import ComparisonStats, Matching, format_percent
from .errors import ConfRankError, EmptySeries, IoFailure, MissingColumn, RowParseError
from .ingest import AsjcCode, ByteSource, asjc, asjc_name, read_text

THRESHOLD_COLUMNS = ["asjc_code", "category_name", "population_size", "q1_min", "q2_min", "q3_min", "q4_min"]
CLASSIFIED_COLUMNS = ["source_id", "title", "asjc_code", "sjr", "quartile", "clamped_below_q4", "best_quartile"]
EXCEPTION_COLUMNS = ["source_id", "asjc_code", "reason"]


def format_decimal(x: float) -> str:
    """Shortest round-tripping positional form: no exponent, no grouping."""
    return np.format_float_positional(float(x), trim="0")


def write_artifact(path, data: bytes | str) -> Path:
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as exc:
        raise IoFailure(path, exc) from exc
    return path


def csv_bytes(header: list[str], rows: Iterable[list]) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue().encode("utf-8")


def read_rows(stream: ByteSource, required: Sequence[str], what: str):
    text = read_text(stream)
    reader = csv.DictReader(io.StringIO(text, newline=""))
    fields = [f.strip().lower() for f in (reader.fieldnames or [])]
    for col in required:
        if col not in fields:
            raise MissingColumn(col, what)
    reader.fieldnames = fields
    for lineno, row in enumerate(reader, start=2):
        yield lineno, {k: (v or "").strip() for k, v in row.items() if k is not None}


# --------------------------------------------------------------------------
# thresholds


def emit_thresholds_csv(thresholds: Iterable[CategoryThresholds] | Mapping) -> bytes:
    if isinstance(thresholds, Mapping):
        thresholds = thresholds.values()
    rows = []
    for th in sorted(thresholds, key=lambda t: t.category.code):
        name = th.category.name or asjc_name(th.category.code) or ""
        rows.append([th.category.code, name, th.population_size] + [format_decimal(v) for v in th.minima])
    return csv_bytes(THRESHOLD_COLUMNS, rows)


def read_thresholds_csv(stream: ByteSource) -> dict:
    out = {}
    for lineno, row in read_rows(stream, THRESHOLD_COLUMNS, "thresholds CSV"):
        try:
            code = int(row["asjc_code"])
            th = CategoryThresholds(
                AsjcCode(code, row["category_name"] or None),
                int(row["population_size"]),
                *(float(row[c]) for c in THRESHOLD_COLUMNS[3:]),
            )
        except (ValueError, ConfRankError) as exc:
            raise RowParseError(lineno, str(exc)) from exc
        out[code] = th
    return out


# --------------------------------------------------------------------------
# classified conferences


def emit_classified_csv(assignments: Iterable[QuartileAssignment], titles: Mapping[str, str]) -> bytes:
    assignments = sorted(assignments, key=lambda a: (a.source_id, a.category.code))
    best = best_quartiles(assignments)
    rows = [
        [
            a.source_id,
            titles.get(a.source_id, ""),
            a.category.code,
            format_decimal(a.sjr),
            a.quartile.name,
            "true" if a.clamped_below_q4 else "false",
            best[a.source_id].name,
        ]
        for a in assignments
    ]
    return csv_bytes(CLASSIFIED_COLUMNS, rows)


def read_classified_csv(stream: ByteSource) -> tuple[list[QuartileAssignment], dict]:
    """Inverse of :func:`emit_classified_csv`: (assignments, source_id -> title)."""
    assignments, titles = [], {}
    for lineno, row in read_rows(stream, CLASSIFIED_COLUMNS, "classified CSV"):
        try:
            clamped = row["clamped_below_q4"].lower()
            if clamped not in ("true", "false"):
                raise ValueError(f"clamped_below_q4 must be true/false, got {clamped!r}")
            assignments.append(
                QuartileAssignment(
                    row["source_id"],
                    asjc(row["asjc_code"]),
                    float(row["sjr"]),
                    Quartile.parse(row["quartile"]),
                    clamped == "true",
                )
            )
        except (ValueError, ConfRankError) as exc:
            raise RowParseError(lineno, str(exc)) from exc
        titles[row["source_id"]] = row["title"]
    return assignments, titles


def emit_exceptions_csv(rows: Iterable[tuple]) -> bytes:
    return csv_bytes(EXCEPTION_COLUMNS, sorted((str(s), str(c), r) for s, c, r in rows))


def read_exceptions_csv(stream: ByteSource) -> list[tuple]:
    return [(r["source_id"], r["asjc_code"], r["reason"]) for _, r in read_rows(stream, EXCEPTION_COLUMNS, "exceptions CSV")]


# --------------------------------------------------------------------------
# comparison


def comparison_payload(stats: ComparisonStats, matching: Matching, extra: Mapping | None = None) -> dict:
    payload = {
        "n_matched": stats.n_matched,
        "overlap": stats.overlap,
        "spearman_rho": stats.spearman_rho,
        "contingency": stats.contingency.to_dict(),
        "matches": [m.to_dict() for m in matching.matches],
        "unmatched_conferences": list(matching.unmatched_conferences),
        "unmatched_entries": list(matching.unmatched_entries),
        "aggregators": list(matching.aggregators),
        "excluded": list(matching.excluded),
    }
    if extra:
        payload.update(extra)
    return payload


def emit_comparison_json(stats: ComparisonStats, matching: Matching, extra: Mapping | None = None) -> bytes:
    return (json.dumps(comparison_payload(stats, matching, extra), indent=2, ensure_ascii=False) + "\n").encode("utf-8")


# --------------------------------------------------------------------------
# SVG


def emit_svg_bars(series, title: str = "", axis_label: str = "") -> bytes:
    """Standalone vertical bar chart; bar height is proportional to value.

    ``series`` is a mapping or a sequence of ``(label, value)`` pairs; order
    is kept. The tallest bar spans the full plot height.
    """
    items = list(series.items()) if isinstance(series, Mapping) else [tuple(p) for p in series]
    if not items:
        raise EmptySeries("nothing to plot")
    values = [float(v) for _, v in items]
    if any(not v >= 0 for v in values):
        raise ConfRankError("bar values must be non-negative")
    top = max(values)

    bar_w, gap = 40, 20
    left, right, top_pad, bottom = 70, 20, 50, 90
    plot_h = 240
    width = left + right + len(items) * (bar_w + gap)
    height = top_pad + plot_h + bottom
    base = top_pad + plot_h

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        f'<text x="{width / 2:.2f}" y="24" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top_pad}" x2="{left}" y2="{base}" stroke="#333333"/>',
        f'<line x1="{left}" y1="{base}" x2="{width - right}" y2="{base}" stroke="#333333"/>',
        f'<text x="{left - 10}" y="{base}" text-anchor="end">0</text>',
        f'<text x="{left - 10}" y="{top_pad + 4}" text-anchor="end">{escape(_tick(top))}</text>',
    ]
    if axis_label:
        cy = top_pad + plot_h / 2
        out.append(
            f'<text x="16" y="{cy:.2f}" text-anchor="middle" transform="rotate(-90 16 {cy:.2f})">{escape(axis_label)}</text>'
        )
    for i, ((label, _), value) in enumerate(zip(items, values)):
        h = plot_h * value / top if top > 0 else 0.0
        x = left + gap / 2 + i * (bar_w + gap)
        cx = x + bar_w / 2
        out.append(
            f'<rect class="bar" x="{x:.2f}" y="{base - h:.2f}" width="{bar_w}" height="{h:.2f}" fill="#4c72b0">'
            f"<title>{escape(str(label))}: {escape(_tick(value))}</title></rect>"
        )
        out.append(f'<text x="{cx:.2f}" y="{base - h - 4:.2f}" text-anchor="middle">{escape(_tick(value))}</text>')
        out.append(
            f'<text x="{cx:.2f}" y="{base + 14}" text-anchor="end" transform="rotate(-45 {cx:.2f} {base + 14})">'
            f"{escape(str(label))}</text>"
        )
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def _tick(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else f"{v:.3g}"


# --------------------------------------------------------------------------
# Markdown


def _md_table(header: Sequence, rows: Iterable[Sequence]) -> list[str]:
    lines = ["| " + " | ".join(str(h) for h in header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return lines


def emit_markdown_report(
    thresholds: Iterable[CategoryThresholds] | None = None,
    assignments: Sequence[QuartileAssignment] | None = None,
    comparison: Mapping | None = None,
    scores: Sequence[Mapping] | None = None,
    metadata: Mapping | None = None,
    exceptions: Sequence[tuple] | None = None,
) -> str:
    """Assemble the run report.

    ``comparison`` is the dict written by :func:`emit_comparison_json`;
    ``scores`` are rows with at least ``best_quartile`` and ``points``.
    Sections whose inputs are None are left out.
    """
    lines = ["# Conference proceedings quartile report", ""]
    meta = dict(metadata or {})
    if meta:
        lines += ["## Run parameters", ""]
        lines += [f"- **{k}**: {meta[k]}" for k in sorted(meta)]
        lines.append("")

    if thresholds is not None:
        ths = sorted(thresholds.values() if isinstance(thresholds, Mapping) else thresholds, key=lambda t: t.category.code)
        lines += ["## Quartile thresholds", ""]
        if ths:
            lines += _md_table(
                ["ASJC", "Category", "N", "Q1 min", "Q2 min", "Q3 min", "Q4 min"],
                (
                    [t.category.code, t.category.name or asjc_name(t.category.code) or "", t.population_size]
                    + [format_decimal(v) for v in t.minima]
                    for t in ths
                ),
            )
        else:
            lines.append("No category had a large enough journal/book-series population.")
        lines.append("")

    if assignments is not None:
        lines += ["## Quartile distribution of conference proceedings", ""]
        dist = quartile_distribution(assignments)
        if dist:
            lines += _md_table(
                ["ASJC", "Category", "Q1", "Q2", "Q3", "Q4", "Total"],
                (
                    [code, asjc_name(code) or ""] + [row[q] for q in Quartile] + [sum(row.values())]
                    for code, row in dist.items()
                ),
            )
            best = best_quartiles(assignments)
            counts = {q: 0 for q in Quartile}
            for q in best.values():
                counts[q] += 1
            lines += ["", f"{len(best)} sources classified; best quartile counts: "
                      + ", ".join(f"{q.name} {counts[q]}" for q in Quartile) + "."]
        else:
            lines.append("No conference received a quartile.")
        lines.append("")

    if comparison is not None:
        lines += ["## Comparison with the expert ranking", ""]
        cont = comparison.get("contingency") if comparison else None
        if not comparison or not cont or not any(any(r) for r in cont.get("cells", [])):
            lines.append("No comparison data: nothing was matched or in scope, so this section is empty.")
        else:
            cells = cont["cells"]
            rows = []
            for i, label in enumerate(cont["rows"]):
                row = [label] + [str(c) for c in cells[i]]
                if i == len(cells) - 1:
                    row[-1] = ""
                rows.append(row)
            lines += _md_table(["Quartile / expert"] + list(cont["cols"]), rows)
            rho = comparison.get("spearman_rho")
            lines += [
                "",
                f"- Matched pairs used for rank correlation: {comparison.get('n_matched', 0)}",
                f"- Spearman rho (average ranks): {'undefined' if rho is None else f'{rho:.3f}'}",
                f"- Overlap: {format_percent(comparison.get('overlap', 0.0))}",
            ]
        lines.append("")

    if scores is not None:
        lines += ["## Scores", ""]
        if scores:
            by_class: dict[str, list[float]] = {}
            for row in scores:
                by_class.setdefault(str(row["best_quartile"]), []).append(float(row["points"]))
            lines += _md_table(
                ["Class", "Sources", "Points each", "Points total"],
                (
                    [c, len(p), ", ".join(sorted({format_decimal(x) for x in p})), format_decimal(sum(p))]
                    for c, p in sorted(by_class.items())
                ),
            )
        else:
            lines.append("No scored sources.")
        lines.append("")

    caveats = []
    if assignments:
        clamped = sorted({a.source_id for a in assignments if a.clamped_below_q4})
        if clamped:
            caveats.append(
                f"{len(clamped)} source(s) fall below the Q4 minimum of a category and were placed in Q4: "
                + ", ".join(clamped)
            )
    for reason, what in (
        ("no_thresholds", "category assignment(s) skipped because the category has no thresholds"),
        ("no_categories", "source(s) without any subject category"),
        ("no_publications", "source(s) whose categories could not be deduced"),
    ):
        hit = [e for e in (exceptions or ()) if e[2] == reason]
        if hit:
            caveats.append(f"{len(hit)} {what}")
    if comparison:
        if comparison.get("aggregators"):
            caveats.append(
                f"{len(comparison['aggregators'])} aggregator source(s) left out of matching: "
                + ", ".join(comparison["aggregators"])
            )
        if comparison.get("excluded"):
            caveats.append(f"{len(comparison['excluded'])} source(s) excluded from matching by override")
    if caveats:
        lines += ["## Caveats", ""] + [f"- {c}" for c in caveats] + [""]
    return "\n".join(lines).rstrip("\n") + "\n"
