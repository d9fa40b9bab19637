"""Command-line entry point: ``confrank <stage> ...``.

Exit codes: 0 success, 1 contract/data errors, 2 I/O errors.
Diagnostics go to stderr; stdout carries only summaries.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from . import classify as cl
from . import compare as cmp
from . import ingest, report, score
from .errors import ConfRankError, NoPublications

log = logging.getLogger("confrank")


class InputError(ConfRankError):
    """A contract error tagged with the file it came from."""


def _read(path: str) -> bytes:
    return Path(path).read_bytes()


def _parse(path: str, fn, *args, **kwargs):
    data = _read(path)
    try:
        return fn(data, *args, **kwargs)
    except ConfRankError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _load_sources(args) -> tuple[list, list]:
    strict = not args.lenient
    rep = ingest.ParseReport()
    sci = _parse(args.scimago, ingest.parse_scimago_csv, delimiter=args.delimiter, decimal=args.decimal,
                 strict=strict, report=rep)
    listed = _parse(args.sources, ingest.parse_source_list, strict=strict, report=rep)
    conferences, population = ingest.merge_sources(sci, listed, strict=strict, report=rep)
    if rep.errors:
        print(f"warning: {len(rep.errors)} row(s) skipped while parsing", file=sys.stderr)
    return conferences, population


def _write(path, data) -> None:
    report.write_artifact(path, data)
    log.info("wrote %s", path)


# --------------------------------------------------------------------------
# subcommands


def cmd_thresholds(args) -> int:
    _, population = _load_sources(args)
    table = cl.build_thresholds(population)
    for code, n in sorted(table.unrankable.items()):
        print(f"warning: category {code} has only {n} ranked source(s); no thresholds", file=sys.stderr)
    _write(args.out, report.emit_thresholds_csv(table.thresholds))
    print(f"{len(table.thresholds)} categories thresholded, {len(table.unrankable)} unrankable")
    return 0


def _exceptions_path(out: str) -> Path:
    p = Path(out)
    return p.with_name(f"{p.stem}_exceptions.csv")


def cmd_classify(args) -> int:
    conferences, population = _load_sources(args)
    table = cl.build_thresholds(population)
    exceptions = []
    counts = _parse(args.pubcounts, ingest.parse_pubcounts) if args.pubcounts else None
    resolved = []
    for conf in conferences:
        if not conf.categories and counts is not None:
            try:
                cats = cl.deduce_categories(conf.source_id, counts, args.deduce_threshold)
            except NoPublications:
                exceptions.append((conf.source_id, "", "no_publications"))
                continue
            conf = ingest.SourceRecord(conf.source_id, conf.title, conf.issns, conf.source_type, conf.status,
                                       conf.sjr, frozenset(cats))
        resolved.append(conf)
    crep = cl.ClassifyReport()
    assignments = cl.classify_conferences(resolved, table.thresholds, crep)
    for source_id in crep.no_categories:
        print(f"warning: conference {source_id} has no subject category", file=sys.stderr)
        exceptions.append((source_id, "", "no_categories"))
    for source_id, code in crep.skipped:
        exceptions.append((source_id, code, "no_thresholds"))
    titles = {c.source_id: c.title for c in resolved}
    _write(args.out, report.emit_classified_csv(assignments, titles))
    _write(_exceptions_path(args.out), report.emit_exceptions_csv(exceptions))
    n_sources = len({a.source_id for a in assignments})
    print(f"{n_sources} conferences classified ({len(assignments)} assignments), {len(exceptions)} exception(s)")
    return 0


def _in_selection(code: int, selector: int | None) -> bool:
    if selector is None:
        return True
    if selector % 100 == 0:
        return code // 100 == selector // 100
    return code == selector


def scoped_quartiles(assignments, mode: str, category: int | None) -> dict:
    """Quartile per in-scope conference.

    A conference is in scope when it holds an assignment in the selected
    category (a code ending in 00 selects the whole subject area). ``mode``
    ``category`` uses the best quartile inside the selection, ``best`` the
    best quartile over all its categories.
    """
    overall = cl.best_quartiles(assignments)
    selected = cl.best_quartiles(a for a in assignments if _in_selection(a.category.code, category))
    if mode == "best":
        return {sid: overall[sid] for sid in selected}
    return selected


def cmd_compare(args) -> int:
    assignments, titles = _parse(args.classified, report.read_classified_csv)
    entries = _parse(args.expert, ingest.parse_expert_csv)
    overrides = _parse(args.overrides, cmp.parse_overrides) if args.overrides else []
    category = None if args.category in (None, "all") else int(args.category)
    quartiles = scoped_quartiles(assignments, args.quartile_mode, category)
    conferences = [ingest.SourceRecord(sid, titles.get(sid, "")) for sid in sorted(quartiles)]
    try:
        matching = cmp.match_expert(conferences, entries, overrides, args.jaccard)
    except ConfRankError as exc:
        raise InputError(f"{args.overrides or args.expert}: {exc}") from exc
    stats = cmp.comparison_stats(quartiles, matching, entries)
    extra = {
        "n_in_scope": len(quartiles),
        "overlap_percent": cmp.format_percent(stats.overlap),
        "quartile_mode": args.quartile_mode,
        "category": args.category,
        "jaccard": args.jaccard,
    }
    _write(args.out, report.emit_comparison_json(stats, matching, extra))
    rho = "undefined" if stats.spearman_rho is None else f"{stats.spearman_rho:.3f}"
    print(
        f"matched {len(matching.matches)} of {len(quartiles)} in scope ({cmp.format_percent(stats.overlap)}); "
        f"pairs for rho: {stats.n_matched}; spearman rho: {rho}"
    )
    return 0


SCORE_COLUMNS = ["source_id", "title", "best_quartile", "track", "points"]


def cmd_score(args) -> int:
    assignments, titles = _parse(args.classified, report.read_classified_csv)
    if args.scheme in (None, "cmepp"):
        scheme = score.cmepp_scheme()
    else:
        scheme = _parse(args.scheme, score.load_scheme_csv, name=Path(args.scheme).stem)
    track = score.TRACK_ALIASES.get(args.track, args.track)
    rows = []
    for sid, q in sorted(cl.best_quartiles(assignments).items()):
        rows.append([sid, titles.get(sid, ""), q.name, track,
                     report.format_decimal(score.score_source(q, track, scheme))])
    _write(args.out, report.csv_bytes(SCORE_COLUMNS, rows))
    total = sum(float(r[-1]) for r in rows)
    print(f"{len(rows)} sources scored with {scheme.name}; total {report.format_decimal(total)} points")
    return 0


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()[:16]


def cmd_report(args) -> int:
    src = Path(args.in_dir)
    if not src.is_dir():
        raise FileNotFoundError(f"not a directory: {src}")
    out = Path(args.out_dir)
    meta = {"data year": args.data_year} if args.data_year else {}
    used = []

    def load(name, fn):
        p = src / name
        if not p.exists():
            return None
        used.append(p)
        return _parse(str(p), fn)

    thresholds = load("thresholds.csv", report.read_thresholds_csv)
    classified = load("classified.csv", report.read_classified_csv)
    exceptions = load("classified_exceptions.csv", report.read_exceptions_csv)
    comparison = load("comparison.json", lambda b: json.loads(ingest.read_text(b)))
    scores = load("scores.csv", lambda b: list(report.read_rows(b, SCORE_COLUMNS, "scores CSV")))
    if scores is not None:
        scores = [row for _, row in scores]
    shares = load("proceedings_counts.csv", _read_share_counts)
    for p in used:
        meta[f"input {p.name}"] = f"sha256:{_digest(p)}"
    if comparison:
        for key in ("quartile_mode", "category", "jaccard"):
            if key in comparison:
                meta[f"compare {key}"] = comparison[key]

    assignments = classified[0] if classified else None
    md = report.emit_markdown_report(
        thresholds=thresholds.values() if thresholds is not None else None,
        assignments=assignments,
        comparison=comparison,
        scores=scores,
        metadata=meta,
        exceptions=exceptions,
    )
    _write(out / "report.md", md)
    n_svg = 0
    if args.svg:
        if assignments:
            per_cat = {}
            for a in assignments:
                per_cat[a.category.code] = per_cat.get(a.category.code, 0) + 1
            _write(out / "conferences_per_category.svg",
                   report.emit_svg_bars([(str(k), v) for k, v in sorted(per_cat.items())],
                                        "Conference proceedings per subject category", "conferences"))
            n_svg += 1
            for code, row in cl.quartile_distribution(assignments).items():
                _write(out / f"quartiles_{code}.svg",
                       report.emit_svg_bars([(q.name, row[q]) for q in cl.Quartile],
                                            f"Quartiles of proceedings in {code} {ingest.asjc_name(code) or ''}".strip(),
                                            "conferences"))
                n_svg += 1
        if shares:
            _write(out / "proceedings_share.svg",
                   report.emit_svg_bars(sorted(shares.items()), "Share of proceedings in publications", "share"))
            n_svg += 1
    print(f"report written to {out / 'report.md'} ({n_svg} SVG chart(s))")
    return 0


def _read_share_counts(data: bytes) -> dict:
    counts = {}
    for lineno, row in report.read_rows(data, ["category", "proceedings_count", "total_count"],
                                         "proceedings counts CSV"):
        try:
            counts[row["category"]] = (int(row["proceedings_count"]), int(row["total_count"]))
        except ValueError as exc:
            raise ConfRankError(f"row {lineno}: {exc}") from exc
    return cmp.proceedings_share(counts)


# --------------------------------------------------------------------------


def _add_source_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scimago", required=True, help="SCImago export (CSV)")
    p.add_argument("--sources", required=True, help="canonical source list CSV")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="lenient", action="store_false", help="fail on the first bad row (default)")
    mode.add_argument("--lenient", dest="lenient", action="store_true", help="skip bad rows and report them")
    p.set_defaults(lenient=False)
    p.add_argument("--delimiter", default=None, help="SCImago delimiter (default: detect)")
    p.add_argument("--decimal", default=None, choices=[".", ","], help="SCImago decimal mark (default: detect)")
    p.add_argument("--out", required=True)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="confrank", description="Quartile ratings for conference proceedings.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("thresholds", help="per-category quartile thresholds")
    _add_source_args(p)
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("classify", help="assign conference proceedings to quartiles")
    _add_source_args(p)
    p.add_argument("--pubcounts", help="publication counts CSV for deducing missing categories")
    p.add_argument("--deduce-threshold", type=float, default=0.20)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("compare", help="align classified conferences with an expert ranking")
    p.add_argument("--classified", required=True)
    p.add_argument("--expert", required=True)
    p.add_argument("--overrides")
    p.add_argument("--jaccard", type=float, default=0.6)
    p.add_argument("--quartile-mode", choices=["category", "best"], default="category")
    p.add_argument("--category", default="1700",
                   help="ASJC code selecting the conferences in scope; NN00 selects a subject area, 'all' everything")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("score", help="apply a point scheme")
    p.add_argument("--classified", required=True)
    p.add_argument("--scheme", default="cmepp", help="'cmepp' or a track,class,points CSV")
    p.add_argument("--track", required=True, choices=["natural", "ssh"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("report", help="Markdown report and SVG charts from a run directory")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", dest="out_dir", required=True)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--data-year", help="label for the data year, passed through to the report")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfRankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
