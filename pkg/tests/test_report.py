import json
import re

import pytest

from confrank.classify import CategoryThresholds, Quartile, QuartileAssignment
from confrank.compare import comparison_stats, match_expert
from confrank.errors import EmptySeries, IoFailure
from confrank.ingest import AsjcCode, asjc
from confrank.report import (
    emit_classified_csv,
    emit_comparison_json,
    emit_markdown_report,
    emit_svg_bars,
    emit_thresholds_csv,
    format_decimal,
    read_classified_csv,
    read_thresholds_csv,
    write_artifact,
)


def _assignments():
    return [
        QuartileAssignment("s2", asjc(1705), 0.5, Quartile.Q3),
        QuartileAssignment("s1", asjc(1702), 0.195, Quartile.Q2),
        QuartileAssignment("s2", asjc(1702), 0.5, Quartile.Q1),
        QuartileAssignment("s3", asjc(1702), 0.01, Quartile.Q4, True),
    ]


TITLES = {"s1": "IOP Conference Series, \"MSE\"", "s2": "Foo", "s3": "Bar"}


def test_format_decimal_has_no_exponent():
    assert format_decimal(0.195) == "0.195"
    assert format_decimal(1e-7) == "0.0000001"
    assert format_decimal(20) == "20.0"
    assert format_decimal(123456789.5) == "123456789.5"


def test_classified_csv_format_and_round_trip():
    data = emit_classified_csv(_assignments(), TITLES)
    lines = data.decode().splitlines()
    assert lines[0] == "source_id,title,asjc_code,sjr,quartile,clamped_below_q4,best_quartile"
    assert lines[2:4] == ["s2,Foo,1702,0.5,Q1,false,Q1", "s2,Foo,1705,0.5,Q3,false,Q1"]
    assert lines[4] == "s3,Bar,1702,0.01,Q4,true,Q4"
    assignments, titles = read_classified_csv(data)
    assert sorted(assignments, key=lambda a: (a.source_id, a.category)) == sorted(
        _assignments(), key=lambda a: (a.source_id, a.category)
    )
    assert titles == TITLES
    assert emit_classified_csv(assignments, titles) == data


def test_thresholds_csv_round_trip():
    ths = {1702: CategoryThresholds(asjc(1702), 40, 0.261, 0.139, 0.104, 0.1)}
    data = emit_thresholds_csv(ths)
    assert data.decode().splitlines()[1] == "1702,Artificial Intelligence,40,0.261,0.139,0.104,0.1"
    back = read_thresholds_csv(data)
    assert back[1702] == ths[1702]
    assert emit_thresholds_csv(back) == data


def test_comparison_json_fields(table1):
    m = match_expert(table1.conferences, table1.entries, table1.overrides)
    stats = comparison_stats(table1.quartiles, m, table1.entries)
    payload = json.loads(emit_comparison_json(stats, m))
    for key in ("n_matched", "overlap", "spearman_rho", "contingency", "matches", "unmatched_conferences", "unmatched_entries"):
        assert key in payload
    assert payload["contingency"]["rows"] == ["Q1", "Q2", "Q3", "Q4", "NA"]
    assert payload["contingency"]["cols"] == ["A*", "A", "B", "C", "NA"]
    assert payload["contingency"]["cells"][0] == [11, 4, 4, 1, 3]
    assert payload["matches"][0]["method"] == "override"
    assert emit_comparison_json(stats, m) == emit_comparison_json(stats, m)


def _bar_heights(svg: bytes):
    return [float(h) for h in re.findall(rb'class="bar"[^>]*height="([0-9.]+)"', svg)]


def test_svg_proportional_and_deterministic():
    svg = emit_svg_bars({"CS": 0.5, "Math": 0.3}, "Share", "share")
    h = _bar_heights(svg)
    assert len(h) == 2 and h[0] > h[1]
    assert h[1] / h[0] == pytest.approx(0.6, abs=1e-3)
    assert emit_svg_bars({"CS": 0.5, "Math": 0.3}, "Share", "share") == svg
    assert b"viewBox" in svg and b"<script" not in svg and b"@font-face" not in svg


def test_svg_single_full_height_and_escaping():
    svg = emit_svg_bars([("A & B", 7)], "<t>")
    assert _bar_heights(svg) == [240.0]
    assert b"A &amp; B" in svg and b"&lt;t&gt;" in svg


def test_svg_errors():
    with pytest.raises(EmptySeries):
        emit_svg_bars({})
    with pytest.raises(ValueError):
        emit_svg_bars({"x": -1})


def test_markdown_table1(table1):
    m = match_expert(table1.conferences, table1.entries, table1.overrides)
    stats = comparison_stats(table1.quartiles, m, table1.entries)
    payload = json.loads(emit_comparison_json(stats, m))
    md = emit_markdown_report(comparison=payload, metadata={"data year": "2018"})
    assert "| Q1 | 11 | 4 | 4 | 1 | 3 |" in md
    assert "| NA | 51 | 407 | 402 | 793 |  |" in md
    assert "0.452" in md and "62%" in md
    assert "- **data year**: 2018" in md


def test_markdown_empty_comparison_and_header_only():
    md = emit_markdown_report(comparison={}, metadata={"run": "x"})
    assert "No comparison data" in md
    header_only = emit_markdown_report(metadata={"run": "x"})
    assert header_only.splitlines()[0].startswith("# ")
    assert "## Quartile" not in header_only and "## Comparison" not in header_only


def test_markdown_full_sections():
    ths = [CategoryThresholds(asjc(1702), 40, 0.261, 0.139, 0.104, 0.1)]
    md = emit_markdown_report(
        thresholds=ths,
        assignments=_assignments(),
        scores=[{"best_quartile": "Q1", "points": "20"}, {"best_quartile": "Q2", "points": "10"}],
        metadata={"flag": "x"},
        exceptions=[("s9", "1711", "no_thresholds")],
    )
    assert "| 1702 | Artificial Intelligence | 40 | 0.261 | 0.139 | 0.104 | 0.1 |" in md
    assert "| 1702 | Artificial Intelligence | 1 | 1 | 0 | 1 | 3 |" in md
    assert "placed in Q4: s3" in md
    assert "1 category assignment(s) skipped" in md
    assert emit_markdown_report(thresholds=ths, assignments=_assignments()) == emit_markdown_report(
        thresholds=ths, assignments=_assignments()
    )


def test_write_artifact_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(IoFailure) as exc:
        write_artifact(blocker / "sub" / "out.csv", b"data")
    assert "out.csv" in str(exc.value)
    assert isinstance(exc.value, OSError)


def test_write_artifact_writes_lf_utf8(tmp_path):
    p = write_artifact(tmp_path / "a" / "r.md", "héllo\n")
    assert p.read_bytes() == "héllo\n".encode("utf-8")
