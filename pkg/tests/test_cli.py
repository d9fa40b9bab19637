import csv
import io
import json

import pytest

from confrank.classify import QuartileAssignment
from confrank.cli import main
from confrank.ingest import asjc
from confrank.report import emit_classified_csv

SCIMAGO = """Sourceid;Title;Type;Issn;SJR;Categories
1;Journal A;journal;;0,5;Materials Science (miscellaneous) (Q1)
2;Journal B;journal;;0,261;Materials Science (miscellaneous) (Q1)
3;Journal C;journal;;0,2;Materials Science (miscellaneous) (Q2)
4;Journal D;journal;;0,139;Materials Science (miscellaneous) (Q2)
5;Journal E;journal;;0,12;Materials Science (miscellaneous) (Q3)
6;Journal F;journal;;0,104;Materials Science (miscellaneous) (Q3)
7;Series G;book series;;0,1;Materials Science (miscellaneous) (Q4)
8;Series H;book series;;0,1;Materials Science (miscellaneous) (Q4)
9;Lonely Journal;journal;;3,0;Software (Q1)
100;IOP Conference Series: Materials Science and Engineering;conference and proceedings;1757899X;0,195;Materials Science (miscellaneous)
101;Uncategorized Proceedings;conference and proceedings;;0,3;
102;Old Proceedings;conference and proceedings;;0,3;Materials Science (miscellaneous)
"""

SOURCES = """source_id,title,issn,e_issn,type,status,asjc_codes
1,Journal A,,,journal,ongoing,
2,Journal B,,,journal,ongoing,
3,Journal C,,,journal,ongoing,
4,Journal D,,,journal,ongoing,
5,Journal E,,,journal,ongoing,
6,Journal F,,,journal,ongoing,
7,Series G,,,book series,ongoing,
8,Series H,,,book series,ongoing,
9,Lonely Journal,,,journal,ongoing,
100,IOP Conference Series: Materials Science and Engineering,1757-899X,,conference proceedings,ongoing,
101,Uncategorized Proceedings,,,conference proceedings,ongoing,
102,Old Proceedings,,,conference proceedings,discontinued,
"""

PUBCOUNTS = """source_id,asjc_code,publication_count
101,2501,60
101,1712,40
"""


@pytest.fixture
def inputs(tmp_path):
    (tmp_path / "scimago.csv").write_text(SCIMAGO)
    (tmp_path / "sources.csv").write_text(SOURCES)
    (tmp_path / "pubcounts.csv").write_text(PUBCOUNTS)
    return tmp_path


def _rows(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def test_thresholds_ok(inputs, capsys):
    out = inputs / "thresholds.csv"
    rc = main(["thresholds", "--scimago", str(inputs / "scimago.csv"), "--sources", str(inputs / "sources.csv"), "--out", str(out)])
    assert rc == 0
    rows = _rows(out)
    assert rows == [
        {"asjc_code": "2501", "category_name": "Materials Science (miscellaneous)", "population_size": "8",
         "q1_min": "0.261", "q2_min": "0.139", "q3_min": "0.104", "q4_min": "0.1"}
    ]
    captured = capsys.readouterr()
    assert "1712" in captured.err  # the one-journal category is unrankable


def test_thresholds_missing_column(inputs, capsys):
    (inputs / "bad.csv").write_text(SCIMAGO.replace("Title;", "Name;"))
    rc = main(["thresholds", "--scimago", str(inputs / "bad.csv"), "--sources", str(inputs / "sources.csv"), "--out", str(inputs / "t.csv")])
    assert rc == 1
    assert "'title'" in capsys.readouterr().err


def test_thresholds_unreadable(inputs):
    rc = main(["thresholds", "--scimago", str(inputs / "nope.csv"), "--sources", str(inputs / "sources.csv"), "--out", str(inputs / "t.csv")])
    assert rc == 2


def test_strict_and_lenient(inputs):
    (inputs / "dirty.csv").write_text(SCIMAGO + "55;Broken;journal;03785954;1,0;Software (Q1)\n")
    args = ["thresholds", "--scimago", str(inputs / "dirty.csv"), "--sources", str(inputs / "sources.csv"), "--out", str(inputs / "t.csv")]
    assert main(args) == 1
    assert main(args + ["--lenient"]) == 0


def _classify(inputs, *extra):
    out = inputs / "classified.csv"
    rc = main(["classify", "--scimago", str(inputs / "scimago.csv"), "--sources", str(inputs / "sources.csv"),
               "--out", str(out), *extra])
    return rc, out


def test_classify_worked_example(inputs, capsys):
    rc, out = _classify(inputs)
    assert rc == 0
    rows = _rows(out)
    assert [(r["source_id"], r["asjc_code"], r["quartile"], r["sjr"]) for r in rows] == [("100", "2501", "Q2", "0.195")]
    exceptions = _rows(inputs / "classified_exceptions.csv")
    assert exceptions == [{"source_id": "101", "asjc_code": "", "reason": "no_categories"}]
    assert "101" in capsys.readouterr().err


def test_classify_deduces_categories(inputs):
    rc, out = _classify(inputs, "--pubcounts", str(inputs / "pubcounts.csv"))
    assert rc == 0
    rows = _rows(out)
    got = {(r["source_id"], r["asjc_code"]) for r in rows}
    assert ("101", "2501") in got
    skipped = {(e["source_id"], e["asjc_code"]) for e in _rows(inputs / "classified_exceptions.csv")}
    # 1712 was deduced too but has no thresholds
    assert ("101", "1712") in skipped

    rc, _ = _classify(inputs, "--pubcounts", str(inputs / "pubcounts.csv"), "--deduce-threshold", "0.5")
    skipped = {(e["source_id"], e["asjc_code"]) for e in _rows(inputs / "classified_exceptions.csv")}
    assert ("101", "1712") not in skipped


def test_classify_output_deterministic(inputs):
    _, out = _classify(inputs)
    first = out.read_bytes()
    _, out = _classify(inputs)
    assert out.read_bytes() == first


def _write_table1(tmp_path, fx):
    assignments = [QuartileAssignment(c.source_id, asjc(1702), 1.0, fx.quartiles[c.source_id]) for c in fx.conferences]
    titles = {c.source_id: c.title for c in fx.conferences}
    (tmp_path / "classified.csv").write_bytes(emit_classified_csv(assignments, titles))
    with open(tmp_path / "expert.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["entry_id", "title", "acronym", "rank"])
        for e in fx.entries:
            w.writerow([e.entry_id, e.title, e.acronym or "", e.rank_label])
    with open(tmp_path / "overrides.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["source_id", "entry_id", "action"])
        for o in fx.overrides:
            w.writerow([o.source_id, o.entry_id or "", o.action.value])


def test_compare_table1(tmp_path, table1, capsys):
    _write_table1(tmp_path, table1)
    out = tmp_path / "comparison.json"
    rc = main(["compare", "--classified", str(tmp_path / "classified.csv"), "--expert", str(tmp_path / "expert.csv"),
               "--overrides", str(tmp_path / "overrides.csv"), "--out", str(out)])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "spearman rho: 0.452" in stdout and "(62%)" in stdout
    payload = json.loads(out.read_text())
    assert payload["n_matched"] == 45
    assert payload["contingency"]["cells"][4] == [51, 407, 402, 793, 0]


def test_compare_no_matches(tmp_path, table1, capsys):
    _write_table1(tmp_path, table1)
    rc = main(["compare", "--classified", str(tmp_path / "classified.csv"), "--expert", str(tmp_path / "expert.csv"),
               "--out", str(tmp_path / "c.json")])
    assert rc == 0
    assert "spearman rho: undefined" in capsys.readouterr().out


def test_compare_bad_overrides(tmp_path, table1, capsys):
    _write_table1(tmp_path, table1)
    (tmp_path / "bad.csv").write_text("source_id,entry_id,action\nS001,E0001,match\nS002,,sometimes\n")
    rc = main(["compare", "--classified", str(tmp_path / "classified.csv"), "--expert", str(tmp_path / "expert.csv"),
               "--overrides", str(tmp_path / "bad.csv"), "--out", str(tmp_path / "c.json")])
    assert rc == 1
    assert "row 3" in capsys.readouterr().err


def test_compare_category_selection(tmp_path, table1):
    _write_table1(tmp_path, table1)
    out = tmp_path / "c.json"
    rc = main(["compare", "--classified", str(tmp_path / "classified.csv"), "--expert", str(tmp_path / "expert.csv"),
               "--overrides", str(tmp_path / "overrides.csv"), "--category", "2600", "--out", str(out)])
    assert rc == 0
    assert json.loads(out.read_text())["n_in_scope"] == 0


def _score(inputs, track, scheme="cmepp"):
    _classify(inputs)
    out = inputs / "scores.csv"
    rc = main(["score", "--classified", str(inputs / "classified.csv"), "--scheme", scheme, "--track", track, "--out", str(out)])
    assert rc == 0
    return _rows(out)


def test_score_natural_and_ssh(inputs, tmp_path):
    rows = [QuartileAssignment("x1", asjc(1702), 2.0, __import__("confrank").Quartile.Q1)]
    (tmp_path / "classified.csv").write_bytes(emit_classified_csv(rows, {"x1": "Top"}))
    out = tmp_path / "s.csv"
    assert main(["score", "--classified", str(tmp_path / "classified.csv"), "--track", "natural", "--out", str(out)]) == 0
    assert _rows(out)[0]["points"] == "20.0"
    assert _score(inputs, "natural")[0]["points"] == "10.0"
    assert all(r["points"] == "3.0" for r in _score(inputs, "ssh"))


def test_report_run_directory(inputs, capsys):
    _classify(inputs)
    main(["thresholds", "--scimago", str(inputs / "scimago.csv"), "--sources", str(inputs / "sources.csv"),
          "--out", str(inputs / "thresholds.csv")])
    _score(inputs, "natural")
    (inputs / "proceedings_counts.csv").write_text("category,proceedings_count,total_count\nCS,600,1000\nBio,5,1000\n")
    out = inputs / "out"
    rc = main(["report", "--in", str(inputs), "--out", str(out), "--svg", "--data-year", "2018"])
    assert rc == 0
    md = (out / "report.md").read_text()
    assert "## Quartile thresholds" in md and "**data year**: 2018" in md and "sha256:" in md
    assert (out / "quartiles_2501.svg").exists()
    assert (out / "conferences_per_category.svg").exists()
    share_svg = (out / "proceedings_share.svg").read_text()
    assert "CS" in share_svg and "Bio" not in share_svg
    first = (out / "report.md").read_bytes()
    main(["report", "--in", str(inputs), "--out", str(out), "--svg", "--data-year", "2018"])
    assert (out / "report.md").read_bytes() == first


def test_report_missing_dir(tmp_path):
    assert main(["report", "--in", str(tmp_path / "none"), "--out", str(tmp_path / "o")]) == 2
