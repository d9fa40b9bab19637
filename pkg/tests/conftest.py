from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from confrank.classify import Quartile
from confrank.compare import Override, OverrideAction
from confrank.ingest import ExpertEntry, SourceRecord

# Published comparison of SJR quartiles (rows) against CORE grades A*, A, B, C (cols)
TABLE1_CORE = [
    [11, 4, 4, 1],
    [5, 7, 2, 1],
    [0, 2, 6, 1],
    [0, 0, 0, 1],
]
TABLE1_NA_COLUMN = [3, 7, 9, 9]
TABLE1_NA_ROW = [51, 407, 402, 793]
GRADES = ["A*", "A", "B", "C"]


def table1_pairs():
    xs, ys = [], []
    for i, row in enumerate(TABLE1_CORE):
        for j, n in enumerate(row):
            xs += [i + 1] * n
            ys += [j + 1] * n
    return xs, ys


class Table1Fixture:
    """Conferences, expert entries and overrides whose cross-tab is the published table."""

    def __init__(self, with_overrides: bool = True):
        self.conferences = []
        self.quartiles = {}
        self.entries = []
        self.overrides = []
        n_conf = n_entry = 0

        def conf(q, title=None):
            nonlocal n_conf
            n_conf += 1
            sid = f"S{n_conf:03d}"
            self.conferences.append(SourceRecord(sid, title or f"Proceedings Source {n_conf:03d}"))
            self.quartiles[sid] = Quartile(q)
            return sid

        def entry(grade, title=None, acronym=None):
            nonlocal n_entry
            n_entry += 1
            eid = f"E{n_entry:04d}"
            self.entries.append(ExpertEntry(eid, title or f"Expert Entry {n_entry:04d}", acronym, grade))
            return eid

        for i, row in enumerate(TABLE1_CORE):
            for j, n in enumerate(row):
                for _ in range(n):
                    if with_overrides:
                        sid = conf(i + 1)
                        eid = entry(GRADES[j])
                        self.overrides.append(Override(sid, eid, OverrideAction.MATCH))
                    else:
                        topic = f"Symposium on Topic {n_conf + 1:03d}"
                        conf(i + 1, f"Proceedings of the {topic}")
                        entry(GRADES[j], f"International {topic}")
        for i, n in enumerate(TABLE1_NA_COLUMN):
            for _ in range(n):
                conf(i + 1)
        for j, n in enumerate(TABLE1_NA_ROW):
            for _ in range(n):
                entry(GRADES[j])
        # non-mappable grades must not show up anywhere in the table
        entry("National: USA")
        entry("Unranked")


@pytest.fixture
def table1():
    return Table1Fixture()


# -- acceptance summary -----------------------------------------------------

ACCEPTANCE_RESULTS: dict = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS.setdefault(number, []).append((ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, 10):
        if n not in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(f"[SKIP] criterion {n}: not run (optional dataset absent or test deselected)")
        for ok, detail in ACCEPTANCE_RESULTS.get(n, ()):
            terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
