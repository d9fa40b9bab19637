"""
Scoring and reporting
=====================

Score classified conferences with the CMEPP point scale and write the
Markdown report plus an SVG chart.
"""

# %%
import tempfile
from pathlib import Path

from confrank import Quartile, cmepp_scheme, score_source
from confrank.classify import QuartileAssignment
from confrank.ingest import asjc
from confrank.report import emit_markdown_report, emit_svg_bars, write_artifact

scheme = cmepp_scheme()
for q in Quartile:
    print(q.name, "natural:", score_source(q, "natural", scheme), "ssh:", score_source(q, "ssh", scheme))
print("other indexed, natural:", score_source("other_indexed", "natural", scheme))

# %%
# A conference in Q2 now earns 10 points where a flat "other" rule gave 1.
assignments = [
    QuartileAssignment("C1", asjc(1702), 1.9, Quartile.Q1),
    QuartileAssignment("C2", asjc(1702), 0.4, Quartile.Q2),
    QuartileAssignment("C2", asjc(1705), 0.4, Quartile.Q3),
    QuartileAssignment("C3", asjc(1705), 0.01, Quartile.Q4, True),
]

out = Path(tempfile.mkdtemp(prefix="confrank-demo-"))
md = emit_markdown_report(assignments=assignments, metadata={"data year": "2018", "demo": "yes"})
write_artifact(out / "report.md", md)
write_artifact(out / "share.svg", emit_svg_bars({"Computer Science": 0.62, "Engineering": 0.35, "Mathematics": 0.18},
                                                 "Share of proceedings", "share"))
print(md)
print("written to", out)
