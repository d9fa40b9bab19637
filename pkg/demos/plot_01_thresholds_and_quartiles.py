"""
Quartile thresholds and conference quartiles
============================================

Build a small journal/book-series population for one subject category,
derive its quartile thresholds and place a few conference proceedings.
"""

# %%
# A population of journals and book series, all in ASJC 2501
# (Materials Science, miscellaneous). SJR values are made up.
from confrank import SourceRecord, SourceType, build_thresholds, classify_conferences
from confrank.classify import best_quartiles
from confrank.ingest import asjc

materials = frozenset({asjc(2501)})
sjrs = [0.5, 0.261, 0.2, 0.139, 0.12, 0.104, 0.1, 0.1]
population = [
    SourceRecord(f"J{i}", f"Journal {i}", sjr=v, categories=materials)
    for i, v in enumerate(sjrs)
]

table = build_thresholds(population)
th = table.thresholds[2501]
print("thresholds for", th.category.code, th.category.name, "->", th.minima)

# %%
# Ranks are cut into four blocks of equal size (here 2 sources each); each
# threshold is the smallest SJR inside its block.

# %%
# Conferences take the best quartile whose threshold they reach. One sits
# below every journal and is pulled up into Q4 with a flag.
conferences = [
    SourceRecord("C1", "IOP Conference Series: Materials Science and Engineering",
                 source_type=SourceType.CONFERENCE_PROCEEDINGS, sjr=0.195, categories=materials),
    SourceRecord("C2", "Proceedings of Something Strong",
                 source_type=SourceType.CONFERENCE_PROCEEDINGS, sjr=0.3,
                 categories=frozenset({asjc(2501), asjc(1702)})),
    SourceRecord("C3", "Small Workshop Proceedings",
                 source_type=SourceType.CONFERENCE_PROCEEDINGS, sjr=0.05, categories=materials),
]
for a in classify_conferences(conferences, table.thresholds):
    print(a.source_id, a.category.code, a.sjr, a.quartile.name, "(clamped)" if a.clamped_below_q4 else "")

# %%
# C2 is also filed under 1702, which has no journals here, so only its
# materials-science quartile exists. The best quartile per source:
print(best_quartiles(classify_conferences(conferences, table.thresholds)))
