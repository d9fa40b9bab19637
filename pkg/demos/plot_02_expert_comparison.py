"""
Comparing with an expert conference ranking
===========================================

Link classified conferences to a CORE-style list, cross-tabulate quartiles
against expert grades and measure agreement with a tie-aware Spearman rho.
"""

# %%
from confrank import ExpertEntry, Quartile, SourceRecord, comparison_stats, match_expert
from confrank.compare import Override, OverrideAction, format_percent

conferences = [
    SourceRecord("S1", "Proceedings of the International Conference on Software Engineering"),
    SourceRecord("S2", "Proceedings - IEEE INFOCOM"),
    SourceRecord("S3", "Proceedings of the 12th Symposium on Data Mining Systems 2018"),
    SourceRecord("S4", "Procedia Computer Science"),
    SourceRecord("S5", "IEEE MTT-S International Microwave Symposium Digest"),
    SourceRecord("S6", "Annual Workshop on Obscure Topics"),
]
quartiles = {"S1": Quartile.Q1, "S2": Quartile.Q1, "S3": Quartile.Q3,
             "S4": Quartile.Q2, "S5": Quartile.Q2, "S6": Quartile.Q4}

entries = [
    ExpertEntry("1", "International Conference on Software Engineering", "ICSE", "A*"),
    ExpertEntry("2", "IEEE International Conference on Computer Communications", "INFOCOM", "A"),
    ExpertEntry("3", "Symposium on Data Mining Systems", "SDMS", "B"),
    ExpertEntry("4", "Conference on Something Else", "CSE", "C"),
    ExpertEntry("5", "Regional Meeting", "RM", "National: USA"),
]

# %%
# Umbrella series and out-of-field venues are kept out of matching with
# overrides; they still count as in scope.
overrides = [
    Override("S4", None, OverrideAction.AGGREGATOR),
    Override("S5", None, OverrideAction.EXCLUDE),
]
matching = match_expert(conferences, entries, overrides)
for m in matching.matches:
    print(m.source_id, "->", m.entry_id, m.method.value, round(m.score, 3))

# %%
# The 5x5 table puts unmatched conferences in the NA column and unmatched
# expert entries (with a mappable grade) in the NA row.
stats = comparison_stats(quartiles, matching, entries)
t = stats.contingency
print("      " + "  ".join(f"{c:>3}" for c in t.col_labels))
for label, row in zip(t.row_labels, t.counts):
    print(f"{label:>4}  " + "  ".join(f"{v:>3}" for v in row))
print("overlap", format_percent(stats.overlap), "rho", stats.spearman_rho)
