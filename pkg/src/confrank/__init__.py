"""Quartile ratings for conference proceedings from SJR data.

Thresholds are computed per ASJC subject category from journals and book
series, conference proceedings are placed into Q1..Q4 against them, and the
result can be compared with an expert conference ranking and scored.
"""

from .classify import (
    CategoryThresholds,
    Quartile,
    QuartileAssignment,
    assign_quartile,
    best_quartile,
    build_thresholds,
    category_multiplicity,
    classify_conferences,
    compute_thresholds,
    deduce_categories,
)
from .compare import (
    DEFAULT_MAPPING,
    ContingencyTable,
    MatchResult,
    RankMapping,
    build_contingency,
    comparison_stats,
    format_percent,
    match_expert,
    normalize_venue_name,
    overlap_stats,
    proceedings_share,
    spearman_avg_rank,
)
from .ingest import (
    AsjcCode,
    ExpertEntry,
    Issn,
    PubCount,
    SourceRecord,
    SourceType,
    Status,
    merge_sources,
    normalize_issn,
    parse_expert_csv,
    parse_pubcounts,
    parse_scimago_csv,
    parse_source_list,
)
from .score import ScoreScheme, cmepp_scheme, score_source

__version__ = "0.1.0"
