"""Point schemes that turn a source class into evaluation points."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Union

from .classify import Quartile
from .errors import ConfRankError, MissingColumn, RowParseError, UnknownTrack
from .ingest import ByteSource, read_text

NATURAL = "natural_engineering_life"
SOCIAL = "social_humanities"
TRACKS = (NATURAL, SOCIAL)
OTHER_INDEXED = "other_indexed"
CLASSES = ("Q1", "Q2", "Q3", "Q4", OTHER_INDEXED)

TRACK_ALIASES = {"natural": NATURAL, "ssh": SOCIAL, NATURAL: NATURAL, SOCIAL: SOCIAL}

SourceClass = Union[Quartile, str]


def _class_key(cls: SourceClass) -> str:
    if isinstance(cls, Quartile):
        return cls.name
    key = str(cls).strip()
    if key.upper() in CLASSES[:4]:
        return key.upper()
    if key.lower() == OTHER_INDEXED:
        return OTHER_INDEXED
    raise ConfRankError(f"unknown source class {cls!r}")


def _track_key(track: str) -> str:
    try:
        return TRACK_ALIASES[track.strip().lower()]
    except (KeyError, AttributeError):
        raise UnknownTrack(f"unknown track {track!r}; expected one of {', '.join(TRACKS)}") from None


@dataclass(frozen=True)
class ScoreScheme:
    name: str
    track_rules: Mapping = field(default_factory=dict)

    def __post_init__(self):
        rules = {}
        for (track, cls), points in dict(self.track_rules).items():
            points = float(points)
            if not points >= 0:
                raise ConfRankError(f"negative points for ({track}, {cls}) in scheme {self.name}")
            rules[(_track_key(track), _class_key(cls))] = points
        missing = [(t, c) for t in TRACKS for c in CLASSES if (t, c) not in rules]
        if missing:
            raise ConfRankError(f"scheme {self.name} lacks points for {missing}")
        object.__setattr__(self, "track_rules", MappingProxyType(rules))

    def points(self, track: str, cls: SourceClass) -> float:
        return self.track_rules[(_track_key(track), _class_key(cls))]


def cmepp_scheme() -> ScoreScheme:
    """20/10/5/2.5 by quartile and 1 otherwise; a flat 3 for social sciences and humanities."""
    natural = {"Q1": 20.0, "Q2": 10.0, "Q3": 5.0, "Q4": 2.5, OTHER_INDEXED: 1.0}
    rules = {(NATURAL, c): p for c, p in natural.items()}
    rules.update({(SOCIAL, c): 3.0 for c in CLASSES})
    return ScoreScheme("cmepp", rules)


def score_source(classification: SourceClass, track: str, scheme: ScoreScheme | None = None) -> float:
    scheme = scheme or cmepp_scheme()
    return scheme.points(track, classification)


def load_scheme_csv(stream: ByteSource, name: str = "custom") -> ScoreScheme:
    """Read a ``track,class,points`` table; every (track, class) must appear."""
    text = read_text(stream)
    reader = csv.reader(io.StringIO(text, newline=""))
    header = [h.strip().lower() for h in next(reader, [])]
    for col in ("track", "class", "points"):
        if col not in header:
            raise MissingColumn(col, "scheme file")
    it, ic, ip = header.index("track"), header.index("class"), header.index("points")
    rules = {}
    for lineno, row in enumerate(reader, start=2):
        if not any(c.strip() for c in row):
            continue
        try:
            key = (_track_key(row[it]), _class_key(row[ic]))
            rules[key] = float(row[ip])
        except (IndexError, ValueError) as exc:
            raise RowParseError(lineno, str(exc)) from exc
    return ScoreScheme(name, rules)
