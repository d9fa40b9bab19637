"""Exception types raised across the toolkit.

Every contract violation derives from :class:`ConfRankError` (a ``ValueError``),
so callers can catch one base class. File-system problems surface as
:class:`IoFailure`, which is an ``OSError``.
"""

from __future__ import annotations


class ConfRankError(ValueError):
    """Base class for input/contract errors."""


# ingest

class MalformedIssn(ConfRankError):
    pass


class ChecksumMismatch(ConfRankError):
    pass


class MissingColumn(ConfRankError):
    def __init__(self, column: str, source: str = ""):
        self.column = column
        where = f" in {source}" if source else ""
        super().__init__(f"missing required column {column!r}{where}")


class RowParseError(ConfRankError):
    """A single bad data row. ``row`` is the 1-based line number in the file."""

    def __init__(self, row: int, message: str):
        self.row = row
        self.message = message
        super().__init__(f"row {row}: {message}")


class UnknownEnumValue(RowParseError):
    pass


class EmptyFile(ConfRankError):
    pass


class DuplicateJoinKey(ConfRankError):
    pass


# classify

class EmptyPopulation(ConfRankError):
    pass


class PopulationTooSmall(ConfRankError):
    def __init__(self, size: int, category=None):
        self.size = size
        self.category = category
        label = f" for category {category}" if category is not None else ""
        super().__init__(f"population of {size} sources{label} is too small for quartiles (need >= 4)")


class NoCategories(ConfRankError):
    pass


class NoPublications(ConfRankError):
    pass


class EmptyAssignments(ConfRankError):
    pass


# compare

class EmptyAfterNormalization(ConfRankError):
    pass


class AmbiguousOverride(ConfRankError):
    pass


class DegenerateInput(ConfRankError):
    pass


class ZeroScope(ConfRankError):
    pass


class ZeroTotal(ConfRankError):
    pass


class CountExceedsTotal(ConfRankError):
    pass


# score / report

class UnknownTrack(ConfRankError):
    pass


class EmptySeries(ConfRankError):
    pass


class IoFailure(OSError):
    """Raised by emitters when writing an artifact fails; carries the path."""

    def __init__(self, path, cause: BaseException | None = None):
        self.path = str(path)
        msg = f"cannot write {self.path}"
        if cause is not None:
            msg += f": {cause}"
        super().__init__(msg)
