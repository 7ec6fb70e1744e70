"""Exception hierarchy shared by every latinlab module."""


class LatinLabError(Exception):
    """Base class for all library errors."""


class ValidationError(LatinLabError, ValueError):
    """An array fails the Latin rectangle/square invariants."""

    def __init__(self, message, row=None, col=None):
        if row is not None:
            where = f"row {row + 1}" if col is None else f"cell ({row + 1}, {col + 1})"
            message = f"{message} at {where}"
        super().__init__(message)
        self.row = row
        self.col = col


class ShapeError(ValidationError):
    """Ragged rows, wrong row count, or more rows than columns."""


class SymbolError(ValidationError):
    """A symbol outside 1..n."""


class RepeatError(ValidationError):
    """A symbol repeated within a row or a column."""


class CycleError(LatinLabError, ValueError):
    """The given column set is not a cycle of the row-pair permutation."""


class NotFlippable(LatinLabError, ValueError):
    """Rows 1 and 2 share a cycle of the column-pair permutation."""


class JoinPrecondition(LatinLabError, ValueError):
    """join(x, y) needs c_y to be a 2-cycle distinct from c_x."""


class TwistInvalid(LatinLabError, ValueError):
    """A twist choice violates one of the validity conditions.

    ``bullet`` is 1, 2 or 3 for the three validity conditions (Latin and
    good / untouched positions stay intercalate-free / exactly one new
    intercalate through the two anchor positions) and 0 when the six
    columns are not distinct.  ``reason`` is a short machine-readable tag.
    """

    def __init__(self, bullet, reason, detail=""):
        super().__init__(f"twist invalid (condition {bullet}, {reason}){': ' + detail if detail else ''}")
        self.bullet = bullet
        self.reason = reason


class ResourceError(LatinLabError, RuntimeError):
    """A configured search or size budget was exceeded."""
