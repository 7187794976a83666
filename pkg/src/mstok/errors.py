"""Exception hierarchy.

Everything raised on purpose derives from :class:`MstokError` so callers can
catch toolkit failures in one clause.  Subclasses double as the standard
library types users expect (``ValueError``, ``IndexError``, ``LookupError``)
where that matches the failure mode.
"""


class MstokError(Exception):
    """Base class for all toolkit errors."""


class ParseError(MstokError):
    """A file could not be decoded.

    ``offset`` is the byte offset of the offending field (binary formats),
    ``row`` the zero-based line number (text formats); either may be None.
    """

    def __init__(self, message, *, offset=None, row=None):
        detail = message
        if offset is not None:
            detail = f"{message} (byte offset {offset})"
        elif row is not None:
            detail = f"{message} (row {row})"
        super().__init__(detail)
        self.offset = offset
        self.row = row


class FormatError(MstokError):
    """A container's magic string or structural framing is wrong."""


class TruncationError(MstokError):
    """Fewer payload bytes than the header promised."""

    def __init__(self, message, *, expected=None, actual=None):
        if expected is not None and actual is not None:
            message = f"{message}: expected {expected} bytes, got {actual}"
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class CalibrationError(MstokError):
    """Digital calibration range is degenerate (digital_min == digital_max)."""


class ParameterError(MstokError, ValueError):
    """An argument violates a documented precondition."""


class ShapeError(MstokError, ValueError):
    """Array dimensions disagree with what an operation requires."""


class BoundsError(MstokError, IndexError):
    """An index or token id falls outside its valid range."""


class ChannelLookupError(MstokError, LookupError):
    """A requested channel name cannot be resolved in a recording."""


class InsufficientDataError(MstokError, ValueError):
    """Not enough data points to perform the requested fit."""


class ContractError(MstokError):
    """Two components disagree on a shared convention (e.g. channel order)."""


class AlignmentError(MstokError):
    """Token and label streams cannot be aligned over the requested span."""


class DataError(MstokError, ValueError):
    """Data values are invalid for the operation (non-finite, missing class)."""
