"""Exception hierarchy shared by all svsi modules."""


class SvsiError(Exception):
    """Base class for every error raised by this package."""


class ParseError(SvsiError):
    """A CSV row could not be parsed. ``line`` is 1-based and counts the header."""

    def __init__(self, line, message="malformed row"):
        self.line = line
        super().__init__(f"line {line}: {message}")


class GridError(SvsiError):
    """Time axis is not strictly increasing / uniform, or two grids disagree."""


class TimelineError(SvsiError):
    """Event timeline is out of order or outside the sampled span."""


class DegenerateBaseError(SvsiError):
    """Pre-fault reference voltage is not strictly positive."""


class WindowError(SvsiError):
    """Requested analysis window holds too few samples."""


class InsufficientHorizonError(SvsiError):
    """Trace ends before the recovery diagnostic window closes."""


class SpecError(SvsiError):
    """Synthetic waveform specification violates its invariants."""


class UnsupportedSpecError(SvsiError):
    """No analytic landmarks exist for this waveform specification."""


class StudyError(SvsiError):
    """Placement study manifest is incomplete or one of its cells failed."""

    def __init__(self, message, cell=None):
        self.cell = cell
        if cell is not None:
            message = f"{message} [contingency={cell[0]!r}, location={cell[1]!r}, bus={cell[2]!r}]"
        super().__init__(message)


class ManifestError(SvsiError):
    """Batch manifest is missing, unreadable or malformed."""
