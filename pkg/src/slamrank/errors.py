"""Exception hierarchy shared by every slamrank module."""


class SlamRankError(Exception):
    """Base class for all slamrank errors."""


class InvalidGradeError(SlamRankError, ValueError):
    """A relevance grade is negative, non-integer or above the allowed maximum."""


class InvalidRankError(SlamRankError, ValueError):
    """A rank position is smaller than 1."""


class InvalidCutoffError(SlamRankError, ValueError):
    """A truncation level k lies outside 1..m."""


class InvalidRelevanceError(SlamRankError, ValueError):
    """The relevance vector does not fit the measure (e.g. non-binary for MAP)."""


class DimensionError(SlamRankError, ValueError):
    """Array shapes do not agree."""


class DegenerateWeightsError(SlamRankError, ValueError):
    """A weight vector has no positive entry where one is required."""


class ParameterError(SlamRankError, ValueError):
    """A numeric parameter is out of its admissible range."""


class SizeError(SlamRankError, ValueError):
    """An exhaustive routine was asked for a problem that is too large."""


class ParseError(SlamRankError, ValueError):
    """A ranking data file is malformed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyDatasetError(SlamRankError, ValueError):
    """A data source contained no queries."""


class FormatError(SlamRankError, ValueError):
    """A model or sidecar file does not follow its declared format."""


class DivergenceError(SlamRankError, RuntimeError):
    """An optimizer produced a non-finite objective."""
