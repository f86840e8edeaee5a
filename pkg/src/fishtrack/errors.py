"""Exception hierarchy shared across the pipeline.

The CLI maps these onto exit codes: usage problems -> 1, data problems -> 2,
numerical failures -> 3.
"""


class FishtrackError(Exception):
    """Base class for all pipeline errors."""


class DataError(FishtrackError):
    """Unusable input: bad file, missing column, empty dataset, bad config."""


class NumericalError(FishtrackError):
    """A numerical routine failed (e.g. ill-conditioned innovation covariance)."""
