"""
Exceptions raised by the analysis package
"""


class StatsError(Exception):
    """Base class for statistics errors"""


class InsufficientSampleError(StatsError, ValueError):
    """Too few values for the requested statistic"""


class DegenerateSampleError(StatsError, ValueError):
    """Sample carries no information for the test (e.g. all differences zero)"""


class SummaryInvariantError(StatsError, AssertionError):
    """A computed summary violates a structural invariant"""
