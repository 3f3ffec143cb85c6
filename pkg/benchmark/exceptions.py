"""
Exceptions raised by the benchmark package
"""


class BenchmarkError(Exception):
    """Base class for benchmark generation errors"""


class BenchmarkConfigError(BenchmarkError, ValueError):
    """Benchmark configuration is invalid"""


class CurveRejectionError(BenchmarkError, RuntimeError):
    """Rejection sampling gave up before finding a valid curve"""
