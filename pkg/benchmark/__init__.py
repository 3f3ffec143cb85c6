"""
Benchmark module for BoundZNE
"""

from .exceptions import BenchmarkConfigError, BenchmarkError, CurveRejectionError
from .ideal_registry import HARDWARE_LAMBDAS, Circuit, PauliObservable, hardware_record, ideal_registry_lookup
from .records import ExperimentRecord, format_lambda_set
from .synth import (
    DEFAULT_REGIMES, BenchmarkConfig, Dataset, Regime, TrueCurve, generate_dataset, sample_true_curve, shot_sample,
)

__all__ = [
    'ExperimentRecord', 'format_lambda_set', 'Regime', 'DEFAULT_REGIMES', 'TrueCurve', 'BenchmarkConfig', 'Dataset',
    'sample_true_curve', 'shot_sample', 'generate_dataset',
    'HARDWARE_LAMBDAS', 'Circuit', 'PauliObservable', 'ideal_registry_lookup', 'hardware_record',
    'BenchmarkError', 'BenchmarkConfigError', 'CurveRejectionError',
]
