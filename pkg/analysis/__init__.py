"""
Analysis module for BoundZNE
"""

from .comparison import GROUP_FIELDS, ComparisonReport, ResultRow, compare_results, parse_group_by
from .exceptions import DegenerateSampleError, InsufficientSampleError, StatsError, SummaryInvariantError
from .paired_stats import (
    PairedSummary, cohens_d_paired, coverage_summary, ecdf_winsorized, holm_adjust, improvement, mae, mse,
    summarize_pairs, wilcoxon_signed_rank,
)

__all__ = [
    'mae', 'mse', 'improvement', 'wilcoxon_signed_rank', 'holm_adjust', 'cohens_d_paired', 'ecdf_winsorized',
    'coverage_summary', 'summarize_pairs', 'PairedSummary',
    'ResultRow', 'ComparisonReport', 'compare_results', 'parse_group_by', 'GROUP_FIELDS',
    'StatsError', 'InsufficientSampleError', 'DegenerateSampleError', 'SummaryInvariantError',
]
