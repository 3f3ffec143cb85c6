"""
Dataset module for BoundZNE
"""

from .dataset_utils import read_dataset, read_hardware_csv, read_results, write_dataset, write_results
from .exceptions import DatasetError, DatasetNotFoundError, DatasetValidationError, DatasetWriteError, LineIssue
from .summary_tables import (
    SummaryTable, build_summary_table, deltas_path, format_mean_sd, format_percent, format_sci,
    read_deltas, write_deltas, write_report, write_summary,
)

__all__ = [
    'read_dataset', 'write_dataset', 'read_results', 'write_results', 'read_hardware_csv',
    'DatasetError', 'DatasetNotFoundError', 'DatasetValidationError', 'DatasetWriteError', 'LineIssue',
    'SummaryTable', 'build_summary_table', 'write_summary', 'format_percent', 'format_sci', 'format_mean_sd',
    'deltas_path', 'write_deltas', 'read_deltas', 'write_report',
]
