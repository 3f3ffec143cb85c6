"""
Summary Tables for BoundZNE
Renders comparison reports as tab-separated tables, stores the paired
improvement vectors and writes plot-ready ECDF files with a text report
"""

import logging
import os
from dataclasses import dataclass, field

from analysis.paired_stats import ecdf_winsorized

from .dataset_utils import dump_line, read_json_lines, write_lines
from .exceptions import DatasetValidationError, DatasetWriteError, LineIssue

logger = logging.getLogger(__name__)

MISSING = 'NA'

METRIC_COLUMNS = (
    'k', 'cov_bounded', 'cov_unbounded', 'cov_matched',
    'excluded_bounded', 'excluded_unbounded',
    'mae_bounded', 'mae_unbounded', 'mse_bounded', 'mse_unbounded',
    'wilcoxon_p', 'holm_p', 'significant', 'cohens_d', 'd_category',
)


def format_percent(fraction):
    return f'{100.0 * fraction:.2f}%'


def format_sci(value):
    """Two significant digits with a bare exponent: 0.25 -> '2.5E-1'"""
    if value is None:
        return MISSING
    mantissa, exponent = f'{value:.1E}'.split('E')
    return f'{mantissa}E{int(exponent)}'


def format_mean_sd(stat):
    if stat is None:
        return MISSING
    return f'{format_sci(stat.mean)} ± {format_sci(stat.sd)}'


@dataclass
class SummaryTable:
    key_columns: tuple = ('family',)
    rows: list = field(default_factory=list)

    @property
    def columns(self):
        return tuple(self.key_columns) + METRIC_COLUMNS


def _summary_cells(summary, alpha):
    coverage = summary.coverage
    holm = summary.holm_adjusted_p
    effect = summary.effect
    return (
        str(summary.k),
        format_percent(coverage.coverage_bounded),
        format_percent(coverage.coverage_unbounded),
        format_percent(coverage.coverage_matched),
        str(summary.excluded_bounded),
        str(summary.excluded_unbounded),
        format_mean_sd(summary.mae_bounded),
        format_mean_sd(summary.mae_unbounded),
        format_mean_sd(summary.mse_bounded),
        format_mean_sd(summary.mse_unbounded),
        format_sci(summary.wilcoxon_p),
        format_sci(holm),
        MISSING if holm is None else ('yes' if holm < alpha else 'no'),
        MISSING if effect.d is None else f'{effect.d:.3f}',
        MISSING if effect.category is None else effect.category.value,
    )


def build_summary_table(report):
    """One row per group of a ComparisonReport, in group-key order"""
    table = SummaryTable(key_columns=('family',) + tuple(report.group_by))
    for summary in report.summaries:
        keys = tuple(str(part) for part in summary.group_key)
        table.rows.append(keys + _summary_cells(summary, report.alpha))
    return table


def write_summary(table, path):
    """Tab-separated table; an empty table still gets its header line"""
    lines = ['\t'.join(table.columns) + '\n']
    lines.extend('\t'.join(row) + '\n' for row in table.rows)
    write_lines(lines, path)


def deltas_path(summary_path):
    return f'{summary_path}.deltas.jsonl'


def write_deltas(report, path, extra_meta=None):
    """
    Header line with run metadata, then one line per group holding its
    improvement vector
    """
    meta = report.metadata()
    meta.update(extra_meta or {})
    lines = [dump_line({'meta': meta})]
    for summary in report.summaries:
        lines.append(dump_line({
            'group': list(summary.group_key),
            'k': summary.k,
            'delta': list(summary.delta),
            'fraction_positive': summary.fraction_positive,
            'holm_p': summary.holm_adjusted_p,
        }))
    write_lines(lines, path)


def read_deltas(path):
    """Returns (meta dict, list of group dicts)"""
    meta = None
    groups = []
    issues = []
    for line_number, data in read_json_lines(path):
        if isinstance(data, LineIssue):
            issues.append(data)
        elif isinstance(data, dict) and 'meta' in data and meta is None:
            meta = data['meta']
        elif isinstance(data, dict) and isinstance(data.get('group'), list) and isinstance(data.get('delta'), list):
            groups.append(data)
        else:
            issues.append(LineIssue(line_number, 'malformed', 'expected a meta header or a group line'))
    if meta is None:
        issues.append(LineIssue(1, 'malformed', 'missing meta header line'))
    if issues:
        raise DatasetValidationError(path, issues)
    return meta, groups


def _group_label(meta, group):
    names = ['family'] + list(meta.get('group_by', []))
    return ' '.join(f'{name}={value}' for name, value in zip(names, group))


def write_report(meta, groups, cap, out_dir):
    """
    One ECDF step-point file per group with data plus report.txt

    Returns:
        list of written paths, report.txt last
    """
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise DatasetWriteError(f'cannot create {out_dir}: {e}') from e

    written = []
    lines = [f'ECDF cap: +/-{cap:g}\n', f'alpha: {meta.get("alpha")}\n', '\n']
    for index, group in enumerate(groups):
        label = _group_label(meta, group['group'])
        if not group['delta']:
            lines.append(f'{label}\tk=0\tno matched pairs\n')
            continue
        curve = ecdf_winsorized(group['delta'], cap)
        ecdf_file = os.path.join(out_dir, f'ecdf_{index}.tsv')
        write_lines(
            ['# ' + label + '\n', 'x\tF\n'] + [f'{x!r}\t{f!r}\n' for x, f in curve.points],
            ecdf_file,
        )
        written.append(ecdf_file)
        holm = group.get('holm_p')
        lines.append(
            f'{label}\tk={curve.n}\tdelta>0: {format_percent(curve.fraction_positive)}'
            f'\tholm_p: {format_sci(holm)}\tfile: {os.path.basename(ecdf_file)}\n'
        )

    report_file = os.path.join(out_dir, 'report.txt')
    write_lines(lines, report_file)
    written.append(report_file)
    logger.info('Wrote %d ECDF files to %s', len(written) - 1, out_dir)
    return written
