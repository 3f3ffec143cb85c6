"""
Dataset Utilities for BoundZNE
Handles reading and writing experiment datasets, per-record fit results
and hardware measurement exports
"""

import csv
import json
import logging
import math
import os
from collections import defaultdict

from analysis.comparison import ResultRow
from benchmark.ideal_registry import hardware_record
from benchmark.records import ExperimentRecord
from extrapolation.engine import FitResult

from .exceptions import DatasetNotFoundError, DatasetValidationError, DatasetWriteError, LineIssue

logger = logging.getLogger(__name__)

RECORD_KEYS = ('id', 'curve_id', 'backend', 'lambdas', 'expectations', 'ideal', 'repetition', 'shots')

HARDWARE_COLUMNS = ('circuit', 'observable', 'width', 'backend', 'repetition', 'shots', 'lambda', 'expectation')


def dump_line(data):
    """One JSON line with stable key order; floats use the shortest round-trip repr"""
    return json.dumps(data, sort_keys=True, separators=(',', ':'), allow_nan=False) + '\n'


def write_lines(lines, path):
    try:
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            for line in lines:
                f.write(line)
    except OSError as e:
        raise DatasetWriteError(f'cannot write {path}: {e}') from e


def read_json_lines(path):
    """Yield (line number, parsed object or LineIssue) for every non-blank line"""
    if not os.path.exists(path):
        raise DatasetNotFoundError(f'no such file: {path}')
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                yield line_number, json.loads(line)
            except json.JSONDecodeError as e:
                yield line_number, LineIssue(line_number, 'malformed', f'invalid JSON: {e.msg}')


def record_to_dict(record):
    data = {
        'id': record.id,
        'curve_id': record.curve_id,
        'backend': record.backend_tag,
        'lambdas': list(record.lambdas),
        'expectations': list(record.expectations),
        'ideal': record.ideal,
        'repetition': record.repetition,
        'shots': record.shots,
    }
    if record.meta:
        data['meta'] = dict(record.meta)
    return data


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _is_integer(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _shape_problems(data):
    """Type/shape problems that make a line malformed rather than invalid"""
    if not isinstance(data, dict):
        return ['line is not a JSON object']
    problems = [f'missing key {key!r}' for key in RECORD_KEYS if key not in data]
    if problems:
        return problems
    for key in ('id', 'curve_id', 'backend'):
        if not isinstance(data[key], str):
            problems.append(f'{key} must be a string')
    for key in ('lambdas', 'expectations'):
        if not isinstance(data[key], list) or not all(_is_number(v) for v in data[key]):
            problems.append(f'{key} must be an array of numbers')
    if not _is_number(data['ideal']):
        problems.append('ideal must be a number')
    for key in ('repetition', 'shots'):
        if not _is_integer(data[key]):
            problems.append(f'{key} must be an integer')
    meta = data.get('meta', {})
    if not isinstance(meta, dict) or not all(isinstance(v, str) for v in meta.values()):
        problems.append('meta must be a map of strings')
    return problems


def record_from_dict(data):
    return ExperimentRecord(
        id=data['id'],
        curve_id=data['curve_id'],
        backend_tag=data['backend'],
        lambdas=data['lambdas'],
        expectations=data['expectations'],
        ideal=data['ideal'],
        repetition=data['repetition'],
        shots=data['shots'],
        meta=data.get('meta', {}),
    )


def write_dataset(records, path):
    """Write records as JSON lines, one record per line"""
    write_lines((dump_line(record_to_dict(record)) for record in records), path)


def read_dataset(path):
    """
    Read and validate a dataset file

    Args:
        path: dataset file written by write_dataset

    Returns:
        list of ExperimentRecord

    Raises:
        DatasetNotFoundError: the file does not exist
        DatasetValidationError: one or more lines are malformed or break a
            record invariant; every offending line is listed
    """
    records = []
    issues = []
    for line_number, data in read_json_lines(path):
        if isinstance(data, LineIssue):
            issues.append(data)
            continue
        shape = _shape_problems(data)
        if shape:
            issues.append(LineIssue(line_number, 'malformed', '; '.join(shape)))
            continue
        try:
            records.append(record_from_dict(data))
        except ValueError as e:
            issues.append(LineIssue(line_number, 'invariant', str(e)))

    if issues:
        raise DatasetValidationError(path, issues)
    logger.debug('Read %d records from %s', len(records), path)
    return records


def result_to_dict(record, item):
    data = item.result.to_dict()
    data.update({
        'record_id': record.id,
        'curve_id': record.curve_id,
        'backend': record.backend_tag,
        'lambda_set': record.lambda_set,
        'width': record.width,
        'ideal': record.ideal,
        'repetition': record.repetition,
    })
    return data


def _finite_or_none(value):
    return value if value is None or math.isfinite(value) else None


def write_results(items, records, path):
    """
    Write BatchItems from fit_batch as JSON lines, with the record context
    needed for pairing
    """
    by_id = {record.id: record for record in records}
    lines = []
    for item in items:
        data = result_to_dict(by_id[item.record_id], item)
        data['zne_estimate'] = _finite_or_none(data['zne_estimate'])
        data['sse'] = _finite_or_none(data['sse'])
        lines.append(dump_line(data))
    write_lines(lines, path)


def read_results(path):
    """Read a results file into ResultRows"""
    rows = []
    issues = []
    for line_number, data in read_json_lines(path):
        if isinstance(data, LineIssue):
            issues.append(data)
            continue
        try:
            rows.append(ResultRow(
                record_id=data['record_id'],
                curve_id=data['curve_id'],
                backend=data['backend'],
                lambda_set=data['lambda_set'],
                width=data['width'],
                ideal=float(data['ideal']),
                result=FitResult.from_dict(data),
            ))
        except (KeyError, TypeError, ValueError) as e:
            issues.append(LineIssue(line_number, 'malformed', f'bad result line: {e}'))

    if issues:
        raise DatasetValidationError(path, issues)
    return rows


def read_hardware_csv(path):
    """
    Group long-format hardware measurements into ExperimentRecords

    One CSV row per (run, lambda); rows sharing circuit, observable, width,
    backend and repetition form one record. Ideal values come from the
    ideal-value registry.
    """
    if not os.path.exists(path):
        raise DatasetNotFoundError(f'no such file: {path}')

    runs = defaultdict(list)
    issues = []
    with open(path, 'r', encoding='utf-8', newline='') as f:
        reader = csv.DictReader(f)
        missing = [c for c in HARDWARE_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise DatasetValidationError(path, [LineIssue(1, 'malformed', f'missing column(s) {missing}')])
        for row in reader:
            try:
                key = (row['backend'].strip(), row['circuit'].strip().lower(), row['observable'].strip().lower(),
                       row['width'].strip(), int(row['repetition']))
                runs[key].append((reader.line_num, int(row['shots']), float(row['lambda']), float(row['expectation'])))
            except (TypeError, ValueError) as e:
                issues.append(LineIssue(reader.line_num, 'malformed', f'bad value: {e}'))

    records = []
    for (backend, circuit, observable, width, repetition), points in sorted(runs.items()):
        first_line = points[0][0]
        shots = {p[1] for p in points}
        if len(shots) != 1:
            issues.append(LineIssue(first_line, 'invariant', f'inconsistent shot counts {sorted(shots)}'))
            continue
        points.sort(key=lambda p: p[2])
        try:
            records.append(hardware_record(
                circuit, observable, width, backend, repetition, shots.pop(),
                lambdas=[p[2] for p in points], expectations=[p[3] for p in points],
            ))
        except (KeyError, ValueError) as e:
            issues.append(LineIssue(first_line, 'invariant', str(e)))

    if issues:
        raise DatasetValidationError(path, issues)
    return records
