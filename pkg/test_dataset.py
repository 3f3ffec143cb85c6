import json
import os

import pytest

from analysis.comparison import compare_results
from analysis.paired_stats import MeanSd
from dataset.dataset_utils import (
    dump_line, read_dataset, read_hardware_csv, read_results, record_to_dict, write_dataset, write_results,
)
from dataset.exceptions import DatasetNotFoundError, DatasetValidationError, DatasetWriteError
from dataset.summary_tables import (
    METRIC_COLUMNS, SummaryTable, build_summary_table, deltas_path, format_mean_sd, format_percent, format_sci,
    read_deltas, write_deltas, write_report, write_summary,
)
from extrapolation.engine import fit_batch
from extrapolation.models import parse_model_spec

HARDWARE_CSV = """circuit,observable,width,backend,repetition,shots,lambda,expectation
ghz,z,3,device-a,0,10000,1.3,0.71
ghz,z,3,device-a,0,10000,1.0,0.78
ghz,z,3,device-a,0,10000,1.6,0.66
wstate,z,3,device-a,0,10000,1.0,-0.62
wstate,z,3,device-a,0,10000,1.3,-0.55
wstate,z,3,device-a,0,10000,1.6,-0.49
"""


def write_text(path, text):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text)


def read_bytes(path):
    with open(path, 'rb') as f:
        return f.read()


def test_dump_line_is_canonical():
    assert dump_line({'b': 1, 'a': [0.25, 1.0]}) == '{"a":[0.25,1.0],"b":1}\n'
    with pytest.raises(ValueError):
        dump_line({'a': float('nan')})


def test_dataset_round_trip(tmp_path, make_record):
    records = [
        make_record('r0'),
        make_record('r1', lambdas=(1.0, 1.3, 1.6), expectations=(-0.3, -0.21, -0.1), ideal=-0.4,
                    meta={'width': '5', 'circuit': 'ghz'}),
    ]
    path = str(tmp_path / 'data.jsonl')
    write_dataset(records, path)
    assert read_dataset(path) == records


def test_dataset_file_is_reproducible(tmp_path, make_record):
    records = [make_record(f'r{i}', expectations=(0.9 - 0.1 * i, 0.5, 0.3)) for i in range(3)]
    first, second = str(tmp_path / 'a.jsonl'), str(tmp_path / 'b.jsonl')
    write_dataset(records, first)
    write_dataset(records, second)
    assert read_bytes(first) == read_bytes(second)


def test_empty_dataset(tmp_path):
    path = str(tmp_path / 'empty.jsonl')
    write_text(path, '')
    assert read_dataset(path) == []


def test_missing_dataset(tmp_path):
    with pytest.raises(DatasetNotFoundError):
        read_dataset(str(tmp_path / 'nope.jsonl'))


def test_invariant_violation_names_the_line(tmp_path, make_record):
    good = record_to_dict(make_record('r0'))
    bad = dict(good, id='r1', expectations=[0.8, 1.5, 0.4])
    path = str(tmp_path / 'bad.jsonl')
    write_text(path, dump_line(good) + dump_line(bad))

    with pytest.raises(DatasetValidationError) as excinfo:
        read_dataset(path)
    issue, = excinfo.value.issues
    assert issue.line_number == 2
    assert issue.kind == 'invariant'
    assert 'line 2' in str(excinfo.value)


def test_every_bad_line_is_reported(tmp_path, make_record):
    good = record_to_dict(make_record('r0'))
    missing_key = dict(good)
    del missing_key['shots']
    lines = [dump_line(good), '{"id": "r1",\n', '\n', dump_line(missing_key), dump_line(dict(good, shots='many'))]
    path = str(tmp_path / 'mixed.jsonl')
    write_text(path, ''.join(lines))

    with pytest.raises(DatasetValidationError) as excinfo:
        read_dataset(path)
    issues = excinfo.value.issues
    assert [issue.line_number for issue in issues] == [2, 4, 5]
    assert all(issue.kind == 'malformed' for issue in issues)


def test_results_round_trip(tmp_path, make_record):
    records = [make_record('r0'), make_record('r1', expectations=(0.95, 0.6, 0.4), meta={'width': '3'})]
    specs = [parse_model_spec('exp:a=0:bounded'), parse_model_spec('exp:a=0:unbounded'),
             parse_model_spec('poly:d=3:bounded')]
    items = fit_batch(records, specs, master_seed=5)
    path = str(tmp_path / 'results.jsonl')
    write_results(items, records, path)

    rows = read_results(path)
    assert len(rows) == len(items) == 6
    for row, item in zip(rows, items):
        assert row.record_id == item.record_id
        assert row.result.status is item.result.status
        if item.result.converged:
            assert row.result == item.result
    assert {row.width for row in rows} == {'-', '3'}
    assert {row.lambda_set for row in rows} == {'1,2,3'}


def test_results_with_bad_line(tmp_path):
    path = str(tmp_path / 'results.jsonl')
    write_text(path, '{"record_id":"r0"}\n')
    with pytest.raises(DatasetValidationError):
        read_results(path)


def test_hardware_csv_is_grouped_into_records(tmp_path):
    path = str(tmp_path / 'hardware.csv')
    write_text(path, HARDWARE_CSV)
    records = read_hardware_csv(path)
    assert len(records) == 2
    ghz, wstate = records
    assert ghz.lambdas == (1.0, 1.3, 1.6)
    assert ghz.expectations == (0.78, 0.71, 0.66)
    assert ghz.ideal == 1.0
    assert wstate.ideal == -1.0
    assert ghz.width == '3'
    assert ghz.backend_tag == 'device-a'


def test_hardware_csv_with_mixed_shots(tmp_path):
    path = str(tmp_path / 'hardware.csv')
    write_text(path, HARDWARE_CSV.replace('0,10000,1.6,0.66', '0,5000,1.6,0.66'))
    with pytest.raises(DatasetValidationError) as excinfo:
        read_hardware_csv(path)
    assert excinfo.value.issues[0].kind == 'invariant'


def test_hardware_csv_missing_column(tmp_path):
    path = str(tmp_path / 'hardware.csv')
    write_text(path, 'circuit,observable\nghz,z\n')
    with pytest.raises(DatasetValidationError):
        read_hardware_csv(path)


def test_number_formats():
    assert format_sci(0.25) == '2.5E-1'
    assert format_sci(0.0012) == '1.2E-3'
    assert format_sci(31.0) == '3.1E1'
    assert format_sci(None) == 'NA'
    assert format_mean_sd(MeanSd(0.25, 0.22)) == '2.5E-1 ± 2.2E-1'
    assert format_mean_sd(MeanSd(0.25, None)) == '2.5E-1 ± NA'
    assert format_percent(13 / 15) == '86.67%'
    assert format_percent(1.0) == '100.00%'


def test_empty_summary_table_has_header(tmp_path):
    path = str(tmp_path / 'summary.tsv')
    write_summary(SummaryTable(key_columns=('family', 'lambda_set')), path)
    with open(path, encoding='utf-8') as f:
        lines = f.read().splitlines()
    assert lines == ['\t'.join(('family', 'lambda_set') + METRIC_COLUMNS)]


def comparison_report(make_record):
    records = [
        make_record(f'r{i}', expectations=(0.95 - 0.01 * i, 0.6, 0.4), meta={'width': '3'}) for i in range(6)
    ]
    specs = [parse_model_spec('poly:d=1:bounded'), parse_model_spec('poly:d=1:unbounded')]
    return records, fit_batch(records, specs, master_seed=1)


def test_summary_table_from_comparison(tmp_path, make_record):
    records, items = comparison_report(make_record)
    path = str(tmp_path / 'results.jsonl')
    write_results(items, records, path)
    report = compare_results(read_results(path), group_by=('lambda_set',))

    table = build_summary_table(report)
    assert table.columns[:2] == ('family', 'lambda_set')
    row, = table.rows
    assert len(row) == len(table.columns)
    cells = dict(zip(table.columns, row))
    assert cells['family'] == 'poly:d=1'
    assert cells['lambda_set'] == '1,2,3'
    assert cells['k'] == '6'
    assert cells['cov_matched'] == '100.00%'
    assert cells['significant'] in ('yes', 'no')

    first, second = str(tmp_path / 'a.tsv'), str(tmp_path / 'b.tsv')
    write_summary(table, first)
    write_summary(build_summary_table(report), second)
    assert read_bytes(first) == read_bytes(second)


def test_deltas_and_report(tmp_path, make_record):
    records, items = comparison_report(make_record)
    results = str(tmp_path / 'results.jsonl')
    write_results(items, records, results)
    report = compare_results(read_results(results), group_by=())

    summary = str(tmp_path / 'summary.tsv')
    write_deltas(report, deltas_path(summary), {'solver_settings': []})
    meta, groups = read_deltas(deltas_path(summary))
    assert meta['alpha'] == 0.05
    assert meta['solver_settings'] == []
    group, = groups
    assert group['group'] == ['poly:d=1']
    assert group['k'] == 6
    assert len(group['delta']) == 6

    out_dir = str(tmp_path / 'report')
    written = write_report(meta, groups, 2.0, out_dir)
    assert os.path.basename(written[-1]) == 'report.txt'
    assert len(written) == 2
    with open(written[0], encoding='utf-8') as f:
        lines = f.read().splitlines()
    assert lines[0] == '# family=poly:d=1'
    assert lines[1] == 'x\tF'
    heights = [float(line.split('\t')[1]) for line in lines[2:]]
    assert heights[-1] == 1.0
    with open(written[-1], encoding='utf-8') as f:
        assert 'delta>0: ' in f.read()


def test_report_skips_groups_without_pairs(tmp_path):
    meta = {'alpha': 0.05, 'group_by': []}
    groups = [{'group': ['exp:a=0'], 'k': 0, 'delta': [], 'fraction_positive': None, 'holm_p': None}]
    written = write_report(meta, groups, 2.0, str(tmp_path))
    assert len(written) == 1
    with open(written[0], encoding='utf-8') as f:
        assert 'family=exp:a=0\tk=0' in f.read()


def test_deltas_without_header(tmp_path):
    path = str(tmp_path / 'x.deltas.jsonl')
    write_text(path, json.dumps({'group': ['exp'], 'delta': []}) + '\n')
    with pytest.raises(DatasetValidationError):
        read_deltas(path)


def test_unwritable_destination(tmp_path, make_record):
    with pytest.raises(DatasetWriteError):
        write_dataset([make_record()], str(tmp_path / 'no-such-dir' / 'data.jsonl'))


@pytest.mark.parametrize('lambdas', ['[1.0,NaN,3.0]', '[1.0,2.0,Infinity]'])
def test_non_finite_noise_scales_are_rejected(tmp_path, make_record, lambdas):
    good = dump_line(record_to_dict(make_record('r0')))
    bad = dump_line(record_to_dict(make_record('r1'))).replace('[1.0,2.0,3.0]', lambdas)
    path = str(tmp_path / 'data.jsonl')
    write_text(path, good + bad)

    with pytest.raises(DatasetValidationError) as excinfo:
        read_dataset(path)
    issue, = excinfo.value.issues
    assert issue.line_number == 2
    assert issue.kind == 'invariant'
    assert 'not finite' in issue.reason


def test_summary_table_does_not_repeat_coverage(tmp_path, make_record):
    records, items = comparison_report(make_record)
    path = str(tmp_path / 'results.jsonl')
    write_results(items, records, path)
    report = compare_results(read_results(path), group_by=())
    table = build_summary_table(report)
    assert len(set(table.columns)) == len(table.columns)
    assert not any(column.startswith('conv_') for column in table.columns)
    row, = table.rows
    cells = dict(zip(table.columns, row))
    assert [cells['cov_bounded'], cells['cov_unbounded']] == ['100.00%', '100.00%']
