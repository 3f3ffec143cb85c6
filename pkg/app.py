"""
BoundZNE command line
Synthetic benchmark generation, bounded/unbounded ZNE fitting and the
paired comparison pipeline
"""

import argparse
import json
import logging
import math
import sys
from dataclasses import replace

from analysis.comparison import compare_results, parse_group_by
from analysis.exceptions import StatsError, SummaryInvariantError
from benchmark.exceptions import BenchmarkError
from benchmark.ideal_registry import HARDWARE_LAMBDAS
from benchmark.synth import generate_dataset
from config.settings import SettingsError, load_benchmark_defaults, log_level, solve_settings_from_env, worker_count
from dataset.dataset_utils import dump_line, read_dataset, read_hardware_csv, read_results, write_dataset, write_results
from dataset.exceptions import DatasetError, DatasetNotFoundError, DatasetValidationError, LineIssue
from dataset.summary_tables import build_summary_table, deltas_path, read_deltas, write_deltas, write_report, write_summary
from extrapolation.engine import fit, fit_batch
from extrapolation.exceptions import ExtrapolationError, ModelSpecError
from extrapolation.models import ModelSpec, parse_model_spec, standard_model_specs
from extrapolation.series import ScaleSeries

logger = logging.getLogger('boundzne')

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

U64_MAX = 2 ** 64 - 1


class UsageError(Exception):
    """Bad command-line arguments"""


class CliParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with status 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f'{self.prog}: error: {message}\n')


def u64(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f'{text!r} is not an integer') from None
    if not 0 <= value <= U64_MAX:
        raise argparse.ArgumentTypeError(f'{text} is not an unsigned 64-bit integer')
    return value


def positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f'{text!r} is not an integer') from None
    if value < 1:
        raise argparse.ArgumentTypeError(f'{text} must be >= 1')
    return value


def asymptote_value(text):
    """'free' -> None, otherwise a finite number"""
    if text.strip().lower() == 'free':
        return None
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f'{text!r} is neither free nor a number') from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f'asymptote must be finite, got {text}')
    return value


def parse_lambda_sets(text):
    """'1,2,3;1,3,5' -> ((1.0, 2.0, 3.0), (1.0, 3.0, 5.0)); 'hardware' names (1, 1.3, 1.6)"""
    sets = []
    for chunk in text.split(';'):
        chunk = chunk.strip()
        if not chunk:
            continue
        if chunk.lower() == 'hardware':
            sets.append(HARDWARE_LAMBDAS)
            continue
        try:
            sets.append(tuple(float(x) for x in chunk.split(',')))
        except ValueError:
            raise argparse.ArgumentTypeError(f'bad lambda set {chunk!r}') from None
    if not sets:
        raise argparse.ArgumentTypeError('no lambda sets given')
    return tuple(sets)


def parse_spec_list(text):
    """Comma separated model specs, or 'all' for the standard catalogue"""
    if text.strip().lower() == 'all':
        return standard_model_specs()
    try:
        specs = [parse_model_spec(part) for part in text.split(',') if part.strip()]
    except ModelSpecError as e:
        raise UsageError(f'bad --models value: {e}') from None
    if not specs:
        raise UsageError('no model specs given')
    return sorted(set(specs), key=lambda spec: spec.spec_id)


def cmd_simulate(args):
    config = load_benchmark_defaults(
        args.defaults,
        bin_width=args.bins,
        curves_per_bin=args.per_bin,
        shots=args.shots,
        repetitions=args.reps,
        lambda_sets=args.lambda_sets,
        seed=args.seed,
    )
    if args.regimes:
        wanted = [tag.strip() for tag in args.regimes.split(',') if tag.strip()]
        by_tag = {regime.tag: regime for regime in config.regimes}
        unknown = [tag for tag in wanted if tag not in by_tag]
        if unknown:
            raise UsageError(f'unknown regime(s) {unknown}; defaults define {sorted(by_tag)}')
        config = replace(config, regimes=[by_tag[tag] for tag in wanted])

    dataset = generate_dataset(config)
    write_dataset(dataset.records, args.out)
    logger.info('✅ Wrote %d records to %s', len(dataset.records), args.out)
    return EXIT_OK


def _read_series(path):
    try:
        if path == '-':
            text = sys.stdin.read()
        else:
            with open(path, 'r', encoding='utf-8') as f:
                text = f.read()
    except FileNotFoundError:
        raise DatasetNotFoundError(f'no such file: {path}') from None

    try:
        data = json.loads(text)
        lambdas = data['lambdas']
        values = data['values'] if 'values' in data else data['expectations']
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        reason = 'expected a JSON object with lambdas and values (or expectations)'
        raise DatasetValidationError(path, [LineIssue(1, 'malformed', f'{reason}: {e}')]) from None
    return ScaleSeries.from_points(lambdas, values)


def cmd_fit(args):
    try:
        spec = ModelSpec(args.family, degree=args.degree, asymptote=args.asymptote,
                         bounded=args.bounded, positive_rate=args.positive_rate)
    except ModelSpecError as e:
        raise UsageError(f'bad model flags: {e}') from None
    series = _read_series(args.series)
    result = fit(series, spec, solve_settings_from_env(), args.seed)
    sys.stdout.write(dump_line(result.to_dict()))
    if not result.converged:
        logger.warning('⚠️  %s: %s', spec.spec_id, result.status.value)
    return EXIT_OK


def cmd_benchmark(args):
    records = read_dataset(args.data)
    specs = parse_spec_list(args.models)
    workers = args.workers or worker_count()
    items = fit_batch(records, specs, solve_settings_from_env(), args.seed, workers=workers)
    write_results(items, records, args.out)

    converged = sum(1 for item in items if item.result.converged)
    logger.info('✅ Wrote %d fit results to %s (%d converged)', len(items), args.out, converged)
    return EXIT_OK


def _solver_snapshots(rows):
    snapshots = {}
    for row in rows:
        metadata = row.result.solver_metadata
        if metadata:
            snapshots[json.dumps(metadata, sort_keys=True)] = metadata
    return [snapshots[key] for key in sorted(snapshots)]


def cmd_compare(args):
    try:
        group_by = parse_group_by(args.group_by)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if not 0 < args.alpha < 1:
        raise UsageError(f'--alpha must lie in (0, 1), got {args.alpha}')
    rows = read_results(args.results)
    report = compare_results(rows, group_by=group_by, alpha=args.alpha)

    write_summary(build_summary_table(report), args.out)
    write_deltas(report, deltas_path(args.out), {'solver_settings': _solver_snapshots(rows)})

    significant = sum(1 for s in report.summaries if s.holm_adjusted_p is not None and s.holm_adjusted_p < args.alpha)
    logger.info('✅ Wrote %d group summaries to %s (%d significant at alpha=%g)',
                len(report.summaries), args.out, significant, args.alpha)
    return EXIT_OK


def cmd_report(args):
    if not args.ecdf_cap > 0:
        raise UsageError(f'--ecdf-cap must be positive, got {args.ecdf_cap}')
    meta, groups = read_deltas(deltas_path(args.compare))
    written = write_report(meta, groups, args.ecdf_cap, args.out_dir)
    logger.info('✅ Wrote %s', written[-1])
    return EXIT_OK


def cmd_ingest_hardware(args):
    records = read_hardware_csv(args.csv)
    write_dataset(records, args.out)
    logger.info('✅ Ingested %d hardware records into %s', len(records), args.out)
    return EXIT_OK


def build_parser():
    parser = CliParser(prog='boundzne', description='Bounded zero-noise extrapolation benchmark')
    commands = parser.add_subparsers(dest='command', required=True, parser_class=CliParser)

    simulate = commands.add_parser('simulate', help='generate a synthetic benchmark dataset')
    simulate.add_argument('--out', required=True)
    simulate.add_argument('--seed', type=u64, required=True)
    simulate.add_argument('--bins', type=float, help='ideal-value bin width (default 0.05)')
    simulate.add_argument('--per-bin', type=positive_int, help='curves per bin and regime (default 100)')
    simulate.add_argument('--shots', type=positive_int, help='shots per expectation value (default 10000)')
    simulate.add_argument('--reps', type=positive_int, help='repetitions per curve and lambda set (default 10)')
    simulate.add_argument('--lambda-sets', type=parse_lambda_sets, help='e.g. "1,2,3;1,3,5;1,2,3,4,5"')
    simulate.add_argument('--regimes', help='comma separated regime tags, e.g. mild,harsh')
    simulate.add_argument('--defaults', help='benchmark defaults JSON file')
    simulate.set_defaults(handler=cmd_simulate)

    fit_cmd = commands.add_parser('fit', help='fit one model to one scale series')
    fit_cmd.add_argument('--series', required=True, help='JSON file with lambdas and values, or - for stdin')
    fit_cmd.add_argument('--family', required=True, choices=['poly', 'exp', 'polyexp'])
    fit_cmd.add_argument('--degree', type=positive_int, default=1)
    fit_cmd.add_argument('--asymptote', type=asymptote_value, default=None, help='free (default), 0 or a number')
    fit_cmd.add_argument('--bounded', action='store_true')
    fit_cmd.add_argument('--positive-rate', action='store_true', help='keep the unbounded exponential rate > 0')
    fit_cmd.add_argument('--seed', type=u64, default=0)
    fit_cmd.set_defaults(handler=cmd_fit)

    bench = commands.add_parser('benchmark', help='fit model specs to every record of a dataset')
    bench.add_argument('--data', required=True)
    bench.add_argument('--models', required=True, help='comma separated model specs, or all')
    bench.add_argument('--out', required=True)
    bench.add_argument('--seed', type=u64, required=True)
    bench.add_argument('--workers', type=positive_int, help='worker processes (default BOUNDZNE_WORKERS or 1)')
    bench.set_defaults(handler=cmd_benchmark)

    compare = commands.add_parser('compare', help='paired bounded vs unbounded comparison')
    compare.add_argument('--results', required=True)
    compare.add_argument('--group-by', default='lambda_set,backend,width')
    compare.add_argument('--alpha', type=float, default=0.05)
    compare.add_argument('--out', required=True)
    compare.set_defaults(handler=cmd_compare)

    report = commands.add_parser('report', help='ECDF files and text summary from a comparison')
    report.add_argument('--compare', required=True, help='summary table written by compare')
    report.add_argument('--ecdf-cap', type=float, default=2.0)
    report.add_argument('--out-dir', required=True)
    report.set_defaults(handler=cmd_report)

    ingest = commands.add_parser('ingest-hardware', help='convert a hardware CSV export into a dataset')
    ingest.add_argument('--csv', required=True)
    ingest.add_argument('--out', required=True)
    ingest.set_defaults(handler=cmd_ingest_hardware)

    return parser


def main(argv=None):
    level = log_level()
    if not isinstance(logging.getLevelName(level), int):
        level = 'INFO'
    logging.basicConfig(level=level, format='%(message)s', stream=sys.stderr)
    args = build_parser().parse_args(argv)

    try:
        return args.handler(args)
    except UsageError as e:
        logger.error('❌ %s', e)
        return EXIT_USAGE
    except SummaryInvariantError as e:
        logger.error('❌ Internal invariant failure: %s', e)
        return EXIT_INTERNAL
    except (DatasetError, ExtrapolationError, BenchmarkError, SettingsError, StatsError, ValueError) as e:
        logger.error('❌ %s', e)
        return EXIT_DATA
    except Exception:
        logger.exception('❌ Unexpected failure')
        return EXIT_INTERNAL


if __name__ == '__main__':
    sys.exit(main())
