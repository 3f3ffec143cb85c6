"""
Runtime settings for BoundZNE
Environment variables and the benchmark defaults file
"""

import json
import os

from benchmark.exceptions import BenchmarkConfigError
from benchmark.synth import BenchmarkConfig, Regime
from extrapolation.optimizer import SolveSettings

DEFAULTS_FILE = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'benchmark_defaults.json')


class SettingsError(ValueError):
    """Bad environment value or defaults file"""


def _env(name, default, cast):
    raw = os.environ.get(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        return cast(raw)
    except ValueError:
        raise SettingsError(f'{name}={raw!r} is not a valid {cast.__name__}') from None


def log_level():
    return os.environ.get('BOUNDZNE_LOG_LEVEL', 'INFO').upper()


def worker_count():
    workers = _env('BOUNDZNE_WORKERS', 1, int)
    if workers < 1:
        raise SettingsError(f'BOUNDZNE_WORKERS must be >= 1, got {workers}')
    return workers


def solve_settings_from_env():
    """SolveSettings with any BOUNDZNE_* solver overrides applied"""
    defaults = SolveSettings()
    try:
        return SolveSettings(
            max_iterations=_env('BOUNDZNE_MAX_ITERATIONS', defaults.max_iterations, int),
            gradient_tolerance=_env('BOUNDZNE_GRADIENT_TOLERANCE', defaults.gradient_tolerance, float),
            objective_rel_tolerance=_env('BOUNDZNE_OBJECTIVE_TOLERANCE', defaults.objective_rel_tolerance, float),
            memory_pairs=_env('BOUNDZNE_MEMORY_PAIRS', defaults.memory_pairs, int),
        )
    except SettingsError:
        raise
    except ValueError as e:
        raise SettingsError(str(e)) from e


def load_benchmark_defaults(path=None, **overrides):
    """
    BenchmarkConfig from the defaults JSON file

    Args:
        path: defaults file; BOUNDZNE_DEFAULTS_FILE or the bundled file when None
        **overrides: BenchmarkConfig fields that replace file values (None is ignored)

    Returns:
        BenchmarkConfig
    """
    path = path or os.environ.get('BOUNDZNE_DEFAULTS_FILE') or DEFAULTS_FILE
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except FileNotFoundError:
        raise SettingsError(f'defaults file not found: {path}') from None
    except json.JSONDecodeError as e:
        raise SettingsError(f'defaults file {path} is not valid JSON: {e.msg}') from None

    try:
        if 'regimes' in data:
            data['regimes'] = [Regime(**regime) for regime in data['regimes']]
        data.update({key: value for key, value in overrides.items() if value is not None})
        return BenchmarkConfig(**data)
    except (TypeError, BenchmarkConfigError) as e:
        raise SettingsError(f'bad benchmark defaults in {path}: {e}') from e
