"""
Shared pytest fixtures for BoundZNE
"""

import os

import numpy as np
import pytest

from benchmark.records import ExperimentRecord
from extrapolation.optimizer import SolveSettings
from extrapolation.series import ScaleSeries


def pytest_collection_modifyitems(config, items):
    if os.environ.get('BOUNDZNE_RUN_SLOW') == '1':
        return
    skip_slow = pytest.mark.skip(reason='set BOUNDZNE_RUN_SLOW=1 to run')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def tight_settings():
    """Solver settings tight enough for noiseless recovery checks"""
    return SolveSettings(max_iterations=5000, gradient_tolerance=1e-10, objective_rel_tolerance=1e-20)


@pytest.fixture
def halving_series():
    """Noiseless 0 + 1 * exp(-ln2 * lambda)"""
    return ScaleSeries((1.0, 2.0, 3.0), (0.5, 0.25, 0.125))


@pytest.fixture
def make_record():
    def _make(record_id='r0', lambdas=(1.0, 2.0, 3.0), expectations=(0.8, 0.6, 0.45), ideal=1.0,
              backend='mild', repetition=0, shots=10_000, meta=None):
        return ExperimentRecord(
            id=record_id,
            curve_id=f'curve-{record_id}',
            backend_tag=backend,
            lambdas=lambdas,
            expectations=expectations,
            ideal=ideal,
            repetition=repetition,
            shots=shots,
            meta=meta or {'schema_version': '1'},
        )
    return _make
