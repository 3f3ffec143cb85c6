"""
Synthetic Benchmark for BoundZNE
Generates ground-truth noise-decay curves bucketed by ideal value and
samples shot-noise limited ZNE experiments from them
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from extrapolation.seeding import derive_seed, make_rng

from .exceptions import BenchmarkConfigError, CurveRejectionError
from .records import SCHEMA_VERSION, ExperimentRecord

logger = logging.getLogger(__name__)

# Curves must stay physical over this whole range of scale factors
SUPPORTED_LAMBDA_RANGE = (0.0, 5.0)
_RANGE_CHECK_POINTS = 501

MAX_REJECTION_ATTEMPTS = 10_000

DEFAULT_LAMBDA_SETS = ((1.0, 2.0, 3.0), (1.0, 3.0, 5.0), (1.0, 2.0, 3.0, 4.0, 5.0))
DEFAULT_ASYMPTOTE_RANGE = (-0.2, 0.2)


@dataclass(frozen=True)
class Regime:
    """Synthetic noise regime standing in for one device"""

    tag: str
    decay_range: tuple
    curvature_range: tuple = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, 'decay_range', tuple(float(v) for v in self.decay_range))
        object.__setattr__(self, 'curvature_range', tuple(float(v) for v in self.curvature_range))
        for name in ('decay_range', 'curvature_range'):
            low, high = getattr(self, name)
            if low > high:
                raise BenchmarkConfigError(f'regime {self.tag!r}: empty {name} ({low}, {high})')
        if self.decay_range[0] <= 0:
            raise BenchmarkConfigError(f'regime {self.tag!r}: decay rates must be positive')


DEFAULT_REGIMES = (
    Regime('mild', (0.05, 0.5), (-0.02, 0.02)),
    Regime('harsh', (0.5, 2.0), (-0.05, 0.05)),
)


@dataclass(frozen=True)
class TrueCurve:
    """
    Ground-truth expectation value as a function of the noise scale factor:
    asymptote + (ideal - asymptote) * exp(-decay_rate * lam + curvature * lam**2)
    """

    id: str
    ideal: float
    asymptote: float
    decay_rate: float
    curvature: float

    def value(self, lambdas):
        lam = np.asarray(lambdas, dtype=float)
        exponent = -self.decay_rate * lam + self.curvature * lam ** 2
        return self.asymptote + (self.ideal - self.asymptote) * np.exp(exponent)

    def is_physical(self):
        grid = np.linspace(*SUPPORTED_LAMBDA_RANGE, _RANGE_CHECK_POINTS)
        values = self.value(grid)
        return bool(np.all(np.isfinite(values)) and np.all(np.abs(values) <= 1.0))


@dataclass(frozen=True)
class BenchmarkConfig:
    bin_width: float = 0.05
    curves_per_bin: int = 100
    lambda_sets: tuple = DEFAULT_LAMBDA_SETS
    repetitions: int = 10
    shots: int = 10_000
    regimes: tuple = DEFAULT_REGIMES
    asymptote_range: tuple = DEFAULT_ASYMPTOTE_RANGE
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'lambda_sets', tuple(tuple(float(x) for x in s) for s in self.lambda_sets))
        object.__setattr__(self, 'regimes', tuple(self.regimes))
        object.__setattr__(self, 'asymptote_range', tuple(float(v) for v in self.asymptote_range))

        if not self.bin_width > 0:
            raise BenchmarkConfigError(f'bin_width must be positive, got {self.bin_width}')
        n_bins = round(2.0 / self.bin_width)
        if n_bins < 1 or not math.isclose(n_bins * self.bin_width, 2.0, rel_tol=0, abs_tol=1e-9):
            raise BenchmarkConfigError(f'bin_width {self.bin_width} does not divide [-1, 1] into whole bins')
        if self.curves_per_bin < 1 or self.repetitions < 1 or self.shots < 1:
            raise BenchmarkConfigError('curves_per_bin, repetitions and shots must be positive')
        if not self.lambda_sets or not self.regimes:
            raise BenchmarkConfigError('at least one lambda set and one regime are required')
        for lambdas in self.lambda_sets:
            if not lambdas or lambdas[0] < 1.0 or any(b <= a for a, b in zip(lambdas, lambdas[1:])):
                raise BenchmarkConfigError(f'lambda set {lambdas} must be strictly increasing and start at >= 1')
        low, high = self.asymptote_range
        if low > high or low < -1.0 or high > 1.0:
            raise BenchmarkConfigError(f'asymptote range {self.asymptote_range} must be a non-empty part of [-1, 1]')
        tags = [regime.tag for regime in self.regimes]
        if len(set(tags)) != len(tags):
            raise BenchmarkConfigError(f'regime tags must be unique: {tags}')

    @property
    def n_bins(self):
        return round(2.0 / self.bin_width)

    def bins(self):
        """Half-open ideal-value intervals covering [-1, 1]"""
        edges = np.linspace(-1.0, 1.0, self.n_bins + 1)
        return [(float(lo), float(hi)) for lo, hi in zip(edges[:-1], edges[1:])]

    @property
    def expected_record_count(self):
        return (self.n_bins * self.curves_per_bin * len(self.regimes)
                * len(self.lambda_sets) * self.repetitions)


@dataclass
class Dataset:
    records: list = field(default_factory=list)
    curves: dict = field(default_factory=dict)


def sample_true_curve(ideal_bin, regime, rng, curve_id='', asymptote_range=DEFAULT_ASYMPTOTE_RANGE,
                      max_attempts=MAX_REJECTION_ATTEMPTS):
    """
    Draw a physical ground-truth curve whose ideal value lies in ideal_bin

    Args:
        ideal_bin: (low, high) half-open interval inside [-1, 1]
        regime: Regime supplying decay and curvature ranges
        rng: numpy Generator
        curve_id: identifier stored on the curve
        asymptote_range: (low, high) for the large-noise asymptote
        max_attempts: rejection budget

    Returns:
        TrueCurve
    """
    low, high = ideal_bin
    if low < -1.0 or high > 1.0 or low >= high:
        raise BenchmarkConfigError(f'ideal bin {ideal_bin} must be a non-empty interval inside [-1, 1]')

    for _ in range(max_attempts):
        curve = TrueCurve(
            id=curve_id,
            ideal=float(rng.uniform(low, high)),
            asymptote=float(rng.uniform(*asymptote_range)),
            decay_rate=float(rng.uniform(*regime.decay_range)),
            curvature=float(rng.uniform(*regime.curvature_range)),
        )
        if curve.is_physical():
            return curve

    raise CurveRejectionError(
        f'no physical curve for bin {ideal_bin} in regime {regime.tag!r} after {max_attempts} attempts'
    )


def shot_sample(true_value, shots, rng):
    """
    Estimate of a +/-1 observable from a finite number of shots

    k ~ Binomial(shots, (1 + true_value) / 2), returned as 2k/shots - 1.
    Accepts scalars or arrays of true values.
    """
    probability = np.clip((1.0 + np.asarray(true_value, dtype=float)) / 2.0, 0.0, 1.0)
    hits = rng.binomial(int(shots), probability)
    estimate = 2.0 * hits / shots - 1.0
    if np.ndim(estimate) == 0:
        return float(estimate)
    return estimate


def _curve_id(regime, bin_index, curve_index):
    return f'{regime.tag}-b{bin_index:03d}-c{curve_index:04d}'


def generate_dataset(config):
    """
    Build the full synthetic benchmark described by config

    Every curve and every record draws from its own Philox stream keyed on
    its id, so the dataset is a pure function of the config.
    """
    dataset = Dataset()
    bins = config.bins()
    logger.info('Generating %d records (%d bins x %d curves x %d regimes x %d lambda sets x %d repetitions)',
                config.expected_record_count, len(bins), config.curves_per_bin,
                len(config.regimes), len(config.lambda_sets), config.repetitions)

    for regime in config.regimes:
        for bin_index, ideal_bin in enumerate(bins):
            for curve_index in range(config.curves_per_bin):
                curve_id = _curve_id(regime, bin_index, curve_index)
                rng = make_rng(derive_seed(config.seed, 'curve', curve_id))
                curve = sample_true_curve(ideal_bin, regime, rng, curve_id, config.asymptote_range)
                dataset.curves[curve_id] = curve

                for set_index, lambdas in enumerate(config.lambda_sets):
                    truth = curve.value(lambdas)
                    for repetition in range(config.repetitions):
                        record_id = f'{curve_id}-s{set_index}-r{repetition:02d}'
                        record_rng = make_rng(derive_seed(config.seed, 'record', record_id))
                        dataset.records.append(ExperimentRecord(
                            id=record_id,
                            curve_id=curve_id,
                            backend_tag=regime.tag,
                            lambdas=lambdas,
                            expectations=tuple(shot_sample(truth, config.shots, record_rng)),
                            ideal=curve.ideal,
                            repetition=repetition,
                            shots=config.shots,
                            meta={'schema_version': SCHEMA_VERSION},
                        ))

    logger.info('Generated %d curves and %d records', len(dataset.curves), len(dataset.records))
    return dataset
