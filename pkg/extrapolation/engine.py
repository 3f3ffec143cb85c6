"""
Fitting Engine for BoundZNE
Builds least-squares problems from a scale series and a model spec, runs
deterministic multi-start optimisation and classifies the outcome
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np
import scipy
from scipy.optimize import lsq_linear

from .exceptions import InsufficientDataError, SingularSystemError
from .models import (
    Family, ModelSpec, ParamVector, default_init, feasible, jacobian_values,
    param_box, parameter_names, parse_model_spec, predict_values, zero_noise_values,
)
from .optimizer import SolveSettings, SolveStatus, bounded_polynomial_fit, minimize_box, ols_polynomial
from .seeding import derive_seed, make_rng
from .series import ScaleSeries

logger = logging.getLogger(__name__)

# One deterministic start plus this many perturbed ones
PERTURBED_STARTS = 4
PERTURBATION_RANGE = (0.5, 1.5)

# Decay rates scanned for an extra exponential start; at a fixed rate the model is linear in (a, zeta) or (a, b)
PROFILE_RATES = np.geomspace(1e-3, 20.0, 60)

CLOSED_FORM_SOLVER = 'closed-form QR least squares'


class FitStatus(str, Enum):
    CONVERGED = 'converged'
    OPTIMIZATION_FAILED = 'optimization_failed'
    NON_FINITE_PREDICTION = 'non_finite_prediction'
    INFEASIBLE = 'infeasible'
    INSUFFICIENT_DATA = 'insufficient_data'


@dataclass(frozen=True)
class FitResult:
    spec: ModelSpec
    status: FitStatus
    params: ParamVector = None
    zne_estimate: float = None
    sse: float = None
    starts_used: int = 1
    solver_metadata: dict = field(default_factory=dict)

    @property
    def converged(self):
        return self.status is FitStatus.CONVERGED

    def to_dict(self):
        return {
            'spec': self.spec.spec_id,
            'status': self.status.value,
            'param_names': list(parameter_names(self.spec)),
            'params': list(self.params.values) if self.params is not None and self.params.is_finite else None,
            'sign': None if self.params is None else self.params.sign,
            'zne_estimate': self.zne_estimate,
            'sse': self.sse,
            'starts_used': self.starts_used,
            'solver': dict(self.solver_metadata),
        }

    @classmethod
    def from_dict(cls, data):
        spec = parse_model_spec(data['spec'])
        params = None
        if data.get('params') is not None:
            params = ParamVector(tuple(data['params']), data.get('sign'))
        return cls(
            spec=spec,
            status=FitStatus(data['status']),
            params=params,
            zne_estimate=data.get('zne_estimate'),
            sse=data.get('sse'),
            starts_used=int(data.get('starts_used', 1)),
            solver_metadata=dict(data.get('solver') or {}),
        )


class BatchItem(NamedTuple):
    record_id: str
    spec_id: str
    result: FitResult


def _least_squares_problem(spec, sign, x, y):
    def objective(values):
        with np.errstate(all='ignore'):
            residual = y - predict_values(spec, values, sign, x)
            return float(residual @ residual)

    def gradient(values):
        with np.errstate(all='ignore'):
            residual = y - predict_values(spec, values, sign, x)
            return -2.0 * jacobian_values(spec, values, sign, x).T @ residual

    return objective, gradient


def _closed_form_metadata():
    return {'solver': CLOSED_FORM_SOLVER, 'scipy': scipy.__version__}


def _classify(spec, series, values, sign, starts_used, metadata):
    """Turn a parameter vector into a FitResult, applying finite-value filtering"""
    params = ParamVector(tuple(values), sign)
    if not params.is_finite:
        return FitResult(spec, FitStatus.NON_FINITE_PREDICTION, params=params,
                         starts_used=starts_used, solver_metadata=metadata)

    with np.errstate(all='ignore'):
        residual = series.y - predict_values(spec, params.array, sign, series.x)
        sse = float(residual @ residual)
    estimate = zero_noise_values(spec, params.array, sign)

    if not math.isfinite(estimate) or not math.isfinite(sse):
        return FitResult(spec, FitStatus.NON_FINITE_PREDICTION, params=params,
                         starts_used=starts_used, solver_metadata=metadata)

    return FitResult(spec, FitStatus.CONVERGED, params=params, zne_estimate=estimate, sse=sse,
                     starts_used=starts_used, solver_metadata=metadata)


def _fit_polynomial(series, spec):
    metadata = _closed_form_metadata()
    try:
        if spec.bounded:
            coeffs = bounded_polynomial_fit(series, spec.degree)
        else:
            coeffs = ols_polynomial(series, spec.degree)
    except (SingularSystemError, InsufficientDataError) as e:
        logger.debug('%s: closed-form fit failed: %s', spec.spec_id, e)
        return FitResult(spec, FitStatus.OPTIMIZATION_FAILED, solver_metadata=metadata)
    return _classify(spec, series, coeffs, None, 1, metadata)


def _rate_profile_start(spec, series):
    """Best point of a decay-rate scan, the linear parameters solved exactly inside their box"""
    box = param_box(spec)
    x, y = series.x, series.y
    lower, upper = np.array(box.lower), np.array(box.upper)
    free = [1] if spec.fixed_asymptote else [0, 1]
    best_sse, best = math.inf, None
    for rate in PROFILE_RATES:
        decay = np.exp(-rate * x)
        first = 1.0 - decay if spec.bounded else np.ones_like(x)
        columns = np.column_stack((first, decay))
        target = y
        values = np.array([0.0, 0.0, rate])
        if spec.fixed_asymptote:
            values[0] = spec.asymptote
            target = y - spec.asymptote * first
        solution = lsq_linear(columns[:, free], target, bounds=(lower[free], upper[free]))
        values[free] = solution.x
        values = box.clip(values)
        with np.errstate(all='ignore'):
            residual = y - predict_values(spec, values, None, x)
            sse = float(residual @ residual)
        if math.isfinite(sse) and sse < best_sse:
            best_sse, best = sse, values
    return best


def _starting_points(spec, series, seed):
    box = param_box(spec)
    base = default_init(spec, series)
    rng = make_rng(seed)
    low, high = PERTURBATION_RANGE
    starts = [base.array]
    if spec.family is Family.EXPONENTIAL:
        profile = _rate_profile_start(spec, series)
        if profile is not None:
            starts.append(profile)
    for _ in range(PERTURBED_STARTS):
        factors = rng.uniform(low, high, size=len(base.values))
        starts.append(box.clip(base.array * factors))
    return base.sign, starts


def _fit_iterative(series, spec, settings, seed):
    metadata = settings.metadata()
    box = param_box(spec)
    x, y = series.x, series.y
    default_sign, starts = _starting_points(spec, series, seed)

    # Both signs are tried for the unbounded poly-exp; +1 goes first so it wins ties
    signs = (1, -1) if default_sign is not None else (None,)

    outcomes = []
    for sign in signs:
        objective, gradient = _least_squares_problem(spec, sign, x, y)
        for start in starts:
            outcome = minimize_box(objective, gradient, start, box, settings)
            outcomes.append((sign, outcome))

    starts_used = len(outcomes)
    usable = [
        (sign, outcome) for sign, outcome in outcomes
        if outcome.status is SolveStatus.CONVERGED
        and math.isfinite(outcome.objective)
        and np.all(np.isfinite(outcome.point))
    ]

    if not usable:
        statuses = sorted({outcome.status.value for _, outcome in outcomes})
        logger.debug('%s: no start converged (%s)', spec.spec_id, ', '.join(statuses))
        if any(outcome.status is SolveStatus.NON_FINITE for _, outcome in outcomes):
            status = FitStatus.NON_FINITE_PREDICTION
        else:
            status = FitStatus.OPTIMIZATION_FAILED
        return FitResult(spec, status, starts_used=starts_used, solver_metadata=metadata)

    sign, best = min(usable, key=lambda item: item[1].objective)
    return _classify(spec, series, best.point, sign, starts_used, metadata)


def fit(series, spec, settings=SolveSettings(), seed=0):
    """
    Fit one model to one scale series

    Args:
        series: ScaleSeries
        spec: ModelSpec
        settings: SolveSettings for the iterative families
        seed: 64-bit seed for the perturbed starts

    Returns:
        FitResult; problems are reported through its status, never raised
    """
    if len(series) == 0:
        return FitResult(spec, FitStatus.INSUFFICIENT_DATA, solver_metadata=settings.metadata())
    if not feasible(spec, len(series)):
        return FitResult(spec, FitStatus.INFEASIBLE, solver_metadata=settings.metadata())

    if spec.family is Family.POLYNOMIAL:
        return _fit_polynomial(series, spec)
    return _fit_iterative(series, spec, settings, seed)


def fit_pair(series, family_spec, settings=SolveSettings(), seed=0):
    """Fit the bounded and unbounded arms of one family with the same seed"""
    bounded = fit(series, family_spec.with_bounded(True), settings, seed)
    unbounded = fit(series, family_spec.with_bounded(False), settings, seed)
    return bounded, unbounded


def _fit_task(payload):
    record_id, lambdas, values, spec, settings, seed = payload
    series = ScaleSeries.from_points(lambdas, values)
    return BatchItem(record_id, spec.spec_id, fit(series, spec, settings, seed))


def fit_batch(records, specs, settings=SolveSettings(), master_seed=0, workers=1):
    """
    Fit every spec to every record

    Output is sorted by (record id, spec id) and does not depend on the
    number of worker processes.
    """
    payloads = [
        (record.id, record.lambdas, record.expectations, spec, settings,
         derive_seed(master_seed, record.id, spec.spec_id))
        for record in records
        for spec in specs
    ]
    if not payloads:
        return []

    logger.info('Fitting %d record/spec pairs with %d worker(s)', len(payloads), workers)
    if workers > 1 and len(payloads) > 1:
        chunksize = max(1, len(payloads) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            items = list(pool.map(_fit_task, payloads, chunksize=chunksize))
    else:
        items = [_fit_task(payload) for payload in payloads]

    items.sort(key=lambda item: (item.record_id, item.spec_id))
    return items
