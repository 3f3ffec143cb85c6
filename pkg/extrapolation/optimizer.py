"""
Optimizer for BoundZNE
Box-constrained limited-memory quasi-Newton minimisation (SciPy L-BFGS-B)
and closed-form least squares for polynomial models
"""

import logging
import math
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np
import scipy
from numpy.polynomial import polynomial as P
from scipy import linalg
from scipy.optimize import minimize

from .exceptions import InsufficientDataError, OutsideBoxError, SingularSystemError
from .models import PHYSICAL_BOUND

logger = logging.getLogger(__name__)

SOLVER_NAME = 'scipy.optimize.minimize/L-BFGS-B'

# Relative size below which an R diagonal entry counts as zero
RANK_TOLERANCE = 1e-12

# Fresh-memory restarts allowed after a run stalls away from a stationary point
MAX_RESTARTS = 5


@dataclass(frozen=True)
class SolveSettings:
    max_iterations: int = 500
    gradient_tolerance: float = 1e-8
    objective_rel_tolerance: float = 1e-10
    memory_pairs: int = 10

    def __post_init__(self):
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError(f'max_iterations must be a positive integer, got {self.max_iterations}')
        if int(self.memory_pairs) != self.memory_pairs or self.memory_pairs < 1:
            raise ValueError(f'memory_pairs must be a positive integer, got {self.memory_pairs}')
        if not self.gradient_tolerance > 0 or not self.objective_rel_tolerance > 0:
            raise ValueError('solver tolerances must be > 0')

    def metadata(self):
        """Settings snapshot recorded alongside every fit"""
        snapshot = asdict(self)
        snapshot['solver'] = SOLVER_NAME
        snapshot['scipy'] = scipy.__version__
        return snapshot


class SolveStatus(str, Enum):
    CONVERGED = 'converged'
    MAX_ITERATIONS = 'max_iterations'
    NON_FINITE = 'non_finite'
    LINE_SEARCH_FAILURE = 'line_search_failure'


@dataclass(frozen=True)
class SolveOutcome:
    point: np.ndarray
    objective: float
    status: SolveStatus
    iterations: int


class _NonFiniteEvaluation(Exception):
    """Raised inside the objective wrapper to abort the SciPy run"""


class _TrackedProblem:
    """
    Objective/gradient wrapper that remembers the best finite evaluation
    and the objective value at each accepted iterate.
    """

    def __init__(self, objective, gradient):
        self.objective = objective
        self.gradient = gradient
        self.last_point = None
        self.last_value = math.inf
        self.history = []

    def __call__(self, x):
        value = float(self.objective(x))
        grad = np.asarray(self.gradient(x), dtype=float)
        if not math.isfinite(value) or not np.all(np.isfinite(grad)):
            raise _NonFiniteEvaluation
        if value <= self.last_value:
            self.last_point = np.array(x, dtype=float)
            self.last_value = value
        return value, grad

    def accept(self, x):
        self.history.append(float(self.objective(x)))


def projected_gradient_norm(point, grad, box):
    """Infinity norm of the gradient projected onto the box"""
    lower = np.asarray(box.lower)
    upper = np.asarray(box.upper)
    projected = np.clip(point - grad, lower, upper) - point
    return float(np.max(np.abs(projected))) if projected.size else 0.0


def _relative_change(history):
    if len(history) < 2:
        return math.inf
    previous, current = history[-2], history[-1]
    return (previous - current) / max(abs(previous), abs(current), 1.0)


def _settled(history, tolerance):
    """The last accepted step lowered the objective, by no more than tolerance (relative)"""
    change = _relative_change(history)
    return 0.0 < change <= tolerance


def minimize_box(objective, gradient, init, box, settings=SolveSettings()):
    """
    Minimise objective over a box with L-BFGS-B

    A run that stops away from a stationary point without lowering the
    objective is restarted from where it stopped, with empty curvature
    memory, up to MAX_RESTARTS times.

    Args:
        objective: callable, real vector -> float
        gradient: callable, real vector -> real vector
        init: starting point, must lie inside box
        box: ParamBox (infinite ends allowed, lower == upper pins a coordinate)
        settings: SolveSettings

    Returns:
        SolveOutcome whose point lies inside the box
    """
    init = np.asarray(init, dtype=float)
    if init.shape != (len(box),):
        raise OutsideBoxError(f'starting point has shape {init.shape}, box has {len(box)} coordinates')
    if not box.contains(init):
        raise OutsideBoxError(f'starting point {init.tolist()} lies outside the box')

    problem = _TrackedProblem(objective, gradient)
    try:
        problem(init)
    except _NonFiniteEvaluation:
        logger.debug('objective not finite at the starting point')
        return SolveOutcome(init, math.inf, SolveStatus.NON_FINITE, 0)
    problem.history.append(problem.last_value)

    point = init
    iterations = 0
    restarts = 0
    while True:
        try:
            result = minimize(
                problem,
                point,
                jac=True,
                method='L-BFGS-B',
                bounds=box.as_bounds(),
                callback=problem.accept,
                options={
                    'maxiter': settings.max_iterations - iterations,
                    'maxcor': settings.memory_pairs,
                    'ftol': settings.objective_rel_tolerance,
                    'gtol': settings.gradient_tolerance,
                },
            )
        except _NonFiniteEvaluation:
            point = box.clip(problem.last_point)
            logger.debug('non-finite evaluation after %d iterations', len(problem.history) - 1)
            return SolveOutcome(point, float(objective(point)), SolveStatus.NON_FINITE, len(problem.history) - 1)

        iterations += int(result.nit)
        point = box.clip(result.x)
        value = float(objective(point))
        grad = np.asarray(gradient(point), dtype=float)
        if not math.isfinite(value) or not np.all(np.isfinite(grad)):
            point = box.clip(problem.last_point)
            return SolveOutcome(point, float(objective(point)), SolveStatus.NON_FINITE, iterations)

        if projected_gradient_norm(point, grad, box) <= settings.gradient_tolerance:
            status = SolveStatus.CONVERGED
        elif result.status == 1 or iterations >= settings.max_iterations:
            status = SolveStatus.MAX_ITERATIONS
        elif _settled(problem.history, settings.objective_rel_tolerance):
            status = SolveStatus.CONVERGED
        elif restarts < MAX_RESTARTS:
            restarts += 1
            logger.debug('L-BFGS-B stalled (%s); restart %d', result.message, restarts)
            continue
        else:
            status = SolveStatus.LINE_SEARCH_FAILURE
            logger.debug('L-BFGS-B still stalled after %d restarts: %s', restarts, result.message)
        return SolveOutcome(point, value, status, iterations)


def _least_squares_qr(design, targets):
    """Solve min |design @ coef - targets| through a reduced QR factorisation"""
    q, r = linalg.qr(design, mode='economic')
    diagonal = np.abs(np.diag(r))
    scale = diagonal.max() if diagonal.size else 0.0
    if scale == 0.0 or diagonal.min() <= RANK_TOLERANCE * scale:
        raise SingularSystemError('design matrix is rank deficient (repeated noise scale factors?)')
    return linalg.solve_triangular(r, q.T @ targets)


def _check_polynomial_problem(series, degree):
    if degree < 1:
        raise ValueError(f'degree must be >= 1, got {degree}')
    if len(series) < degree + 1:
        raise InsufficientDataError(f'degree {degree} polynomial needs {degree + 1} points, series has {len(series)}')
    if len(set(series.lambdas)) < degree + 1:
        raise SingularSystemError('not enough distinct noise scale factors for the polynomial degree')


def ols_polynomial(series, degree):
    """Unconstrained least-squares polynomial coefficients (theta0..theta_d)"""
    _check_polynomial_problem(series, degree)
    return _least_squares_qr(P.polyvander(series.x, degree), series.y)


def bounded_polynomial_fit(series, degree):
    """
    Least-squares polynomial with the intercept held in [-1, 1]

    When the unconstrained intercept falls outside the range the optimum
    sits on the violated bound, so the intercept is pinned there and the
    remaining coefficients are refit to the shifted targets.
    """
    coeffs = ols_polynomial(series, degree)
    if -PHYSICAL_BOUND <= coeffs[0] <= PHYSICAL_BOUND:
        return coeffs

    intercept = float(np.clip(coeffs[0], -PHYSICAL_BOUND, PHYSICAL_BOUND))
    design = P.polyvander(series.x, degree)[:, 1:]
    rest = _least_squares_qr(design, series.y - intercept)
    return np.concatenate(([intercept], rest))
