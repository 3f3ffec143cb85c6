"""
Extrapolation Models for BoundZNE
Polynomial, exponential and polynomial-exponential families in bounded and
unbounded form: evaluation, analytic derivatives, parameter boxes,
feasibility and deterministic initial guesses
"""

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from numpy.polynomial import polynomial as P

from .exceptions import InsufficientDataError, ModelSpecError, ParamLayoutError

# Physical range of a +/-1 valued observable
PHYSICAL_BOUND = 1.0

# Smallest decay rate allowed where the model requires c > 0
RATE_FLOOR = 1e-8

# Clamp applied to the log-amplitude of the unbounded poly-exp start
LOG_AMPLITUDE_CLAMP = 20.0


class Family(str, Enum):
    POLYNOMIAL = 'poly'
    EXPONENTIAL = 'exp'
    POLYEXP = 'polyexp'


def _format_number(value):
    value = float(value)
    if value.is_integer():
        return str(int(value))
    return repr(value)


@dataclass(frozen=True)
class ModelSpec:
    """
    Extrapolation family plus hyperparameters.

    asymptote=None means the asymptote is a free parameter; a float pins it.
    positive_rate only applies to the unbounded exponential, which otherwise
    leaves its rate unconstrained.
    """

    family: Family
    degree: int = None
    asymptote: float = None
    bounded: bool = False
    positive_rate: bool = False

    def __post_init__(self):
        try:
            family = Family(self.family)
        except ValueError:
            raise ModelSpecError(f'unknown model family: {self.family!r}') from None
        object.__setattr__(self, 'family', family)

        if family is Family.EXPONENTIAL:
            object.__setattr__(self, 'degree', None)
        else:
            if self.degree is None or int(self.degree) != self.degree or self.degree < 1:
                raise ModelSpecError(f'{family.value} needs an integer degree >= 1, got {self.degree!r}')
            object.__setattr__(self, 'degree', int(self.degree))

        if family is Family.POLYNOMIAL:
            object.__setattr__(self, 'asymptote', None)
        elif self.asymptote is not None:
            value = float(self.asymptote)
            if not math.isfinite(value):
                raise ModelSpecError('fixed asymptote must be finite')
            if self.bounded and abs(value) > PHYSICAL_BOUND:
                raise ModelSpecError(f'fixed asymptote {value} lies outside [-1, 1] for a bounded model')
            object.__setattr__(self, 'asymptote', value)

        # The rate toggle only means something for the unbounded exponential
        if family is not Family.EXPONENTIAL or self.bounded:
            object.__setattr__(self, 'positive_rate', False)

    @property
    def fixed_asymptote(self):
        return self.asymptote is not None

    @property
    def spec_id(self):
        """Canonical spec string, parseable by parse_model_spec"""
        parts = [self.family.value]
        if self.degree is not None:
            parts.append(f'd={self.degree}')
        if self.family is not Family.POLYNOMIAL:
            parts.append('a=free' if self.asymptote is None else f'a={_format_number(self.asymptote)}')
        parts.append('bounded' if self.bounded else 'unbounded')
        if self.positive_rate:
            parts.append('c>0')
        return ':'.join(parts)

    @property
    def family_id(self):
        """Spec string without the bounded flag, shared by both arms of a pair"""
        return self.spec_id.replace(':unbounded', '').replace(':bounded', '')

    def with_bounded(self, bounded):
        return replace(self, bounded=bool(bounded))

    def __str__(self):
        return self.spec_id


def parse_model_spec(text):
    """
    Parse `family[:d=<int>][:a=<free|number>][:bounded|:unbounded][:c>0]`

    Degree defaults to 1 for families that need one; the asymptote defaults
    to free and the bounded flag to unbounded.
    """
    tokens = [t.strip() for t in str(text).strip().split(':') if t.strip()]
    if not tokens:
        raise ModelSpecError('empty model spec')

    family = tokens[0].lower()
    degree = None
    asymptote = None
    bounded = False
    positive_rate = False

    for token in tokens[1:]:
        lowered = token.lower()
        if lowered == 'bounded':
            bounded = True
        elif lowered == 'unbounded':
            bounded = False
        elif lowered == 'c>0':
            positive_rate = True
        elif lowered.startswith('d='):
            try:
                degree = int(lowered[2:])
            except ValueError:
                raise ModelSpecError(f'bad degree in {text!r}') from None
        elif lowered.startswith('a='):
            raw = lowered[2:]
            if raw != 'free':
                try:
                    asymptote = float(raw)
                except ValueError:
                    raise ModelSpecError(f'bad asymptote in {text!r}') from None
        else:
            raise ModelSpecError(f'unrecognised token {token!r} in {text!r}')

    if family in (Family.POLYNOMIAL.value, Family.POLYEXP.value) and degree is None:
        degree = 1

    return ModelSpec(family=family, degree=degree, asymptote=asymptote,
                     bounded=bounded, positive_rate=positive_rate)


def standard_model_specs(n_points=None):
    """
    Catalogue of evaluated model variants, both arms of each.

    With n_points given, variants that cannot be fitted from that many
    points are left out.
    """
    specs = []
    for bounded in (True, False):
        for degree in (1, 2, 3):
            specs.append(ModelSpec(Family.POLYNOMIAL, degree=degree, bounded=bounded))
        for asymptote in (None, 0.0):
            specs.append(ModelSpec(Family.EXPONENTIAL, asymptote=asymptote, bounded=bounded))
        for degree in (1, 2, 3):
            for asymptote in (None, 0.0):
                specs.append(ModelSpec(Family.POLYEXP, degree=degree, asymptote=asymptote, bounded=bounded))
    if n_points is not None:
        specs = [spec for spec in specs if feasible(spec, n_points)]
    return sorted(specs, key=lambda spec: spec.spec_id)


@dataclass(frozen=True)
class ParamVector:
    """
    Model parameters in the family's fixed layout.

    Polynomial: (theta0..theta_d); bounded exponential: (a, zeta, c);
    unbounded exponential: (a, b, c); bounded poly-exp: (a, zeta, c1..c_d);
    unbounded poly-exp: (a, c0..c_d) with `sign` stored separately.
    """

    values: tuple
    sign: int = None

    def __post_init__(self):
        object.__setattr__(self, 'values', tuple(float(v) for v in self.values))
        if self.sign is not None:
            object.__setattr__(self, 'sign', int(self.sign))

    @property
    def array(self):
        return np.asarray(self.values, dtype=float)

    @property
    def is_finite(self):
        return all(math.isfinite(v) for v in self.values)


@dataclass(frozen=True)
class ParamBox:
    lower: tuple
    upper: tuple

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        if len(lower) != len(upper):
            raise ValueError('box bounds differ in length')
        if any(lo > hi for lo, hi in zip(lower, upper)):
            raise ValueError('box lower bound exceeds upper bound')
        object.__setattr__(self, 'lower', lower)
        object.__setattr__(self, 'upper', upper)

    def __len__(self):
        return len(self.lower)

    def contains(self, point):
        point = np.asarray(point, dtype=float)
        return bool(np.all(point >= self.lower) and np.all(point <= self.upper))

    def clip(self, point):
        return np.clip(np.asarray(point, dtype=float), self.lower, self.upper)

    def as_bounds(self):
        """(low, high) pairs with None for infinite ends"""
        return [(None if math.isinf(lo) else lo, None if math.isinf(hi) else hi)
                for lo, hi in zip(self.lower, self.upper)]


def parameter_count(spec):
    """Length of the continuous part of the parameter layout"""
    if spec.family is Family.POLYNOMIAL:
        return spec.degree + 1
    if spec.family is Family.EXPONENTIAL:
        return 3
    return spec.degree + 2


def parameter_names(spec):
    if spec.family is Family.POLYNOMIAL:
        return tuple(f'theta{j}' for j in range(spec.degree + 1))
    if spec.family is Family.EXPONENTIAL:
        return ('a', 'zeta', 'c') if spec.bounded else ('a', 'b', 'c')
    if spec.bounded:
        return ('a', 'zeta') + tuple(f'c{j}' for j in range(1, spec.degree + 1))
    return ('a',) + tuple(f'c{j}' for j in range(spec.degree + 1))


def free_parameter_count(spec):
    """Parameters actually estimated from data; sign and a pinned asymptote do not count"""
    if spec.family is Family.POLYNOMIAL:
        return spec.degree + 1
    pinned = 1 if spec.fixed_asymptote else 0
    if spec.family is Family.EXPONENTIAL:
        return 3 - pinned
    if spec.bounded:
        return spec.degree + 2 - pinned
    return spec.degree + 3 - pinned


def feasible(spec, n_points):
    """True iff the model has no more free parameters than data points"""
    if n_points < 1:
        raise ValueError(f'n_points must be >= 1, got {n_points}')
    return free_parameter_count(spec) <= n_points


def _needs_sign(spec):
    return spec.family is Family.POLYEXP and not spec.bounded


def check_layout(spec, params):
    expected = parameter_count(spec)
    if len(params.values) != expected:
        raise ParamLayoutError(f'{spec.spec_id} expects {expected} parameters, got {len(params.values)}')
    if _needs_sign(spec):
        if params.sign not in (-1, 1):
            raise ParamLayoutError(f'{spec.spec_id} needs sign in {{-1, +1}}, got {params.sign!r}')
    elif params.sign is not None:
        raise ParamLayoutError(f'{spec.spec_id} takes no sign entry')


def _check_lambda(lam):
    lam = float(lam)
    if not math.isfinite(lam) or lam < 0:
        raise ValueError(f'noise scale factor must be finite and >= 0, got {lam}')
    return lam


def predict_values(spec, values, sign, lambdas):
    """
    Model values at an array of scale factors.

    Works on raw arrays so the fitting loop can skip ParamVector
    construction; exp overflow yields signed infinities.
    """
    lam = np.asarray(lambdas, dtype=float)
    values = np.asarray(values, dtype=float)
    with np.errstate(over='ignore', invalid='ignore'):
        if spec.family is Family.POLYNOMIAL:
            return P.polyval(lam, values)
        if spec.family is Family.EXPONENTIAL:
            a, second, c = values
            decay = np.exp(-c * lam)
            if spec.bounded:
                return a + (second - a) * decay
            return a + second * decay
        if spec.bounded:
            a, zeta = values[0], values[1]
            # r(0) = 0, so the constant term is zero
            exponent = P.polyval(lam, np.concatenate(([0.0], values[2:])))
            return a + (zeta - a) * np.exp(exponent)
        a = values[0]
        return a + sign * np.exp(P.polyval(lam, values[1:]))


def jacobian_values(spec, values, sign, lambdas):
    """d(model)/d(parameter) for every lambda, shape (n_lambdas, n_params)"""
    lam = np.atleast_1d(np.asarray(lambdas, dtype=float))
    values = np.asarray(values, dtype=float)
    with np.errstate(over='ignore', invalid='ignore'):
        if spec.family is Family.POLYNOMIAL:
            return P.polyvander(lam, spec.degree)
        if spec.family is Family.EXPONENTIAL:
            a, second, c = values
            decay = np.exp(-c * lam)
            if spec.bounded:
                return np.column_stack((1.0 - decay, decay, -(second - a) * lam * decay))
            return np.column_stack((np.ones_like(lam), decay, -second * lam * decay))
        powers = P.polyvander(lam, spec.degree)
        if spec.bounded:
            a, zeta = values[0], values[1]
            growth = np.exp(P.polyval(lam, np.concatenate(([0.0], values[2:]))))
            return np.column_stack((1.0 - growth, growth, (zeta - a) * powers[:, 1:] * growth[:, None]))
        growth = np.exp(P.polyval(lam, values[1:]))
        return np.column_stack((np.ones_like(lam), sign * powers * growth[:, None]))


def eval_model(spec, params, lam):
    """Model value at one noise scale factor"""
    check_layout(spec, params)
    lam = _check_lambda(lam)
    return float(predict_values(spec, params.array, params.sign, np.array([lam]))[0])


def gradient(spec, params, lam):
    """Analytic gradient with respect to the continuous parameters, in layout order"""
    check_layout(spec, params)
    lam = _check_lambda(lam)
    return jacobian_values(spec, params.array, params.sign, np.array([lam]))[0]


def zero_noise_values(spec, values, sign):
    if spec.family is Family.POLYNOMIAL:
        return float(values[0])
    if spec.bounded:
        return float(values[1])
    if spec.family is Family.EXPONENTIAL:
        return float(values[0] + values[1])
    with np.errstate(over='ignore'):
        return float(values[0] + sign * np.exp(values[1]))


def zero_noise_value(spec, params):
    """Extrapolated value at lambda = 0"""
    check_layout(spec, params)
    return zero_noise_values(spec, params.array, params.sign)


def param_box(spec):
    """Box constraints for the parameter layout; a pinned asymptote has lower == upper"""
    inf = math.inf
    n = parameter_count(spec)
    lower = [-inf] * n
    upper = [inf] * n

    if spec.family is Family.POLYNOMIAL:
        if spec.bounded:
            lower[0], upper[0] = -PHYSICAL_BOUND, PHYSICAL_BOUND
        return ParamBox(lower, upper)

    # Asymptote and zero-noise value share the physical range when bounded
    if spec.bounded:
        lower[0], upper[0] = -PHYSICAL_BOUND, PHYSICAL_BOUND
        lower[1], upper[1] = -PHYSICAL_BOUND, PHYSICAL_BOUND
    if spec.fixed_asymptote:
        lower[0] = upper[0] = spec.asymptote

    if spec.family is Family.EXPONENTIAL and (spec.bounded or spec.positive_rate):
        lower[2] = RATE_FLOOR

    return ParamBox(lower, upper)


def default_init(spec, series):
    """
    Deterministic starting point for a fit

    Args:
        spec: ModelSpec to initialise
        series: ScaleSeries with at least two points

    Returns:
        ParamVector clamped into param_box(spec)
    """
    if len(series) < 2:
        raise InsufficientDataError(f'initialisation needs at least 2 points, series has {len(series)}')

    x, y = series.x, series.y
    box = param_box(spec)

    asymptote = spec.asymptote if spec.fixed_asymptote else y[-1]
    # Straight line through the first two points, read off at lambda = 0
    intercept = y[0] + (y[0] - y[1]) / (x[1] - x[0]) * x[0]
    sign = None

    if spec.family is Family.POLYNOMIAL:
        coeffs = np.linalg.lstsq(P.polyvander(x, spec.degree), y, rcond=None)[0]
        values = np.concatenate(([intercept], coeffs[1:]))
    elif spec.family is Family.EXPONENTIAL:
        second = intercept if spec.bounded else intercept - asymptote
        values = np.array([asymptote, second, 1.0])
    else:
        trend = np.sign(y[-1] - y[0])
        tail = np.zeros(spec.degree)
        tail[0] = -0.1 * trend if trend != 0 else -0.1
        if spec.bounded:
            values = np.concatenate(([asymptote, intercept], tail))
        else:
            sign = 1 if asymptote < y[0] else -1
            log_amplitude = math.log(max(abs(y[0] - asymptote), 1e-12))
            log_amplitude = min(max(log_amplitude, -LOG_AMPLITUDE_CLAMP), LOG_AMPLITUDE_CLAMP)
            values = np.concatenate(([asymptote, log_amplitude], tail))

    return ParamVector(tuple(box.clip(values)), sign)
