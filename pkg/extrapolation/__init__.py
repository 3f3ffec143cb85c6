"""
Extrapolation module for BoundZNE
"""

from .engine import BatchItem, FitResult, FitStatus, fit, fit_batch, fit_pair
from .exceptions import (
    ExtrapolationError, InsufficientDataError, ModelSpecError, OutsideBoxError, ParamLayoutError, SingularSystemError,
)
from .models import (
    Family, ModelSpec, ParamBox, ParamVector, default_init, eval_model, feasible, gradient, param_box,
    parse_model_spec, standard_model_specs, zero_noise_value,
)
from .optimizer import SolveOutcome, SolveSettings, SolveStatus, bounded_polynomial_fit, minimize_box, ols_polynomial
from .seeding import derive_seed, make_rng
from .series import ScaleSeries

__all__ = [
    'ScaleSeries', 'Family', 'ModelSpec', 'ParamVector', 'ParamBox', 'parse_model_spec', 'standard_model_specs',
    'eval_model', 'gradient', 'zero_noise_value', 'param_box', 'feasible', 'default_init',
    'SolveSettings', 'SolveStatus', 'SolveOutcome', 'minimize_box', 'ols_polynomial', 'bounded_polynomial_fit',
    'FitStatus', 'FitResult', 'BatchItem', 'fit', 'fit_pair', 'fit_batch', 'derive_seed', 'make_rng',
    'ExtrapolationError', 'ModelSpecError', 'ParamLayoutError', 'InsufficientDataError',
    'SingularSystemError', 'OutsideBoxError',
]
