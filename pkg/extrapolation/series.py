"""
Scale series for BoundZNE
Ordered (lambda, value) measurement points of one ZNE repetition
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ScaleSeries:
    """
    Measured expectation values at increasing noise scale factors.

    lambda = 1 is the unamplified circuit, so every lambda must be >= 1.
    """

    lambdas: tuple
    values: tuple

    def __post_init__(self):
        lambdas = tuple(float(x) for x in self.lambdas)
        values = tuple(float(y) for y in self.values)
        object.__setattr__(self, 'lambdas', lambdas)
        object.__setattr__(self, 'values', values)

        if len(lambdas) != len(values):
            raise ValueError(f'lambdas ({len(lambdas)}) and values ({len(values)}) differ in length')
        if not all(np.isfinite(lambdas)) or not all(np.isfinite(values)):
            raise ValueError('scale series entries must be finite')
        if lambdas and lambdas[0] < 1.0:
            raise ValueError(f'smallest noise scale factor is {lambdas[0]}, expected >= 1')
        if any(b <= a for a, b in zip(lambdas, lambdas[1:])):
            raise ValueError('noise scale factors must be strictly increasing')

    @classmethod
    def from_points(cls, lambdas, values):
        """Build a series from unordered (lambda, value) pairs"""
        if len(lambdas) != len(values):
            raise ValueError(f'lambdas ({len(lambdas)}) and values ({len(values)}) differ in length')
        pairs = sorted(zip(lambdas, values), key=lambda pair: pair[0])
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    def __len__(self):
        return len(self.lambdas)

    @property
    def x(self):
        return np.asarray(self.lambdas, dtype=float)

    @property
    def y(self):
        return np.asarray(self.values, dtype=float)
