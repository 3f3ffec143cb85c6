"""
Experiment Records for BoundZNE
One ZNE instance: noise scale factors, measured expectations and the ideal value
"""

import math
from dataclasses import dataclass, field

SCHEMA_VERSION = '1'


def format_lambda_set(lambdas):
    """Compact label such as '1,2,3' or '1,1.3,1.6'"""
    parts = []
    for value in lambdas:
        value = float(value)
        parts.append(str(int(value)) if value.is_integer() else repr(value))
    return ','.join(parts)


@dataclass(frozen=True)
class ExperimentRecord:
    id: str
    curve_id: str
    backend_tag: str
    lambdas: tuple
    expectations: tuple
    ideal: float
    repetition: int
    shots: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'lambdas', tuple(float(x) for x in self.lambdas))
        object.__setattr__(self, 'expectations', tuple(float(y) for y in self.expectations))
        object.__setattr__(self, 'ideal', float(self.ideal))
        object.__setattr__(self, 'meta', {str(k): str(v) for k, v in (self.meta or {}).items()})
        problems = self.problems()
        if problems:
            raise ValueError('; '.join(problems))

    def problems(self):
        """Invariant violations, as human readable strings"""
        issues = []
        if not self.id:
            issues.append('id must be non-empty')
        if len(self.lambdas) != len(self.expectations):
            issues.append(f'lambdas ({len(self.lambdas)}) and expectations ({len(self.expectations)}) differ in length')
        for i, value in enumerate(self.lambdas):
            if not math.isfinite(value):
                issues.append(f'lambdas[{i}]={value} is not finite')
        if self.lambdas and self.lambdas[0] < 1.0:
            issues.append(f'lambdas[0]={self.lambdas[0]} is below 1')
        if any(b <= a for a, b in zip(self.lambdas, self.lambdas[1:])):
            issues.append('lambdas must be strictly increasing')
        for i, value in enumerate(self.expectations):
            if not math.isfinite(value) or abs(value) > 1.0:
                issues.append(f'expectations[{i}]={value} outside [-1, 1]')
        if not math.isfinite(self.ideal) or abs(self.ideal) > 1.0:
            issues.append(f'ideal={self.ideal} outside [-1, 1]')
        if int(self.repetition) != self.repetition or self.repetition < 0:
            issues.append(f'repetition={self.repetition} must be a non-negative integer')
        if int(self.shots) != self.shots or self.shots < 1:
            issues.append(f'shots={self.shots} must be a positive integer')
        return issues

    @property
    def lambda_set(self):
        return format_lambda_set(self.lambdas)

    @property
    def width(self):
        return self.meta.get('width', '-')
