"""
Ideal Value Registry for BoundZNE
Analytically known expectation values of global Pauli strings on the
hardware validation circuits
"""

from enum import Enum

from .records import SCHEMA_VERSION, ExperimentRecord

# Scale factors used for the hardware validation runs
HARDWARE_LAMBDAS = (1.0, 1.3, 1.6)


class Circuit(str, Enum):
    GHZ = 'ghz'
    W_STATE = 'wstate'


class PauliObservable(str, Enum):
    ALL_X = 'x'
    ALL_Z = 'z'


_IDEAL_VALUES = {
    (Circuit.GHZ, PauliObservable.ALL_X): 1.0,
    (Circuit.GHZ, PauliObservable.ALL_Z): 1.0,
    (Circuit.W_STATE, PauliObservable.ALL_X): 0.0,
    (Circuit.W_STATE, PauliObservable.ALL_Z): -1.0,
}


def _coerce(enum_cls, value):
    if isinstance(value, enum_cls):
        return value
    return enum_cls(str(value).strip().lower())


def ideal_registry_lookup(circuit, observable):
    """Ideal expectation of X^n or Z^n for a GHZ or W-state circuit"""
    try:
        key = (_coerce(Circuit, circuit), _coerce(PauliObservable, observable))
    except ValueError:
        raise KeyError(f'no ideal value registered for ({circuit!r}, {observable!r})') from None
    return _IDEAL_VALUES[key]


def hardware_record(circuit, observable, width, backend, repetition, shots, lambdas, expectations):
    """ExperimentRecord for one hardware run, with the ideal value attached from the registry"""
    circuit = _coerce(Circuit, circuit)
    observable = _coerce(PauliObservable, observable)
    curve_id = f'{circuit.value}-{observable.value}-n{width}'
    return ExperimentRecord(
        id=f'{backend}-{curve_id}-r{int(repetition):02d}',
        curve_id=curve_id,
        backend_tag=str(backend),
        lambdas=lambdas,
        expectations=expectations,
        ideal=ideal_registry_lookup(circuit, observable),
        repetition=int(repetition),
        shots=int(shots),
        meta={
            'schema_version': SCHEMA_VERSION,
            'circuit': circuit.value,
            'observable': observable.value,
            'width': str(width),
        },
    )
