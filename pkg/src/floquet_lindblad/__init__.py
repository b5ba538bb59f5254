"""Time-periodic Lindblad dynamics in finite dimension.

Floquet normal forms, weak-coupling (Davies and adiabatic) generators, the
Fourier-lifted generalized Lindbladian, and three independent propagation
routes with structural checks.  Superoperators act on column-major
vectorized matrices: ``vec(l a r) = kron(r.T, l) vec(a)``.
"""
from .errors import (
    AliasingWarning,
    BranchCutError,
    ConfigError,
    DecompositionError,
    DegeneracyWarning,
    DimensionMismatchError,
    FloquetLindbladError,
    IllConditionedWarning,
    InvalidBathError,
    InvalidInputError,
    InvertibilityError,
    NumericRangeError,
    TruncationWarning,
)
from .floquet import PeriodicMatrixFunction, UnitaryFloquet, floquet_decompose, unitary_floquet
from .model import FactorizedModel
from .wcl import BathSpectrum, davies_generator, decompose_jumps, verify_standard_form

__all__ = [
    "AliasingWarning",
    "BranchCutError",
    "ConfigError",
    "DecompositionError",
    "DegeneracyWarning",
    "DimensionMismatchError",
    "FloquetLindbladError",
    "IllConditionedWarning",
    "InvalidBathError",
    "InvalidInputError",
    "InvertibilityError",
    "NumericRangeError",
    "TruncationWarning",
    "BathSpectrum",
    "FactorizedModel",
    "PeriodicMatrixFunction",
    "UnitaryFloquet",
    "davies_generator",
    "decompose_jumps",
    "floquet_decompose",
    "unitary_floquet",
    "verify_standard_form",
]
__version__ = "0.1.0"
