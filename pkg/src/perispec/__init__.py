"""Spectral solvers and verification tools for the linear state-based
peridynamic operator on the periodic torus."""

from .errors import NumericalError, PerispecError, ValidationError
from .fields import SpectralField, make_decay_field, sobolev_norm
from .multipliers import (
    Material,
    MultiplierMatrix,
    eigenvalues_exact,
    eigenvalues_quadrature,
    multiplier_matrix,
    multiplier_quadrature,
    navier_reference,
)
from .solvers import Navier, Peridynamic
from .studies import StudyConfig, StudyTable

__version__ = "0.1.0"

__all__ = [
    "Material",
    "MultiplierMatrix",
    "Navier",
    "NumericalError",
    "Peridynamic",
    "PerispecError",
    "SpectralField",
    "StudyConfig",
    "StudyTable",
    "ValidationError",
    "eigenvalues_exact",
    "eigenvalues_quadrature",
    "make_decay_field",
    "multiplier_matrix",
    "multiplier_quadrature",
    "navier_reference",
    "sobolev_norm",
]
