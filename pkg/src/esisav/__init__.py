"""Exponential semi-implicit scalar auxiliary variable (ESI-SAV) time stepping."""

from .errors import (
    ConfigError,
    EsiSavError,
    GridMismatchError,
    InsufficientHistoryError,
    NumericalError,
    ScaleOverflowError,
    SingularModeError,
)
from .kernels import BACKEND
from .models import ModelSpec, allen_cahn, cahn_hilliard, chemical_potential, energy, linear_model, pfc
from .spectral import DiagonalSymbol, Grid, make_grid
from .steppers import EsiSavState, SchemeKind, integrate, v_family

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "DiagonalSymbol",
    "EsiSavError",
    "EsiSavState",
    "Grid",
    "GridMismatchError",
    "InsufficientHistoryError",
    "ModelSpec",
    "NumericalError",
    "ScaleOverflowError",
    "SchemeKind",
    "SingularModeError",
    "allen_cahn",
    "cahn_hilliard",
    "chemical_potential",
    "energy",
    "integrate",
    "linear_model",
    "make_grid",
    "pfc",
    "v_family",
]
