"""Radial p-adic reaction-diffusion: exact spectral calculus, solvers and blow-up checks."""

from .errors import (
    ConfigError,
    DivergentConstant,
    EstimateFailed,
    InvalidArgument,
    InvalidWindow,
    IterationDiverged,
    Unsupported,
)
from .operators import PDTerms, TailPolicy
from .radial import RadialField
from .solver import ModelParams, SolverConfig, Trajectory, solve
from .wavelets import BlowupWeight, ComparisonODE, WaveletIndex

__version__ = "0.1.0"

__all__ = [
    "BlowupWeight",
    "ComparisonODE",
    "ConfigError",
    "DivergentConstant",
    "EstimateFailed",
    "InvalidArgument",
    "InvalidWindow",
    "IterationDiverged",
    "ModelParams",
    "PDTerms",
    "RadialField",
    "SolverConfig",
    "TailPolicy",
    "Trajectory",
    "Unsupported",
    "WaveletIndex",
    "solve",
]
