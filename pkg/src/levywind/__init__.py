"""Brownian windings, exponential functionals of Levy processes and Riccati
Lyapunov exponents, each checked by Monte Carlo against closed forms and
recursions."""

from .kernels import BACKEND
from .levy import ExpJumps, LevySpec, PathRecord, c_function, drift_coefficient, is_subordinator, levy_exponent, sample_path

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ExpJumps",
    "LevySpec",
    "PathRecord",
    "c_function",
    "drift_coefficient",
    "is_subordinator",
    "levy_exponent",
    "sample_path",
    "__version__",
]
