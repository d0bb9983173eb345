"""Optimal quantization of probability distributions under Bregman divergences."""

from .distortion import f_variance, gradient, hessian_line_sums
from .distribution import Density1D, gaussian, truncate_support, truncated_gaussian, uniform
from .divergence import BregmanFunction, from_spec, phi
from .geometry1d import Codebook1D, boundary, cells
from .solver import SolverConfig, gradient_descent, lloyd, weighted_lloyd
from .verify import verify_codebook

__version__ = "0.1.0"

__all__ = [
    "BregmanFunction",
    "Codebook1D",
    "Density1D",
    "SolverConfig",
    "boundary",
    "cells",
    "f_variance",
    "from_spec",
    "gaussian",
    "gradient",
    "gradient_descent",
    "hessian_line_sums",
    "lloyd",
    "phi",
    "truncate_support",
    "truncated_gaussian",
    "uniform",
    "verify_codebook",
    "weighted_lloyd",
]
