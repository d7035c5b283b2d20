"""Haar-measure integrals of submatrix functionals on U(N).

Four routes are provided: Monte Carlo over the group, exact reduction to the
ball of contractions, large-N pairing and Gaussian asymptotics, and saddle
point (Laplace) asymptotics.
"""

__version__ = "0.1.0"

from .asymptotics import PairingPattern, factorized_expectation, gaussian_expectation, weingarten_leading
from .haar import BlockSpec, RngStream, block, sample_ball_blocks, sample_blocks, sample_unitary
from .linalg import LogValue, coupling_det, det_realified
from .montecarlo import IntegrandSpec, MCEstimate, MonomialPattern, integrate_double, integrate_single, moment_monomial
from .reduction import (
    detpower_integral_q2,
    leading_reduced_integral,
    normalization_constant,
    reduced_expectation,
    reduced_integral_q1,
)
from .saddle import QuarticConfig, SaddleReport, linear_saddle, quartic_saddle, quartic_threshold

__all__ = [
    "BlockSpec",
    "IntegrandSpec",
    "LogValue",
    "MCEstimate",
    "MonomialPattern",
    "PairingPattern",
    "QuarticConfig",
    "RngStream",
    "SaddleReport",
    "block",
    "coupling_det",
    "det_realified",
    "detpower_integral_q2",
    "factorized_expectation",
    "gaussian_expectation",
    "integrate_double",
    "integrate_single",
    "leading_reduced_integral",
    "linear_saddle",
    "moment_monomial",
    "normalization_constant",
    "quartic_saddle",
    "quartic_threshold",
    "reduced_expectation",
    "reduced_integral_q1",
    "sample_ball_blocks",
    "sample_blocks",
    "sample_unitary",
    "weingarten_leading",
]
