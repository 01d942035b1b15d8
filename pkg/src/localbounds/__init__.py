"""Computable lower bounds on entropic functionals over epsilon-balls, with a brute-force checker."""

from .classical import ProbArray, as_prob, clip, tv_distance
from .corefun import eta, g_fun, h2, h2_tilde
from .errors import (DomainError, InvalidStateError, LocalBoundsError, PreconditionError,
                     RangeError, SupportError)
from .gibbs import EnergySpectrum, F_H, F_lambda, solve_beta
from .oracle import BallSpec, OracleResult, certify_bound, minimize_functional_ball, sample_ball
from .quantum import DensityOperator, QCEnsemble, operator_clip, trace_distance
from .reports import BoundReport

__all__ = [
    "BallSpec", "BoundReport", "DensityOperator", "DomainError", "EnergySpectrum", "F_H",
    "F_lambda", "InvalidStateError", "LocalBoundsError", "OracleResult", "PreconditionError",
    "ProbArray", "QCEnsemble", "RangeError", "SupportError", "as_prob", "certify_bound", "clip",
    "eta", "g_fun", "h2", "h2_tilde", "minimize_functional_ball", "operator_clip", "sample_ball",
    "solve_beta", "trace_distance", "tv_distance",
]
