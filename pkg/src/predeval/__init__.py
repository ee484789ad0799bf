"""Evaluation of mean predictors: Bregman scores, Murphy decomposition,
Lorenz/concentration-curve statistics and dominance checks."""

from .curves import Curve, concentration_curve, lorenz_curve, murphy_curve, q_function, sign_changes
from .decomp import DecompositionResult, mcb_mse, dsc_mse, murphy_decomposition, skill_score
from .losses import (
    AtomicMeasure,
    BregmanDomainError,
    ConvexGenerator,
    PiecewiseLinearMeasure,
    bregman_loss,
    ecdf_measure,
    elementary_loss,
    mixture_loss,
    score,
    tweedie_generator,
    weighted_score,
)
from .sample import PairedSample, ValidationError, pav, recalibrate, validate
from .stats import abc, gini

__version__ = "0.1.0"

__all__ = [
    "AtomicMeasure",
    "BregmanDomainError",
    "ConvexGenerator",
    "Curve",
    "DecompositionResult",
    "PairedSample",
    "PiecewiseLinearMeasure",
    "ValidationError",
    "abc",
    "bregman_loss",
    "concentration_curve",
    "dsc_mse",
    "ecdf_measure",
    "elementary_loss",
    "gini",
    "lorenz_curve",
    "mcb_mse",
    "mixture_loss",
    "murphy_curve",
    "murphy_decomposition",
    "pav",
    "q_function",
    "recalibrate",
    "score",
    "sign_changes",
    "skill_score",
    "tweedie_generator",
    "validate",
    "weighted_score",
]
