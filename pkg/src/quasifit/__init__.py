"""Least-squares regression over quasiconvex (or quasiconcave) functions,
optionally monotone, computed exactly by branch-and-bound."""

from .data import DataSet
from .errors import (DimensionMismatch, DomainError, EmptyData, InvalidParams, NodeLimitExceeded,
                     NumericalFailure, QuasifitError, TooLarge)
from .estimator import (FittedModel, fit, fit_isotonic, in_sample_loss, load_model, predict,
                        risk_vs_truth, save_model)
from .feasibility import check, separating_vectors
from .oracle import brute_force
from .shape import ShapeSpec
from .solver import SolverParams
from .synth import SynthConfig, generate, psi, psi_dagger, smoothing

__version__ = "0.1.0"
