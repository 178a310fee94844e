"""Ordinal regression models, maximum-likelihood fitting and a Monte-Carlo harness
for type-I error, power and bias of their Wald tests."""

from .datagen import generate_dataset, replication_rng, thresholds_for, true_params_for
from .estimation import FitOptions, FitResult, FitStatus, fit_linear, fit_model, fit_ordinal, wald_test
from .models import (
    Dataset,
    LinearParams,
    ModelKind,
    ModelParams,
    category_probs,
    cumulative_prob,
    log_likelihood,
    observed_information,
    score,
)
from .scenarios import GridConfig, ScenarioSpec, ThetaSetting, enumerate_grid
from .simulation import aggregate, correlation_of_biases, run_replication, run_scenario

__version__ = "0.1.0"
