"""Thresholds, true parameters and dataset generation for the simulation grid."""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit

from .models import Dataset, ModelKind, ModelParams, category_probs_matrix, linear_predictors
from .scenarios import ThetaSetting

SKEWED_K7 = (-2.74, -1.96, -1.45, -1.00, -0.50, 0.29)
DEFAULT_SKEW_FLOOR = 0.06
DEFAULT_UNSTRUCTURED_FACTOR = 2.2
SUPPORTED_K = (3, 5, 7)

# sign patterns of the category-specific effects, per k
CSO_PATTERNS = {
    5: (-1.0, 1.0, 1.0, -1.0),
    7: (-1.0, 0.0, 1.0, 1.0, 0.0, -1.0),
}


class GenerationAborted(RuntimeError):
    pass


@dataclass(frozen=True)
class GenDiagnostics:
    observation_redraws: int = 0
    dataset_redraws: int = 0
    aborted: bool = False


@dataclass(frozen=True)
class TrueParams:
    params: ModelParams
    informative: tuple


def skewed_distribution(k, floor=DEFAULT_SKEW_FLOOR, base=np.e):
    """Category distribution ``floor + a * base**r`` (``r = 1..k``) normalised to one.

    With the default floor and base, ``k = 7`` reproduces the printed skewed
    thresholds to two decimals.
    """
    if not 0 < floor * k < 1:
        raise ValueError("skew floor too large for k categories")
    w = base ** np.arange(1, k + 1, dtype=float)
    return floor + (1.0 - floor * k) * w / w.sum()


def unstructured_distribution(k, factor=DEFAULT_UNSTRUCTURED_FACTOR):
    """Lowest and middle category ``factor`` times as likely as the others."""
    w = np.ones(k)
    w[0] = factor
    w[k // 2] = factor
    return w / w.sum()


def thresholds_for(k, setting, skew_floor=DEFAULT_SKEW_FLOOR,
                   unstructured_factor=DEFAULT_UNSTRUCTURED_FACTOR):
    """Latent thresholds whose zero-effect outcome distribution matches ``setting``."""
    if k not in SUPPORTED_K:
        raise ValueError(f"k must be one of {SUPPORTED_K}, got {k}")
    setting = ThetaSetting.parse(setting)
    if setting is ThetaSetting.UNIFORM:
        probs = np.full(k, 1.0 / k)
    elif setting is ThetaSetting.SKEWED:
        if k == 7 and skew_floor == DEFAULT_SKEW_FLOOR:
            return np.array(SKEWED_K7)
        probs = skewed_distribution(k, skew_floor)
    else:
        probs = unstructured_distribution(k, unstructured_factor)
    return logit(np.cumsum(probs)[:-1])


def target_distribution(k, setting, **kwargs):
    """Outcome distribution implied by :func:`thresholds_for` when all effects are zero."""
    cum = expit(thresholds_for(k, setting, **kwargs))
    return np.diff(np.concatenate([[0.0], cum, [1.0]]))


def true_params_for(scenario):
    """True model parameters; the first ``informative`` covariates carry the effects."""
    s = scenario
    dgp = ModelKind.parse(s.dgp)
    if dgp is ModelKind.CSO and s.k not in CSO_PATTERNS:
        raise ValueError("no category-specific data for k = 3")
    theta = thresholds_for(s.k, s.theta_setting, s.skew_floor, s.unstructured_factor)
    m = s.informative
    info = tuple(range(m))
    if dgp is ModelKind.CSO:
        B = np.zeros((s.p, s.k - 1))
        B[:m, :] = s.beta_value * np.asarray(CSO_PATTERNS[s.k])
        return TrueParams(ModelParams(dgp, theta, category_location=B), info)
    beta = np.zeros(s.p)
    beta[:m] = s.beta_value
    if dgp is ModelKind.PO:
        return TrueParams(ModelParams(dgp, theta, location=beta), info)
    gamma = np.zeros(s.p)
    gamma[:m] = s.gamma_value
    return TrueParams(ModelParams(dgp, theta, location=beta, dispersion=gamma), info)


def replication_rng(master_seed, scenario_id, rep_index):
    """Private counter-based stream for one ``(scenario, replication)`` pair."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(scenario_id), int(rep_index)))
    return np.random.Generator(np.random.Philox(ss))


def draw_covariates(rng, n, p):
    """i.i.d. normal covariates with mean 0 and standard deviation 0.5."""
    return rng.normal(0.0, 0.5, size=(n, p))


def _sample(cum, u):
    # inverse CDF: smallest r with u <= P(Y <= r)
    return 1 + np.sum(u[:, None] > cum, axis=1)


def draw_outcome(rng, true_params, x, max_attempts=10000):
    """Draw one outcome, redrawing the covariate vector while the probabilities are invalid.

    Returns ``(category, attempts, x_used)``.
    """
    params = getattr(true_params, "params", true_params)
    x = np.asarray(x, dtype=float)
    attempts = 1
    while True:
        _, valid = category_probs_matrix(params, x[None, :])
        if valid[0]:
            break
        if attempts >= max_attempts:
            raise GenerationAborted(f"no valid covariate vector after {attempts} attempts")
        x = draw_covariates(rng, 1, x.size)[0]
        attempts += 1
    cum = expit(linear_predictors(params, x[None, :]))
    category = int(_sample(cum, np.array([rng.random()]))[0])
    return category, attempts, x


def generate_dataset(rng, scenario, max_observation_attempts=10000, max_dataset_redraws=10000,
                     min_per_category=5):
    """Draw a dataset obeying both redraw rules.

    Returns ``(dataset, diagnostics)``; ``dataset`` is ``None`` when a cap was hit.
    """
    tp = true_params_for(scenario)
    params = tp.params
    n, p, k = scenario.n, scenario.p, scenario.k
    obs_redraws = 0
    for attempt in range(max_dataset_redraws + 1):
        X = draw_covariates(rng, n, p)
        _, valid = category_probs_matrix(params, X)
        tries = np.ones(n, dtype=np.int64)
        while not valid.all():
            bad = np.flatnonzero(~valid)
            if tries[bad].max() >= max_observation_attempts:
                return None, GenDiagnostics(obs_redraws + int(tries.sum() - n), attempt, True)
            X[bad] = draw_covariates(rng, bad.size, p)
            tries[bad] += 1
            _, valid[bad] = category_probs_matrix(params, X[bad])
        obs_redraws += int(tries.sum() - n)
        cum = expit(linear_predictors(params, X))
        y = _sample(cum, rng.random(n))
        if np.bincount(y - 1, minlength=k).min() >= min_per_category:
            return Dataset(y, X, k), GenDiagnostics(obs_redraws, attempt, False)
    return None, GenDiagnostics(obs_redraws, max_dataset_redraws, True)
