"""Maximum-likelihood fitting, standard errors and Wald tests."""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.special import logit, ndtr, stdtr

from .models import (
    Dataset,
    LinearParams,
    ModelKind,
    ModelParams,
    _evaluate,
    _loglik,
    category_probs_matrix,
    n_params,
    parameter_labels,
)


class FitStatus(str, Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"
    SINGULAR_INFORMATION = "SingularInformation"
    UNDEFINED_LIKELIHOOD = "UndefinedLikelihood"
    NON_MONOTONE_FIT = "NonMonotoneFit"
    GENERATION_FAILED = "GenerationFailed"


MONOTONE_CHECKS = ("centroid", "observations", "none")


@dataclass(frozen=True)
class FitOptions:
    """Newton controls.

    ``monotone_check`` decides when a converged fit is demoted to
    ``NonMonotoneFit``: ``"centroid"`` if the fitted cumulative curves cross
    at the mean training covariate vector, ``"observations"`` if they cross
    at any training observation, ``"none"`` never.
    """

    max_iterations: int = 100
    gradient_tolerance: float = 1e-6
    ll_rel_tolerance: float = 1e-10
    max_step_halvings: int = 30
    monotone_check: str = "centroid"

    def __post_init__(self):
        if not (self.max_iterations > 0 and self.gradient_tolerance > 0
                and self.ll_rel_tolerance > 0 and self.max_step_halvings > 0):
            raise ValueError("fit options must all be positive")
        if self.monotone_check not in MONOTONE_CHECKS:
            raise ValueError(f"monotone_check must be one of {MONOTONE_CHECKS}")


@dataclass(frozen=True)
class FitResult:
    """Outcome of one fit.

    ``std_errors`` and ``covariance`` are only set when ``status`` is
    ``Converged``; ``params`` is kept for any fit that ended at finite values.
    """

    model: str
    params: object
    std_errors: np.ndarray
    log_likelihood: float
    status: FitStatus
    iterations: int
    labels: tuple
    covariance: np.ndarray = None
    df: int = None
    n_crossed: int = 0

    @property
    def converged(self):
        return self.status is FitStatus.CONVERGED

    @property
    def estimates(self):
        return None if self.params is None else self.params.pack()

    def tests(self, alpha=0.05):
        """Wald tests for every packed parameter (thresholds/intercept included)."""
        if not self.converged:
            return []
        est = self.estimates
        return [wald_test(e, s, alpha, df=self.df) for e, s in zip(est, self.std_errors)]


@dataclass(frozen=True)
class TestResult:
    estimate: float
    std_error: float
    statistic: float
    p_value: float
    rejected: bool

    __test__ = False  # keep pytest from collecting this


def wald_test(estimate, std_error, alpha=0.05, df=None):
    """Two-sided Wald test of a zero coefficient.

    Uses the standard normal reference, or Student t with ``df`` degrees of
    freedom when ``df`` is given.
    """
    if not std_error > 0:
        raise ValueError("std_error must be positive")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    stat = float(estimate) / float(std_error)
    tail = ndtr(-abs(stat)) if df is None else stdtr(df, -abs(stat))
    p = float(min(1.0, 2.0 * tail))
    return TestResult(float(estimate), float(std_error), stat, p, p < alpha)


def initial_vector(kind, data):
    """Empirical cumulative logits for thresholds, zeros elsewhere."""
    n, k = data.n, data.k
    cum = np.cumsum(data.category_counts())[:-1] / n
    cum = np.clip(cum, 0.5 / n, 1.0 - 0.5 / n)
    th = logit(cum)
    for r in range(1, th.size):
        if th[r] <= th[r - 1]:
            th[r] = th[r - 1] + 1e-6
    vec = np.zeros(n_params(kind, data.p, k))
    vec[: k - 1] = th
    return vec


def _newton_step(info, grad):
    """Solve ``info @ step = grad``; damp the diagonal until ``info`` is positive definite."""
    if not np.all(np.isfinite(info)):
        return None
    scale = max(float(np.max(np.abs(np.diag(info)))), 1e-12)
    ridge = 0.0
    for _ in range(12):
        try:
            c = cho_factor(info + ridge * np.eye(info.shape[0]), check_finite=False)
            step = cho_solve(c, grad, check_finite=False)
            if np.all(np.isfinite(step)):
                return step
        except LinAlgError:
            pass
        ridge = scale * 1e-8 if ridge == 0.0 else ridge * 10.0
    return None


def _covariance(info):
    try:
        c = cho_factor(info, check_finite=False)
    except (LinAlgError, ValueError):
        return None
    cov = cho_solve(c, np.eye(info.shape[0]), check_finite=False)
    d = np.diag(cov)
    if not (np.all(np.isfinite(cov)) and np.all(d > 0)):
        return None
    return 0.5 * (cov + cov.T)


def fit_ordinal(kind, data, options=None):
    """Damped Newton maximum likelihood for one of the ordinal families.

    Threshold order is not enforced while iterating; fits whose training
    observations end with crossed cumulative curves get ``NonMonotoneFit``.
    """
    kind = ModelKind.parse(kind)
    options = options or FitOptions()
    X, y0, k, p = data.covariates, data._y0, data.k, data.p
    labels = tuple(parameter_labels(kind, p, k))

    def result(vec, ll, status, it, se=None, cov=None, crossed=0):
        params = None
        if vec is not None and np.all(np.isfinite(vec)):
            params = ModelParams.unpack(kind, vec, p, k)
        return FitResult(kind.value, params, se, float(ll), status, it, labels, cov,
                         n_crossed=crossed)

    vec = initial_vector(kind, data)
    ll, grad, hess = _evaluate(kind, vec, X, y0, k)
    if grad is None:
        return result(vec, ll, FitStatus.UNDEFINED_LIKELIHOOD, 0)

    status = FitStatus.MAX_ITERATIONS
    it = 0
    while it < options.max_iterations:
        if np.max(np.abs(grad)) < options.gradient_tolerance:
            status = FitStatus.CONVERGED
            break
        step = _newton_step(-hess, grad)
        if step is None:
            return result(vec, ll, FitStatus.SINGULAR_INFORMATION, it)
        it += 1
        t = 1.0
        new_ll = -np.inf
        defined = False
        for _ in range(options.max_step_halvings + 1):
            cand = vec + t * step
            new_ll = _loglik(kind, cand, X, y0, k)
            if np.isfinite(new_ll):
                defined = True
                if new_ll >= ll:
                    break
            t *= 0.5
        else:
            if not defined:
                return result(vec, ll, FitStatus.UNDEFINED_LIKELIHOOD, it)
            # no ascent left at machine precision: stationary point
            status = FitStatus.CONVERGED
            break
        old = ll
        vec = cand
        ll, grad, hess = _evaluate(kind, vec, X, y0, k)
        if grad is None:  # pragma: no cover - cand was checked above
            return result(vec, old, FitStatus.UNDEFINED_LIKELIHOOD, it)
        if abs(ll - old) < options.ll_rel_tolerance * max(abs(old), 1.0):
            status = FitStatus.CONVERGED
            break
    if status is not FitStatus.CONVERGED:
        return result(vec, ll, status, it)

    cov = _covariance(-0.5 * (hess + hess.T))
    if cov is None:
        return result(vec, ll, FitStatus.SINGULAR_INFORMATION, it)
    params = ModelParams.unpack(kind, vec, p, k)
    _, valid = category_probs_matrix(params, X)
    crossed = int(np.count_nonzero(~valid))
    if options.monotone_check == "observations":
        bad = crossed > 0
    elif options.monotone_check == "centroid":
        bad = not category_probs_matrix(params, X.mean(axis=0)[None, :])[1][0]
    else:
        bad = False
    if bad:
        return result(vec, ll, FitStatus.NON_MONOTONE_FIT, it, crossed=crossed)
    return result(vec, ll, FitStatus.CONVERGED, it, np.sqrt(np.diag(cov)), cov, crossed)


def fit_linear(data):
    """Least squares on the category index ``1..k`` with an intercept."""
    n, p = data.n, data.p
    if n <= p + 1:
        raise ValueError("linear model needs n > p + 1")
    D = np.column_stack([np.ones(n), data.covariates])
    y = data.outcomes.astype(float)
    labels = tuple([("intercept", 0, 0)] + [("location", j, 0) for j in range(1, p + 1)])
    df = n - p - 1
    xtx = D.T @ D
    try:
        c = cho_factor(xtx, check_finite=False)
        if np.linalg.cond(xtx) > 1e12:
            raise LinAlgError("ill-conditioned design")
    except LinAlgError:
        return FitResult("LM", None, None, -np.inf, FitStatus.SINGULAR_INFORMATION, 0,
                         labels, df=df)
    coef = cho_solve(c, D.T @ y)
    resid = y - D @ coef
    rss = float(resid @ resid)
    if rss <= (np.finfo(float).eps * n) ** 2 * float(y @ y):
        rss = 0.0  # exact fit up to rounding
    sigma2 = rss / df
    loglik = -0.5 * n * (np.log(2 * np.pi * max(rss, np.finfo(float).tiny) / n) + 1.0)
    params = LinearParams(float(coef[0]), coef[1:], sigma2 if sigma2 > 0 else np.finfo(float).tiny)
    cov = sigma2 * cho_solve(c, np.eye(p + 1))
    se = np.sqrt(np.diag(cov))
    if not np.all(se > 0):
        # exact fit: coefficients are known but no test is possible
        return FitResult("LM", params, None, loglik, FitStatus.SINGULAR_INFORMATION, 1,
                         labels, df=df)
    return FitResult("LM", params, se, loglik, FitStatus.CONVERGED, 1, labels, cov, df)


def fit_model(model, data, options=None):
    """Dispatch on ``"LM"`` or an ordinal :class:`ModelKind`."""
    if str(getattr(model, "value", model)).upper() == "LM":
        return fit_linear(data)
    return fit_ordinal(model, data, options)


__all__ = [
    "Dataset",
    "FitOptions",
    "FitResult",
    "FitStatus",
    "TestResult",
    "fit_linear",
    "fit_model",
    "fit_ordinal",
    "initial_vector",
    "wald_test",
]
