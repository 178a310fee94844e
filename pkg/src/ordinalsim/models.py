"""Cumulative logit models for ordinal outcomes.

Four model families share one parameterisation of the cumulative
probabilities ``P(Y <= r | x) = expit(eta_r(x))`` for ``r = 1..k-1``:

====  =====================================================================
PO    ``eta_r = theta_r + x'beta``
CSO   ``eta_r = theta_r + x'beta_r``
LSH   ``eta_r = theta_r + x'beta + (r - k/2) x'gamma``
LSC   ``eta_r = (theta_r + x'beta) / exp(x'gamma)``
====  =====================================================================

The sign convention is ``+x'beta`` inside the link, so a positive coefficient
moves mass towards *low* categories. Software that writes ``theta_r - x'beta``
reports coefficients with the opposite sign. Dispersion covariates are the
location covariates (``z = x``).

Packed parameter vectors are ordered thresholds first, then ``beta``, then
``gamma`` (LSH/LSC); for CSO the thresholds are followed by ``beta_1``,
``beta_2``, ..., ``beta_{k-1}`` (column-major by category).
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.special import expit

from . import kernels


class ModelKind(str, Enum):
    PO = "PO"
    CSO = "CSO"
    LSH = "LSH"
    LSC = "LSC"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown ordinal model kind {value!r}") from None


class LikelihoodUndefined(ValueError):
    """Raised when some observed category has non-positive probability."""


def shift_weights(k):
    """LSH threshold-shift weights ``r - k/2`` for ``r = 1..k-1``."""
    return np.arange(1, k) - k / 2.0


@dataclass(frozen=True)
class ModelParams:
    kind: ModelKind
    thresholds: np.ndarray
    location: np.ndarray = None
    dispersion: np.ndarray = None
    category_location: np.ndarray = None

    def __post_init__(self):
        kind = ModelKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        th = np.asarray(self.thresholds, dtype=float)
        if th.ndim != 1 or th.size < 1:
            raise ValueError("thresholds must be a non-empty vector")
        object.__setattr__(self, "thresholds", th)
        for name in ("location", "dispersion", "category_location"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, np.asarray(v, dtype=float))
        if kind is ModelKind.CSO:
            if self.category_location is None or self.location is not None:
                raise ValueError("CSO needs category_location and no location")
            if self.category_location.ndim != 2 or self.category_location.shape[1] != th.size:
                raise ValueError("category_location must be p x (k-1)")
        else:
            if self.location is None or self.category_location is not None:
                raise ValueError(f"{kind.value} needs location and no category_location")
            if self.location.ndim != 1:
                raise ValueError("location must be a vector")
        if kind in (ModelKind.LSH, ModelKind.LSC):
            if self.dispersion is None or self.dispersion.shape != (self.p,):
                raise ValueError(f"{kind.value} needs a dispersion vector of length p")
        elif self.dispersion is not None:
            raise ValueError(f"{kind.value} has no dispersion block")
        if not np.all(np.isfinite(self.pack())):
            raise ValueError("model coefficients must be finite")

    @property
    def k(self):
        return self.thresholds.size + 1

    @property
    def p(self):
        if self.kind is ModelKind.CSO:
            return self.category_location.shape[0]
        return self.location.size

    def pack(self):
        parts = [self.thresholds]
        if self.kind is ModelKind.CSO:
            parts.append(self.category_location.ravel(order="F"))
        else:
            parts.append(self.location)
            if self.dispersion is not None:
                parts.append(self.dispersion)
        return np.concatenate(parts)

    @classmethod
    def unpack(cls, kind, vec, p, k):
        kind = ModelKind.parse(kind)
        vec = np.asarray(vec, dtype=float)
        if vec.size != n_params(kind, p, k):
            raise ValueError(f"expected {n_params(kind, p, k)} parameters, got {vec.size}")
        th = vec[: k - 1]
        rest = vec[k - 1:]
        if kind is ModelKind.CSO:
            return cls(kind, th, category_location=rest.reshape((p, k - 1), order="F"))
        if kind is ModelKind.PO:
            return cls(kind, th, location=rest)
        return cls(kind, th, location=rest[:p], dispersion=rest[p:])

    def parameter_labels(self):
        return parameter_labels(self.kind, self.p, self.k)

    def cut_coefficients(self):
        """``p x (k-1)`` slope matrix for the linear-predictor families."""
        if self.kind is ModelKind.CSO:
            return self.category_location
        if self.kind is ModelKind.PO:
            return np.repeat(self.location[:, None], self.k - 1, axis=1)
        if self.kind is ModelKind.LSH:
            return self.location[:, None] + np.outer(self.dispersion, shift_weights(self.k))
        raise ValueError("LSC has no per-cut slope representation")


@dataclass(frozen=True)
class LinearParams:
    intercept: float
    slopes: np.ndarray
    sigma2: float

    def __post_init__(self):
        object.__setattr__(self, "slopes", np.asarray(self.slopes, dtype=float))
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if not (np.isfinite(self.intercept) and np.all(np.isfinite(self.slopes))
                and np.isfinite(self.sigma2)):
            raise ValueError("linear model parameters must be finite")

    def pack(self):
        return np.concatenate([[self.intercept], self.slopes])


@dataclass(frozen=True)
class Dataset:
    """Ordinal outcomes in ``1..k`` with an ``n x p`` covariate matrix."""

    outcomes: np.ndarray
    covariates: np.ndarray
    k: int
    _y0: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        y = np.asarray(self.outcomes)
        X = np.ascontiguousarray(self.covariates, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if y.ndim != 1 or y.size == 0:
            raise ValueError("outcomes must be a non-empty vector")
        if X.shape[0] != y.size or X.shape[1] < 1:
            raise ValueError("covariates must be n x p with p >= 1")
        if not np.all(np.isfinite(X)):
            raise ValueError("covariates must be finite")
        if np.any(y != np.round(y)):
            raise ValueError("outcomes must be integers")
        y = y.astype(np.int64)
        k = int(self.k)
        if k < 2 or y.min() < 1 or y.max() > k:
            raise ValueError(f"outcomes must lie in 1..{k}")
        object.__setattr__(self, "outcomes", y)
        object.__setattr__(self, "covariates", X)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "_y0", y - 1)

    @property
    def n(self):
        return self.outcomes.size

    @property
    def p(self):
        return self.covariates.shape[1]

    def category_counts(self):
        return np.bincount(self.outcomes - 1, minlength=self.k)


def n_params(kind, p, k):
    kind = ModelKind.parse(kind)
    if kind is ModelKind.PO:
        return k - 1 + p
    if kind is ModelKind.CSO:
        return (k - 1) * (p + 1)
    return k - 1 + 2 * p


def parameter_labels(kind, p, k):
    """``(block, covariate, category)`` per packed entry; covariate is 1-based, 0 for thresholds."""
    kind = ModelKind.parse(kind)
    labels = [("threshold", 0, r) for r in range(1, k)]
    if kind is ModelKind.CSO:
        labels += [("category", j, r) for r in range(1, k) for j in range(1, p + 1)]
    else:
        labels += [("location", j, 0) for j in range(1, p + 1)]
        if kind is not ModelKind.PO:
            labels += [("dispersion", j, 0) for j in range(1, p + 1)]
    return labels


@lru_cache(maxsize=256)
def _cut_map(kind, p, k):
    """Linear map from packed params to the cut-major unrestricted layout."""
    kind = ModelKind.parse(kind)
    km1 = k - 1
    p1 = p + 1
    P = n_params(kind, p, k)
    A = np.zeros((km1 * p1, P))
    w = shift_weights(k)
    for r in range(km1):
        A[r * p1, r] = 1.0
        for j in range(p):
            row = r * p1 + 1 + j
            if kind is ModelKind.CSO:
                A[row, km1 + r * p + j] = 1.0
            else:
                A[row, km1 + j] = 1.0
                if kind is ModelKind.LSH:
                    A[row, km1 + p + j] = w[r]
    A.setflags(write=False)
    return A


def _check_dims(params, X):
    if X.shape[1] != params.p:
        raise ValueError(f"covariate dimension {X.shape[1]} != model dimension {params.p}")


def linear_predictors(params, X):
    """``n x (k-1)`` matrix of cumulative log-odds."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _check_dims(params, X)
    if params.kind is ModelKind.LSC:
        return np.asarray(kernels.numpy_impl.lsc_eta(X, params.thresholds, params.location,
                                                     params.dispersion))
    return params.thresholds[None, :] + X @ params.cut_coefficients()


def cumulative_prob(params, x, r):
    """``P(Y <= r | x)`` for ``1 <= r <= k-1``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("x must be a single covariate vector")
    if not 1 <= r <= params.k - 1:
        raise ValueError(f"category index must be in 1..{params.k - 1}")
    return float(expit(linear_predictors(params, x[None, :])[0, r - 1]))


def category_probs_matrix(params, X):
    """Category probabilities for every row of ``X`` plus a per-row validity flag."""
    eta = linear_predictors(params, X)
    n = eta.shape[0]
    cum = np.empty((n, params.k + 1))
    cum[:, 0] = 0.0
    cum[:, 1:-1] = expit(eta)
    cum[:, -1] = 1.0
    probs = np.diff(cum, axis=1)
    valid = np.all(np.diff(eta, axis=1) >= 0.0, axis=1)
    return probs, valid


def category_probs(params, x):
    """Return ``(probs, valid)`` for one covariate vector."""
    x = np.asarray(x, dtype=float)
    probs, valid = category_probs_matrix(params, x[None, :])
    return probs[0], bool(valid[0])


def _evaluate(kind, vec, X, y0, k, want_hess=True):
    """Log-likelihood, score and Hessian at a packed vector; ``(-inf, None, None)`` if undefined."""
    p = X.shape[1]
    km1 = k - 1
    if kind is ModelKind.LSC:
        ll, ok, grad, hess = kernels.lsc_derivs(X, y0, vec[:km1], vec[km1:km1 + p],
                                                vec[km1 + p:], want_hess)
        return (ll, grad, hess) if ok else (-np.inf, None, None)
    A = _cut_map(kind, p, k)
    full = (A @ vec).reshape(km1, p + 1)
    eta = full[:, 0][None, :] + X @ full[:, 1:].T
    ll, ok, g, h = kernels.cut_derivs(X, y0, eta, want_hess)
    if not ok:
        return -np.inf, None, None
    grad = A.T @ g.ravel()
    hess = A.T @ h @ A if want_hess else None
    return ll, grad, hess


def _loglik(kind, vec, X, y0, k):
    p = X.shape[1]
    km1 = k - 1
    if kind is ModelKind.LSC:
        eta = kernels.lsc_eta(X, vec[:km1], vec[km1:km1 + p], vec[km1 + p:])
    else:
        full = (_cut_map(kind, p, k) @ vec).reshape(km1, p + 1)
        eta = full[:, 0][None, :] + X @ full[:, 1:].T
    return kernels.cut_loglik(eta, y0)


def _check_data(params, data):
    if data.k != params.k:
        raise ValueError(f"dataset has k={data.k}, model has k={params.k}")
    _check_dims(params, data.covariates)


def log_likelihood(params, data):
    """Multinomial log-likelihood; ``-inf`` when an observed category has probability <= 0."""
    _check_data(params, data)
    return float(_loglik(params.kind, params.pack(), data.covariates, data._y0, data.k))


def score(params, data):
    """Gradient of :func:`log_likelihood` in packed order."""
    _check_data(params, data)
    ll, grad, _ = _evaluate(params.kind, params.pack(), data.covariates, data._y0, data.k,
                            want_hess=False)
    if grad is None:
        raise LikelihoodUndefined("likelihood undefined at these parameters")
    return grad


def observed_information(params, data):
    """Negative Hessian of :func:`log_likelihood` in packed order."""
    _check_data(params, data)
    ll, grad, hess = _evaluate(params.kind, params.pack(), data.covariates, data._y0, data.k)
    if hess is None:
        raise LikelihoodUndefined("likelihood undefined at these parameters")
    info = -hess
    return 0.5 * (info + info.T)
