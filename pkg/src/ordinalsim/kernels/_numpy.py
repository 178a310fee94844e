"""Pure-numpy likelihood kernels.

Conventions shared with the numba kernels:

* ``y`` holds 0-based categories ``0..k-1``.
* ``eta`` is the ``n x (k-1)`` matrix of cumulative linear predictors, so
  ``P(Y <= r | x_i) = expit(eta[i, r])``.
* Cut-major layout: the gradient/Hessian of the unrestricted model in which
  every cut ``r`` has its own intercept and slope vector, ordered
  ``(theta_r, b_r1, ..., b_rp)`` per cut, cuts concatenated.
"""

import numpy as np
from scipy.special import expit, log_expit


def _bounds(eta, y):
    n, km1 = eta.shape
    rows = np.arange(n)
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    has_lo = y > 0
    has_hi = y < km1
    lo[has_lo] = eta[rows[has_lo], y[has_lo] - 1]
    hi[has_hi] = eta[rows[has_hi], y[has_hi]]
    return lo, hi, has_lo, has_hi


def obs_terms(lo, hi):
    """Per-observation log-probability and derivatives w.r.t. the bounding predictors.

    Returns ``(logp, a_lo, a_hi, h_ll, h_hh, h_lh, ok)``; ``ok`` is False where
    the observed category has non-positive probability.
    """
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        ok = hi > lo
        em = -np.expm1(lo - hi)
        logp = log_expit(hi) + log_expit(-lo) + np.log(em)
        a_hi = np.exp(log_expit(-hi) - log_expit(-lo)) / em
        a_lo = -np.exp(log_expit(lo) - log_expit(hi)) / em
        a_hi = np.where(np.isposinf(hi), 0.0, a_hi)
        a_lo = np.where(np.isneginf(lo), 0.0, a_lo)
        fa = expit(hi)
        fb = expit(lo)
        h_hh = a_hi * (1.0 - 2.0 * fa) - a_hi * a_hi
        h_ll = a_lo * (1.0 - 2.0 * fb) - a_lo * a_lo
        h_lh = -a_hi * a_lo
    bad = ~ok
    if bad.any():
        logp = np.where(ok, logp, -np.inf)
        for arr in (a_lo, a_hi, h_ll, h_hh, h_lh):
            arr[bad] = 0.0
    return logp, a_lo, a_hi, h_ll, h_hh, h_lh, ok


def cut_loglik(eta, y):
    """Total log-likelihood; ``-inf`` if any observed category is impossible."""
    lo, hi, _, _ = _bounds(eta, y)
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        if not np.all(hi > lo):
            return -np.inf
        ll = np.sum(log_expit(hi) + log_expit(-lo) + np.log(-np.expm1(lo - hi)))
    return float(ll)


def cut_derivs(X, y, eta, want_hess=True):
    """Log-likelihood, cut-major gradient and Hessian of the unrestricted model.

    Returns ``(ll, ok, grad, hess)`` with ``grad`` of shape ``(k-1, p+1)`` and
    ``hess`` of shape ``((k-1)(p+1), (k-1)(p+1))`` (``None`` unless requested).
    """
    n, km1 = eta.shape
    p1 = X.shape[1] + 1
    lo, hi, has_lo, has_hi = _bounds(eta, y)
    logp, a_lo, a_hi, h_ll, h_hh, h_lh, ok = obs_terms(lo, hi)
    if not ok.all():
        return -np.inf, False, None, None
    rows = np.arange(n)
    G = np.zeros((n, km1))
    G[rows[has_hi], y[has_hi]] += a_hi[has_hi]
    G[rows[has_lo], y[has_lo] - 1] += a_lo[has_lo]
    Xt = np.empty((n, p1))
    Xt[:, 0] = 1.0
    Xt[:, 1:] = X
    grad = G.T @ Xt
    hess = None
    if want_hess:
        hess = np.zeros((km1 * p1, km1 * p1))
        for r in range(km1):
            w = np.where(y == r, h_hh, 0.0) + np.where(y == r + 1, h_ll, 0.0)
            s = slice(r * p1, (r + 1) * p1)
            hess[s, s] = Xt.T @ (w[:, None] * Xt)
            if r + 1 < km1:
                w = np.where(y == r + 1, h_lh, 0.0)
                t = slice((r + 1) * p1, (r + 2) * p1)
                blk = Xt.T @ (w[:, None] * Xt)
                hess[s, t] = blk
                hess[t, s] = blk.T
    return float(logp.sum()), True, grad, hess


def lsc_eta(X, theta, beta, gamma):
    scale = np.exp(-(X @ gamma))
    return (theta[None, :] + (X @ beta)[:, None]) * scale[:, None]


def lsc_derivs(X, y, theta, beta, gamma, want_hess=True):
    """Log-likelihood, gradient and Hessian of the location-scale model.

    Packed order ``(theta_1..theta_{k-1}, beta_1..beta_p, gamma_1..gamma_p)``.
    """
    n, p = X.shape
    km1 = theta.shape[0]
    P = km1 + 2 * p
    s = np.exp(-(X @ gamma))
    eta = (theta[None, :] + (X @ beta)[:, None]) * s[:, None]
    lo, hi, has_lo, has_hi = _bounds(eta, y)
    logp, a_lo, a_hi, h_ll, h_hh, h_lh, ok = obs_terms(lo, hi)
    if not ok.all():
        return -np.inf, False, None, None
    rows = np.arange(n)
    eta_lo = np.where(has_lo, lo, 0.0)
    eta_hi = np.where(has_hi, hi, 0.0)

    J_hi = np.zeros((n, P))
    J_lo = np.zeros((n, P))
    J_hi[rows[has_hi], y[has_hi]] = s[has_hi]
    J_lo[rows[has_lo], y[has_lo] - 1] = s[has_lo]
    J_hi[:, km1:km1 + p] = np.where(has_hi, s, 0.0)[:, None] * X
    J_lo[:, km1:km1 + p] = np.where(has_lo, s, 0.0)[:, None] * X
    J_hi[:, km1 + p:] = -eta_hi[:, None] * X
    J_lo[:, km1 + p:] = -eta_lo[:, None] * X

    grad = J_hi.T @ a_hi + J_lo.T @ a_lo
    hess = None
    if want_hess:
        hess = J_hi.T @ (h_hh[:, None] * J_hi + h_lh[:, None] * J_lo)
        hess += J_lo.T @ (h_ll[:, None] * J_lo + h_lh[:, None] * J_hi)
        # second derivatives of eta: d2/dtheta dgamma = -s x,
        # d2/dbeta dgamma = -s x x', d2/dgamma dgamma = eta x x'
        a_tot = a_hi + a_lo
        G = np.zeros((n, km1))
        G[rows[has_hi], y[has_hi]] += a_hi[has_hi]
        G[rows[has_lo], y[has_lo] - 1] += a_lo[has_lo]
        tg = -(G * s[:, None]).T @ X
        bg = -(X.T @ ((a_tot * s)[:, None] * X))
        gg = X.T @ ((a_hi * eta_hi + a_lo * eta_lo)[:, None] * X)
        bs = slice(km1, km1 + p)
        gs = slice(km1 + p, P)
        hess[:km1, gs] += tg
        hess[gs, :km1] += tg.T
        hess[bs, gs] += bg
        hess[gs, bs] += bg.T
        hess[gs, gs] += gg
    return float(logp.sum()), True, grad, hess
