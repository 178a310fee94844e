"""numba kernels; same signatures and layouts as :mod:`._numpy`."""

import math

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _log_sigmoid(z):
    if z >= 0.0:
        return -math.log1p(math.exp(-z))
    return z - math.log1p(math.exp(z))


@njit(cache=True, inline="always")
def _sigmoid(z):
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@njit(cache=True)
def _obs_terms(lo, hi):
    if not hi > lo:
        return -np.inf, 0.0, 0.0, 0.0, 0.0, 0.0, False
    em = -math.expm1(lo - hi)
    logp = _log_sigmoid(hi) + _log_sigmoid(-lo) + math.log(em)
    a_hi = 0.0
    if hi != np.inf:
        a_hi = math.exp(_log_sigmoid(-hi) - _log_sigmoid(-lo)) / em
    a_lo = 0.0
    if lo != -np.inf:
        a_lo = -math.exp(_log_sigmoid(lo) - _log_sigmoid(hi)) / em
    h_hh = a_hi * (1.0 - 2.0 * _sigmoid(hi)) - a_hi * a_hi
    h_ll = a_lo * (1.0 - 2.0 * _sigmoid(lo)) - a_lo * a_lo
    h_lh = -a_hi * a_lo
    return logp, a_lo, a_hi, h_ll, h_hh, h_lh, True


@njit(cache=True)
def _bound(eta, y, i):
    km1 = eta.shape[1]
    j = y[i]
    lo = eta[i, j - 1] if j > 0 else -np.inf
    hi = eta[i, j] if j < km1 else np.inf
    return lo, hi


@njit(cache=True)
def cut_loglik(eta, y):
    ll = 0.0
    for i in range(eta.shape[0]):
        lo, hi = _bound(eta, y, i)
        if not hi > lo:
            return -np.inf
        ll += _log_sigmoid(hi) + _log_sigmoid(-lo) + math.log(-math.expm1(lo - hi))
    return ll


@njit(cache=True)
def _cut_derivs(X, y, eta, want_hess):
    n, km1 = eta.shape
    p = X.shape[1]
    p1 = p + 1
    m = km1 * p1
    grad = np.zeros((km1, p1))
    hess = np.zeros((m, m)) if want_hess else np.zeros((0, 0))
    xt = np.empty(p1)
    ll = 0.0
    for i in range(n):
        lo, hi = _bound(eta, y, i)
        logp, a_lo, a_hi, h_ll, h_hh, h_lh, ok = _obs_terms(lo, hi)
        if not ok:
            return -np.inf, False, grad, hess
        ll += logp
        j = y[i]
        xt[0] = 1.0
        for c in range(p):
            xt[c + 1] = X[i, c]
        if j < km1:
            for c in range(p1):
                grad[j, c] += a_hi * xt[c]
        if j > 0:
            for c in range(p1):
                grad[j - 1, c] += a_lo * xt[c]
        if want_hess:
            if j < km1:
                o = j * p1
                for a in range(p1):
                    w = h_hh * xt[a]
                    for b in range(a + 1):
                        hess[o + a, o + b] += w * xt[b]
            if j > 0:
                o = (j - 1) * p1
                for a in range(p1):
                    w = h_ll * xt[a]
                    for b in range(a + 1):
                        hess[o + a, o + b] += w * xt[b]
            if 0 < j < km1:
                ol = (j - 1) * p1
                oh = j * p1
                for a in range(p1):
                    w = h_lh * xt[a]
                    for b in range(p1):
                        hess[oh + a, ol + b] += w * xt[b]
    if want_hess:
        for a in range(m):
            for b in range(a):
                hess[b, a] = hess[a, b]
    return ll, True, grad, hess


def cut_derivs(X, y, eta, want_hess=True):
    ll, ok, grad, hess = _cut_derivs(X, y, eta, want_hess)
    if not ok:
        return -np.inf, False, None, None
    return ll, True, grad, hess if want_hess else None


@njit(cache=True)
def lsc_eta(X, theta, beta, gamma):
    n, p = X.shape
    km1 = theta.shape[0]
    eta = np.empty((n, km1))
    for i in range(n):
        xb = 0.0
        xg = 0.0
        for c in range(p):
            xb += X[i, c] * beta[c]
            xg += X[i, c] * gamma[c]
        s = math.exp(-xg)
        for r in range(km1):
            eta[i, r] = (theta[r] + xb) * s
    return eta


@njit(cache=True)
def _lsc_derivs(X, y, theta, beta, gamma, want_hess):
    n, p = X.shape
    km1 = theta.shape[0]
    P = km1 + 2 * p
    bo = km1
    go = km1 + p
    grad = np.zeros(P)
    hess = np.zeros((P, P)) if want_hess else np.zeros((0, 0))
    j_lo = np.zeros(P)
    j_hi = np.zeros(P)
    w = np.zeros(P)
    ll = 0.0
    for i in range(n):
        xb = 0.0
        xg = 0.0
        for c in range(p):
            xb += X[i, c] * beta[c]
            xg += X[i, c] * gamma[c]
        s = math.exp(-xg)
        j = y[i]
        has_lo = j > 0
        has_hi = j < km1
        lo = (theta[j - 1] + xb) * s if has_lo else -np.inf
        hi = (theta[j] + xb) * s if has_hi else np.inf
        logp, a_lo, a_hi, h_ll, h_hh, h_lh, ok = _obs_terms(lo, hi)
        if not ok:
            return -np.inf, False, grad, hess
        ll += logp
        e_lo = lo if has_lo else 0.0
        e_hi = hi if has_hi else 0.0
        for q in range(P):
            j_lo[q] = 0.0
            j_hi[q] = 0.0
        if has_hi:
            j_hi[j] = s
            for c in range(p):
                j_hi[bo + c] = s * X[i, c]
                j_hi[go + c] = -e_hi * X[i, c]
        if has_lo:
            j_lo[j - 1] = s
            for c in range(p):
                j_lo[bo + c] = s * X[i, c]
                j_lo[go + c] = -e_lo * X[i, c]
        for q in range(P):
            grad[q] += a_hi * j_hi[q] + a_lo * j_lo[q]
        if not want_hess:
            continue
        for q in range(P):
            w[q] = h_hh * j_hi[q] + h_lh * j_lo[q]
        for a in range(P):
            ja = j_hi[a]
            if ja != 0.0:
                for b in range(a + 1):
                    hess[a, b] += ja * w[b]
        for q in range(P):
            w[q] = h_ll * j_lo[q] + h_lh * j_hi[q]
        for a in range(P):
            ja = j_lo[a]
            if ja != 0.0:
                for b in range(a + 1):
                    hess[a, b] += ja * w[b]
        # second derivatives of eta (lower triangle: gamma rows)
        a_tot = a_hi + a_lo
        ae = a_hi * e_hi + a_lo * e_lo
        for c in range(p):
            xc = X[i, c]
            if has_hi:
                hess[go + c, j] -= a_hi * s * xc
            if has_lo:
                hess[go + c, j - 1] -= a_lo * s * xc
            for d in range(p):
                hess[go + c, bo + d] -= a_tot * s * xc * X[i, d]
            for d in range(c + 1):
                hess[go + c, go + d] += ae * xc * X[i, d]
    if want_hess:
        for a in range(P):
            for b in range(a):
                hess[b, a] = hess[a, b]
    return ll, True, grad, hess


def lsc_derivs(X, y, theta, beta, gamma, want_hess=True):
    ll, ok, grad, hess = _lsc_derivs(X, y, theta, beta, gamma, want_hess)
    if not ok:
        return -np.inf, False, None, None
    return ll, True, grad, hess if want_hess else None
