"""Likelihood kernels with a numba fast path and a pure-numpy fallback.

The backend is fixed at import time. Set ``ORDINALSIM_NUMBA=0`` to force the
numpy implementation (also used automatically when numba is unavailable).
"""

import os

import numpy as np

from . import _numpy as numpy_impl


def _want_numba():
    flag = os.environ.get("ORDINALSIM_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


numba_impl = None
if _want_numba():
    try:
        from . import _numba as numba_impl
    except ImportError:  # pragma: no cover - numba missing
        numba_impl = None

BACKEND = "numba" if numba_impl is not None else "numpy"
_impl = numba_impl if numba_impl is not None else numpy_impl


def cut_loglik(eta, y):
    return _impl.cut_loglik(np.ascontiguousarray(eta), y)


def cut_derivs(X, y, eta, want_hess=True):
    return _impl.cut_derivs(X, y, np.ascontiguousarray(eta), want_hess)


def lsc_eta(X, theta, beta, gamma):
    return _impl.lsc_eta(X, theta, beta, gamma)


def lsc_derivs(X, y, theta, beta, gamma, want_hess=True):
    return _impl.lsc_derivs(X, y, theta, beta, gamma, want_hess)


__all__ = [
    "BACKEND",
    "cut_derivs",
    "cut_loglik",
    "lsc_derivs",
    "lsc_eta",
    "numba_impl",
    "numpy_impl",
]
