"""Compare the numba and numpy likelihood kernels, alone and inside full fits.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 20]

Both backends are imported directly, so one process measures both. The
numba timings exclude compilation (one warm-up call per shape).
"""

import argparse
import time
from contextlib import contextmanager

import numpy as np

from ordinalsim import kernels
from ordinalsim.datagen import generate_dataset, replication_rng
from ordinalsim.estimation import fit_ordinal
from ordinalsim.kernels import _numpy

try:
    from ordinalsim.kernels import _numba
except ImportError:  # pragma: no cover
    _numba = None

SHAPES = [(250, 5, 3), (1000, 5, 7), (500, 35, 3), (5000, 35, 5)]


def best_of(fn, repeat):
    fn()  # warm-up (numba compiles here)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


@contextmanager
def backend(impl):
    saved = kernels._impl
    kernels._impl = impl
    try:
        yield
    finally:
        kernels._impl = saved


def kernel_rows(repeat):
    rows = []
    for n, p, k in SHAPES:
        rng = np.random.default_rng(0)
        X = rng.normal(0, 0.5, (n, p))
        y = rng.integers(0, k, n)
        theta = np.linspace(-1, 1, k - 1)
        beta, gamma = rng.normal(0, 0.3, p), rng.normal(0, 0.2, p)
        eta = np.ascontiguousarray(theta[None, :] + (X @ beta)[:, None])
        for name, call in (
            ("cut_derivs", lambda m: m.cut_derivs(X, y, eta, True)),
            ("lsc_derivs", lambda m: m.lsc_derivs(X, y, theta, beta, gamma, True)),
        ):
            t_np = best_of(lambda: call(_numpy), repeat)
            t_nb = best_of(lambda: call(_numba), repeat) if _numba else float("nan")
            rows.append((name, f"n={n} p={p} k={k}", t_np, t_nb))
    return rows


def fit_rows(repeat):
    from ordinalsim.scenarios import ScenarioSpec

    rows = []
    for kind, spec in (("PO", ScenarioSpec(0, "PO", 250, 5, 1, 3, 1.0)),
                       ("CSO", ScenarioSpec(0, "PO", 250, 5, 0, 7, 0.0)),
                       ("LSH", ScenarioSpec(0, "PO", 500, 5, 0, 5, 0.0)),
                       ("LSC", ScenarioSpec(0, "PO", 500, 35, 0, 3, 0.0))):
        data, _ = generate_dataset(replication_rng(1, 0, 0), spec)
        with backend(_numpy):
            t_np = best_of(lambda: fit_ordinal(kind, data), max(3, repeat // 4))
        t_nb = float("nan")
        if _numba:
            with backend(_numba):
                t_nb = best_of(lambda: fit_ordinal(kind, data), max(3, repeat // 4))
        rows.append((f"fit {kind}", f"n={spec.n} p={spec.p} k={spec.k}", t_np, t_nb))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    print(f"{'case':<12} {'shape':<20} {'numpy ms':>10} {'numba ms':>10} {'speed-up':>9}")
    for name, shape, t_np, t_nb in kernel_rows(args.repeat) + fit_rows(args.repeat):
        print(f"{name:<12} {shape:<20} {t_np * 1e3:10.3f} {t_nb * 1e3:10.3f} "
              f"{t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
