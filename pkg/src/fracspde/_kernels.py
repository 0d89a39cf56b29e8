"""Hot numeric kernels: numba-jitted with a pure-numpy fallback.

Set FRACSPDE_NO_NUMBA=1 to force the numpy path (also used when numba
is not importable). Both paths are deterministic for fixed inputs;
benchmarks/bench_kernels.py compares them.
"""

from __future__ import annotations

import os

import numpy as np

_EXP_CUTOFF = 700.0  # exp(-x) treated as 0 beyond this, avoids denormals

_disabled = os.environ.get("FRACSPDE_NO_NUMBA", "").lower() in ("1", "true", "yes")
try:
    if _disabled:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

USING_NUMBA = HAVE_NUMBA and not _disabled


def _path_accumulate_np(mu, dt, coef, w):
    args = np.outer(mu, dt)
    decay = np.exp(-np.minimum(args, _EXP_CUTOFF))
    decay[args > _EXP_CUTOFF] = 0.0
    return np.einsum("kl,lj,klj->k", decay, coef, w[:, : dt.size, :])


def _restricted_sum_np(weights, coef, w):
    terms = np.einsum("lj,klj->kl", coef, w[:, : weights.size, :])
    return terms @ weights


if USING_NUMBA:

    @njit(cache=True)
    def _path_accumulate_nb(mu, dt, coef, w):  # pragma: no cover - jitted
        n_modes = mu.shape[0]
        n_int = dt.shape[0]
        n_ord = coef.shape[1]
        out = np.zeros(n_modes)
        for k in range(n_modes):
            acc = 0.0
            for l in range(n_int):
                arg = mu[k] * dt[l]
                if arg > _EXP_CUTOFF:
                    continue
                decay = np.exp(-arg)
                for j in range(n_ord):
                    acc += decay * coef[l, j] * w[k, l, j]
            out[k] = acc
        return out

    @njit(cache=True)
    def _restricted_sum_nb(weights, coef, w):  # pragma: no cover - jitted
        n_modes = w.shape[0]
        n_int = weights.shape[0]
        n_ord = coef.shape[1]
        out = np.zeros(n_modes)
        for k in range(n_modes):
            acc = 0.0
            for l in range(n_int):
                term = 0.0
                for j in range(n_ord):
                    term += coef[l, j] * w[k, l, j]
                acc += weights[l] * term
            out[k] = acc
        return out


def path_accumulate(mu, dt, coef, w):
    """sum_l sum_j exp(-mu_k dt_l) coef[l, j] w[k, l, j] for every mode k.

    mu: (M,) decay rates; dt: (n,) lags t_n - t_l; coef: (n, m+1)
    kernel coefficients already scaled by t_l^j; w: (M, N, m+1) with
    N >= n. Returns shape (M,).
    """
    mu = np.ascontiguousarray(mu, dtype=float)
    dt = np.ascontiguousarray(dt, dtype=float)
    coef = np.ascontiguousarray(coef, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    if USING_NUMBA:
        return _path_accumulate_nb(mu, dt, coef, w)
    return _path_accumulate_np(mu, dt, coef, w)


def restricted_sum(weights, coef, w):
    """Like path_accumulate but with precomputed per-interval weights.

    Used when all modes share one decay rate (replica batches), where
    exp(-mu dt) collapses to a single weight vector.
    """
    weights = np.ascontiguousarray(weights, dtype=float)
    coef = np.ascontiguousarray(coef, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    if USING_NUMBA:
        return _restricted_sum_nb(weights, coef, w)
    return _restricted_sum_np(weights, coef, w)


def warmup() -> None:
    """Trigger jit compilation on tiny inputs (no-op on the numpy path)."""
    mu = np.array([1.0])
    dt = np.array([0.5, 0.25])
    coef = np.ones((2, 1))
    w = np.ones((1, 2, 1))
    path_accumulate(mu, dt, coef, w)
    restricted_sum(np.ones(2), coef, w)
