"""Independent ground truth for coefficient processes.

Second moments of the exact Ornstein-Uhlenbeck-like coefficient
integrals, and a dense-covariance ("naive" Cholesky) sampler of the
exact process at a small set of times. Everything here is deliberately
computed by a different route than the simulator: incomplete-gamma
closed forms and adaptive quadrature instead of mesh sums.
"""

from __future__ import annotations

import math

import numpy as np

from ._rng import keyed_generator
from .quadrature import GaussLegendre, adaptive_quad

__all__ = [
    "GaussLegendre",
    "adaptive_quad",
    "reg_lower_gamma",
    "exact_variance",
    "exact_covariance",
    "stationary_variance",
    "covariance_matrix",
    "cholesky_reference",
]

_MAX_ITER = 800
_EPS = 1e-16


def reg_lower_gamma(a: float, x: float) -> float:
    """Regularised lower incomplete gamma P(a, x).

    Series expansion for x < a + 1, Lentz continued fraction for the
    complement otherwise; both iterated to machine tolerance.
    """
    if a <= 0.0:
        raise ValueError("shape parameter must be positive")
    if x < 0.0:
        raise ValueError("argument must be non-negative")
    if x == 0.0:
        return 0.0
    log_prefix = a * math.log(x) - x - math.lgamma(a)
    if x < a + 1.0:
        # P(a,x) = x^a e^-x / Gamma(a+1) * sum x^n / ((a+1)...(a+n))
        term = 1.0 / a
        total = term
        ap = a
        for _ in range(_MAX_ITER):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * _EPS:
                return total * math.exp(log_prefix)
        raise RuntimeError("incomplete gamma series failed to converge")
    # Q(a,x) via continued fraction (modified Lentz)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    frac = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        frac *= delta
        if abs(delta - 1.0) < _EPS:
            return 1.0 - frac * math.exp(log_prefix)
    raise RuntimeError("incomplete gamma continued fraction failed to converge")


def exact_variance(mu: float, lam: float, gamma: float, t: float) -> float:
    """Var c_k(t) for the exact coefficient process.

    Equals lam / (Gamma(gamma)^2 (2 mu)^(2 gamma - 1)) times the lower
    incomplete gamma of order 2 gamma - 1 at 2 mu t.
    """
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    if gamma <= 0.5:
        raise ValueError("variance integral diverges for gamma <= 1/2")
    if t < 0.0:
        raise ValueError("t must be non-negative")
    if t == 0.0:
        return 0.0
    a = 2.0 * gamma - 1.0
    scale = lam / (math.gamma(gamma) ** 2 * (2.0 * mu) ** a)
    return scale * math.gamma(a) * reg_lower_gamma(a, 2.0 * mu * t)


def stationary_variance(mu: float, lam: float, gamma: float) -> float:
    """Large-time limit of exact_variance."""
    a = 2.0 * gamma - 1.0
    return lam * math.gamma(a) / (math.gamma(gamma) ** 2 * (2.0 * mu) ** a)


def exact_covariance(mu: float, lam: float, gamma: float, t: float, tp: float) -> float:
    """Cov(c_k(t), c_k(tp)) for 0 <= t <= tp.

    After substituting u = t - s the integrand is
    e^(-mu dt) e^(-2 mu u) u^(gamma-1) (u + dt)^(gamma-1) with
    dt = tp - t. For gamma < 1 the u^(gamma-1) endpoint singularity is
    absorbed by u = v^(1/gamma) on [0, min(t, dt)].
    """
    if not 0.0 <= t <= tp:
        raise ValueError("need 0 <= t <= tp")
    if gamma <= 0.5:
        raise ValueError("covariance integral diverges for gamma <= 1/2")
    if t == 0.0:
        return 0.0
    if t == tp:
        return exact_variance(mu, lam, gamma, t)
    dt = tp - t
    g1 = gamma - 1.0

    def integrand(u):
        return math.exp(-2.0 * mu * u) * u**g1 * (u + dt) ** g1

    if gamma >= 1.0:
        total = adaptive_quad(integrand, 0.0, t, rel_tol=1e-11, abs_tol=0.0)
    else:
        split = min(t, dt)

        def smoothed(v):
            u = v ** (1.0 / gamma)
            return math.exp(-2.0 * mu * u) * (u + dt) ** g1 / gamma

        total = adaptive_quad(smoothed, 0.0, split**gamma, rel_tol=1e-11, abs_tol=0.0)
        if split < t:
            total += adaptive_quad(integrand, split, t, rel_tol=1e-11, abs_tol=0.0)
    return lam * math.exp(-mu * dt) * total / math.gamma(gamma) ** 2


def covariance_matrix(mu: float, lam: float, gamma: float, times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    J = times.size
    cov = np.empty((J, J))
    for i in range(J):
        for j in range(i, J):
            lo, hi = sorted((times[i], times[j]))
            cov[i, j] = cov[j, i] = exact_covariance(mu, lam, gamma, lo, hi)
    return cov


def cholesky_reference(mu, lam, gamma, times, replicas: int, seed: int) -> np.ndarray:
    """Sample exact coefficient paths at the given times.

    Builds the dense covariance from exact_covariance and factorises it,
    which is why the number of times is capped at desk scale.

    Returns an array of shape (replicas, len(times)).
    """
    times = np.asarray(times, dtype=float)
    if times.size > 64:
        raise ValueError("reference sampler is capped at 64 output times")
    if np.unique(times).size != times.size:
        raise ValueError("output times must be distinct")
    cov = covariance_matrix(mu, lam, gamma, times)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        jitter = 1e-12 * np.trace(cov)
        try:
            chol = np.linalg.cholesky(cov + jitter * np.eye(times.size))
        except np.linalg.LinAlgError as exc:
            raise RuntimeError("reference covariance not positive definite beyond jitter") from exc
    z = keyed_generator(seed, 0).standard_normal((replicas, times.size))
    return z @ chol.T


def brute_covariance(mu: float, lam: float, gamma: float, t: float, tp: float, n: int = 10**6) -> float:
    """Trapezoid brute-force check of exact_covariance.

    The substitution u = v^2 flattens the sqrt-type endpoint behaviour so
    a plain trapezoid rule converges; used only by tests.
    """
    dt = tp - t
    v = np.linspace(0.0, math.sqrt(t), n)
    u = v**2
    # u^(gamma-1) du = 2 v^(2 gamma - 1) dv, which vanishes at v = 0
    vals = 2.0 * v ** (2.0 * gamma - 1.0) * np.exp(-2.0 * mu * u) * (u + dt) ** (gamma - 1.0)
    total = np.trapezoid(vals, v)
    return lam * math.exp(-mu * dt) * total / math.gamma(gamma) ** 2
