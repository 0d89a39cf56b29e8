"""Quadrature primitives shared by the kernel builders and the oracle."""

from __future__ import annotations

import numpy as np
from scipy import integrate


class GaussLegendre:
    """Fixed-order Gauss-Legendre rule, affine-mapped to arbitrary intervals.

    Exact on polynomials of degree <= 2n - 1.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("rule order must be >= 1")
        self.n = n
        self._x, self._w = np.polynomial.legendre.leggauss(n)

    def mapped(self, a: float, b: float):
        """Nodes and weights on [a, b]; weights sum to b - a."""
        if not b > a:
            raise ValueError("degenerate interval")
        half = 0.5 * (b - a)
        return 0.5 * (a + b) + half * self._x, half * self._w

    def integrate(self, f, a: float, b: float) -> float:
        x, w = self.mapped(a, b)
        return float(np.dot(w, f(x)))


def adaptive_quad(f, a: float, b: float, rel_tol: float = 1e-10, abs_tol: float = 1e-12) -> float:
    """Adaptive Gauss-Kronrod integration of ``f`` over [a, b]."""
    val, _ = integrate.quad(f, a, b, epsrel=rel_tol, epsabs=abs_tol, limit=200)
    return float(val)


def singular_moment_quad(k: int, gamma: float, t: float, a: float, b: float) -> float:
    """Integral of s^k (t - s)^(gamma - 1) over [a, b] by adaptive quadrature.

    Used as the fallback when the closed-form moment cancels badly. The
    endpoint b = t carries the algebraic singularity, handled by QUADPACK's
    weighted scheme.
    """
    if b >= t:
        val, _ = integrate.quad(
            lambda s: s**k, a, b, weight="alg", wvar=(0.0, gamma - 1.0), limit=200
        )
    else:
        val, _ = integrate.quad(
            lambda s: s**k * (t - s) ** (gamma - 1.0), a, b, epsrel=1e-12, epsabs=0.0, limit=200
        )
    return float(val)
