"""Piecewise-polynomial surrogates of the singular kernel (t - s)^(gamma - 1).

Two schemes are supported on a temporal mesh: a left-point (order 0)
evaluation with offset theta, and the per-interval L2-orthogonal
projection onto polynomials of degree m <= 3. Projection coefficients
come from the moment identity

    i_k = sum_j C(k,j) (-1)^j t^(k-j) / (gamma + j)
          * [(t-a)^(gamma+j) - (t-b)^(gamma+j)]

combined with an orthonormal (shifted Legendre) interval basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .mesh import TemporalMesh
from .quadrature import singular_moment_quad

MAX_ORDER = 3

# Monomial coefficients of the Legendre polynomials P_0..P_3 on [-1, 1].
_LEGENDRE = (
    (1.0,),
    (0.0, 1.0),
    (-0.5, 0.0, 1.5),
    (0.0, -1.5, 0.0, 2.5),
)

# Digit-loss threshold of the alternating moment sum before switching to
# adaptive quadrature (six decimal digits).
_CANCEL_LIMIT = 1e6


@dataclass(frozen=True)
class KernelSpec:
    """Kernel f_t(s) = (t - s)^(gamma - 1) evaluated up to time t."""

    gamma: float
    t: float

    def __post_init__(self):
        if self.gamma <= 0.5:
            raise ValueError("gamma must exceed 1/2 for the Ito integral to exist")
        if self.t <= 0.0:
            raise ValueError("evaluation time must be positive")


class LeftPoint:
    """Order-0 scheme sampling the kernel at t_(l-1) + theta * h_l."""

    order = 0

    def __init__(self, theta: float = 0.0):
        if not 0.0 <= theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        self.theta = float(theta)

    @property
    def label(self) -> str:
        return f"leftpoint(theta={self.theta:g})"


class Projection:
    """Per-interval L2-orthogonal projection onto degree-m polynomials."""

    def __init__(self, m: int = 1):
        if not 0 <= m <= MAX_ORDER:
            raise ValueError(f"projection order must be in [0, {MAX_ORDER}]")
        self.m = int(m)

    @property
    def order(self) -> int:
        return self.m

    @property
    def label(self) -> str:
        return f"projection(m={self.m})"


@dataclass(frozen=True)
class PiecewisePoly:
    """Monomial coefficients b_(l,j) of the surrogate on each interval.

    ``coeffs[l, j]`` multiplies s^j on [t_(l-1), t_l); rows cover the
    intervals filling [0, t).
    """

    m: int
    coeffs: np.ndarray
    breaks: np.ndarray

    @property
    def n_intervals(self) -> int:
        return self.coeffs.shape[0]

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        idx = np.clip(np.searchsorted(self.breaks, s, side="right") - 1, 0, self.n_intervals - 1)
        powers = s[..., None] ** np.arange(self.m + 1)
        return np.einsum("...j,...j->...", self.coeffs[idx], powers)


def _moment_brackets(gamma: float, t: float, a: np.ndarray, b: np.ndarray, maxj: int) -> np.ndarray:
    """(t-a)^(gamma+j) - (t-b)^(gamma+j) for j = 0..maxj, cancellation-free.

    Written as (t-a)^(gamma+j) * -expm1((gamma+j) log1p(-(b-a)/(t-a)))
    so nearly-equal powers never subtract. b = t maps to log1p(-1) and
    yields the continuous extension (t-b)^(gamma+j) = 0.
    """
    ta = t - a
    with np.errstate(divide="ignore"):
        log_ratio = np.log1p(-(b - a) / ta)
    j = np.arange(maxj + 1)
    exps = gamma + j
    return ta[:, None] ** exps * -np.expm1(exps * log_ratio[:, None])


def kernel_moments_batch(gamma: float, t: float, a, b, maxk: int) -> np.ndarray:
    """Moments i_k = int_a^b s^k (t-s)^(gamma-1) ds for k = 0..maxk.

    Vectorised over intervals; falls back to adaptive quadrature on
    intervals where the alternating sum loses more than six digits.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if np.any(a < 0.0) or np.any(b <= a):
        raise ValueError("need 0 <= a < b")
    if np.any(b > t * (1.0 + 1e-12)):
        raise ValueError("moment interval exceeds the kernel time t")
    if maxk < 0:
        raise ValueError("maxk must be non-negative")

    brackets = _moment_brackets(gamma, t, a, b, maxk)
    out = np.empty((a.size, maxk + 1))
    worst = np.zeros(a.size)
    for k in range(maxk + 1):
        j = np.arange(k + 1)
        scale = np.array([comb(k, int(jj)) for jj in j]) * (-1.0) ** j / (gamma + j)
        terms = scale * t ** (k - j) * brackets[:, : k + 1]
        i_k = terms.sum(axis=1)
        out[:, k] = i_k
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.abs(terms).max(axis=1) / np.abs(i_k)
        worst = np.maximum(worst, np.where(np.isfinite(ratio), ratio, np.inf))

    bad = np.nonzero(worst > _CANCEL_LIMIT)[0]
    for idx in bad:
        for k in range(maxk + 1):
            out[idx, k] = singular_moment_quad(k, gamma, t, a[idx], b[idx])
    return out


def kernel_moments(spec: KernelSpec, a: float, b: float, maxk: int) -> np.ndarray:
    """Scalar-interval convenience wrapper around kernel_moments_batch."""
    return kernel_moments_batch(spec.gamma, spec.t, [a], [b], maxk)[0]


def legendre_orthonormal(a: float, b: float, m: int) -> np.ndarray:
    """Monomial coefficients of an orthonormal polynomial basis on [a, b).

    Returns an (m+1, m+1) array whose row l holds q_l^(0..m); q_l has
    degree exactly l and int_a^b q_i q_j = delta_ij.
    """
    if not b > a:
        raise ValueError("degenerate interval")
    if not 0 <= m <= MAX_ORDER:
        raise ValueError(f"basis order must be in [0, {MAX_ORDER}]")
    batch = legendre_orthonormal_batch(np.array([a]), np.array([b]), m)
    return batch[0]


def legendre_orthonormal_batch(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    """Shifted-Legendre orthonormal bases for a batch of intervals.

    Shape (n, m+1, m+1); entry [l, j] is the coefficient of s^j in q_l.
    The reference polynomials are composed with y = (2s - a - b)/(b - a).
    """
    width = b - a
    c1 = 2.0 / width
    c0 = -(a + b) / width
    n = a.size
    out = np.zeros((n, m + 1, m + 1))
    for l in range(m + 1):
        norm = np.sqrt((2 * l + 1) / width)
        ref = _LEGENDRE[l]
        for p, cp in enumerate(ref):
            if cp == 0.0:
                continue
            # (c1 s + c0)^p expanded binomially
            for j in range(p + 1):
                out[:, l, j] += cp * comb(p, j) * c1**j * c0 ** (p - j)
        out[:, l, : l + 1] *= norm[:, None]
    return out


def project_kernel(spec: KernelSpec, a: float, b: float, m: int) -> np.ndarray:
    """Monomial coefficients of the L2 projection of f_t onto P_m([a, b))."""
    moments = kernel_moments(spec, a, b, m)
    basis = legendre_orthonormal(a, b, m)
    # alpha_j = sum_l q_l^(j) * sum_k q_l^(k) i_k
    return basis.T @ (basis @ moments)


def leftpoint_kernel(spec: KernelSpec, mesh: TemporalMesh, n: int, theta: float = 0.0) -> PiecewisePoly:
    """Order-0 surrogate b_(l,0) = (t_n - t_(l-1) - theta h_l)^(gamma - 1)."""
    if not 1 <= n <= mesh.n_intervals:
        raise ValueError("node index out of range")
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    if theta == 1.0 and spec.gamma <= 1.0:
        raise ValueError("theta = 1 needs gamma > 1 (kernel undefined on the last interval)")
    nodes = mesh.nodes
    t_n = nodes[n]
    if abs(t_n - spec.t) > 1e-12 * max(1.0, spec.t):
        raise ValueError("kernel time must equal the mesh node t_n")
    left = nodes[:n]
    widths = nodes[1 : n + 1] - left
    offsets = t_n - left - theta * widths
    vals = offsets ** (spec.gamma - 1.0)
    return PiecewisePoly(m=0, coeffs=vals[:, None], breaks=nodes[: n + 1].copy())


def projection_coefficients(
    gamma: float, t: float, a: np.ndarray, b: np.ndarray, m: int
) -> np.ndarray:
    """Batched projection coefficients for all intervals at once."""
    moments = kernel_moments_batch(gamma, t, a, b, m)
    basis = legendre_orthonormal_batch(a, b, m)
    inner = np.einsum("nlk,nk->nl", basis, moments)
    return np.einsum("nlj,nl->nj", basis, inner)


def build_quadrature_poly(spec: KernelSpec, mesh: TemporalMesh, n: int, scheme) -> PiecewisePoly:
    """Assemble per-interval surrogate coefficients for intervals 1..n."""
    if not 1 <= n <= mesh.n_intervals:
        raise ValueError("node index out of range")
    if isinstance(scheme, LeftPoint):
        return leftpoint_kernel(spec, mesh, n, scheme.theta)
    if isinstance(scheme, Projection):
        nodes = mesh.nodes
        if abs(nodes[n] - spec.t) > 1e-12 * max(1.0, spec.t):
            raise ValueError("projection target time must equal the mesh node t_n")
        coeffs = projection_coefficients(spec.gamma, spec.t, nodes[:n], nodes[1 : n + 1], scheme.m)
        return PiecewisePoly(m=scheme.m, coeffs=coeffs, breaks=nodes[: n + 1].copy())
    raise TypeError(f"unknown scheme {scheme!r}")
