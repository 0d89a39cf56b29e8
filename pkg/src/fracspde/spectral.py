"""Eigenbases and operator spectra for A = (kappa^2 - Delta)^alpha / r.

Covers the Dirichlet Laplacian on [0,1]^d (d = 1, 2, 3) and the
Laplace-Beltrami operator on the unit sphere, plus the conversions
between the raw equation parameters (gamma, alpha, beta, kappa, r,
sigma) and the interpretable smoothness/range parameters
(nu_s, nu_t, r_s, r_t, beta_s, sigma).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import sph_harm_y


class ModelError(ValueError):
    """Model parameters fail the existence criterion."""

    def __init__(self, message: str, nu_s: float | None = None):
        super().__init__(message)
        self.nu_s = nu_s


@dataclass(frozen=True)
class SpdeParams:
    gamma: float
    alpha: float
    beta: float
    kappa: float
    r: float
    sigma: float
    d: int

    def __post_init__(self):
        if self.gamma <= 0.5:
            raise ValueError("gamma must exceed 1/2")
        for name in ("alpha", "beta", "kappa", "r"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        # sigma = 0 is allowed as the degenerate zero-noise model
        if self.sigma < 0.0:
            raise ValueError("sigma must be non-negative")
        if self.d not in (1, 2, 3):
            raise ValueError("spatial dimension must be 1, 2 or 3")

    @property
    def nu_s(self) -> float:
        return self.beta + (2.0 * self.gamma - 1.0) * self.alpha - self.d / 2.0

    @property
    def existence_ok(self) -> bool:
        return self.nu_s > 0.0

    def require_existence(self) -> None:
        if not self.existence_ok:
            raise ModelError(
                f"no L2 solution: beta + (2 gamma - 1) alpha - d/2 = {self.nu_s:g} <= 0",
                nu_s=self.nu_s,
            )


@dataclass(frozen=True)
class RangeParams:
    nu_s: float
    nu_t: float
    r_s: float
    r_t: float
    beta_s: float
    sigma: float

    def __post_init__(self):
        for name in ("nu_s", "nu_t", "r_s", "r_t"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.sigma < 0.0:
            raise ValueError("sigma must be non-negative")
        if not 0.0 <= self.beta_s <= 1.0:
            raise ValueError("beta_s must lie in [0, 1]")


@dataclass(frozen=True)
class EigenBasis:
    """Laplacian eigenpairs sorted by eigenvalue (lexicographic tie-break)."""

    domain: str
    d: int
    indices: tuple
    xi: np.ndarray

    @property
    def M(self) -> int:
        return self.xi.size

    def evaluate(self, points, start: int = 0, stop: int | None = None) -> np.ndarray:
        """Eigenfunction values, shape (n_points, stop - start)."""
        stop = self.M if stop is None else stop
        points = np.asarray(points, dtype=float)
        if self.domain == "rectangle":
            if points.ndim == 1:
                points = points[:, None]
            idx = np.asarray(self.indices[start:stop], dtype=float)
            # prod_q sqrt(2) sin(i_q pi x_q)
            out = np.ones((points.shape[0], stop - start))
            for q in range(self.d):
                out *= math.sqrt(2.0) * np.sin(np.outer(points[:, q], idx[:, q]) * math.pi)
            return out
        if self.domain == "sphere":
            lon, lat = points[:, 0], points[:, 1]
            colat = 0.5 * math.pi - lat
            out = np.empty((points.shape[0], stop - start))
            cache: dict = {}
            for col, (l, order) in enumerate(self.indices[start:stop]):
                am = abs(order)
                key = (l, am)
                if key not in cache:
                    cache[key] = sph_harm_y(l, am, colat, lon)
                y = cache[key]
                if order == 0:
                    out[:, col] = y.real
                elif order > 0:
                    out[:, col] = math.sqrt(2.0) * (-1.0) ** am * y.real
                else:
                    out[:, col] = math.sqrt(2.0) * (-1.0) ** am * y.imag
            return out
        raise ValueError(f"unknown domain {self.domain!r}")


def eigen_rectangle(d: int, M: int) -> EigenBasis:
    """First M Dirichlet eigenpairs of -Delta on the unit cube [0,1]^d.

    xi = pi^2 sum_q i_q^2 with e(x) = prod_q sqrt(2) sin(i_q pi x_q).
    """
    if d not in (1, 2, 3):
        raise ValueError("dimension must be 1, 2 or 3")
    if M < 1:
        raise ValueError("M must be at least 1")
    orthant = math.pi ** (d / 2.0) / (2.0**d * math.gamma(d / 2.0 + 1.0))
    cap = max(2, int(math.ceil((M / orthant) ** (1.0 / d))) + 2)
    while True:
        axes = [np.arange(1, cap + 1)] * d
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        xi = math.pi**2 * (grid.astype(float) ** 2).sum(axis=1)
        if xi.size >= M:
            order = np.lexsort(tuple(grid[:, q] for q in reversed(range(d))) + (xi,))
            top = order[:M]
            # any excluded index has some i_q > cap, hence xi > pi^2 (cap+1)^2
            if xi[top[-1]] < math.pi**2 * (cap + 1) ** 2:
                return EigenBasis(
                    domain="rectangle",
                    d=d,
                    indices=tuple(tuple(int(v) for v in grid[i]) for i in top),
                    xi=xi[top],
                )
        cap *= 2


def eigen_sphere(M: int) -> EigenBasis:
    """First M real spherical-harmonic eigenpairs of -Laplace-Beltrami.

    Degree l contributes the 2l+1 eigenvalues xi = l(l+1); a partial last
    degree is filled in ascending |order|.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    indices = []
    l = 0
    while len(indices) < M:
        orders = sorted(range(-l, l + 1), key=lambda o: (abs(o), o))
        for order in orders:
            indices.append((l, order))
            if len(indices) == M:
                break
        l += 1
    xi = np.array([float(l * (l + 1)) for l, _ in indices])
    return EigenBasis(domain="sphere", d=2, indices=tuple(indices), xi=xi)


def mu_lambda(params: SpdeParams, basis: EigenBasis):
    """Operator eigenvalue sequences mu_k (drift) and lambda_k (noise)."""
    params.require_existence()
    shifted = params.kappa**2 + basis.xi
    mu = shifted**params.alpha / params.r
    lam = params.sigma**2 * params.r ** (-2.0 * params.gamma) * shifted ** (-params.beta)
    return mu, lam


def to_range(sp: SpdeParams) -> RangeParams:
    """Smoothness/range parameters implied by the equation parameters."""
    nu_s = sp.nu_s
    if nu_s <= 0.0:
        raise ModelError(f"nu_s = {nu_s:g} <= 0: smoothness parameters undefined", nu_s=nu_s)
    nu_t = sp.gamma - 0.5 + min(sp.beta - sp.d / 2.0, 0.0) / (2.0 * sp.alpha)
    beta_s = (2.0 * sp.gamma - 1.0) * sp.alpha / (sp.beta + (2.0 * sp.gamma - 1.0) * sp.alpha)
    r_s = math.sqrt(8.0 * nu_s) / sp.kappa
    r_t = sp.r * sp.kappa ** (-2.0 * sp.alpha) * math.sqrt(8.0 * (sp.gamma - 0.5))
    return RangeParams(nu_s=nu_s, nu_t=nu_t, r_s=r_s, r_t=r_t, beta_s=beta_s, sigma=sp.sigma)


def to_spde(rp: RangeParams, d: int) -> SpdeParams:
    """Equation parameters realising the requested smoothness and ranges."""
    if rp.beta_s == 0.0:
        raise ModelError("beta_s = 0 is the separable limit alpha = 0, which is not representable")
    beta_star = rp.nu_s / (rp.nu_s + d / 2.0)
    ratio = rp.beta_s / beta_star
    gamma = rp.nu_t * max(1.0, ratio) + 0.5
    alpha = rp.nu_s / (2.0 * rp.nu_t) * min(1.0, ratio)
    beta = (1.0 - rp.beta_s) / beta_star * rp.nu_s
    kappa = math.sqrt(8.0 * rp.nu_s) / rp.r_s
    r = rp.r_t * kappa ** (2.0 * alpha) / math.sqrt(8.0 * (gamma - 0.5))
    return SpdeParams(gamma=gamma, alpha=alpha, beta=beta, kappa=kappa, r=r, sigma=rp.sigma, d=d)


@dataclass(frozen=True)
class TheoryRates:
    """Predicted mean-square convergence orders and mesh balancing."""

    nu: float
    r_mu: float
    r_lambda: float
    spatial_mse_order: float
    temporal_mse_order: float
    b: float
    delta: float
    zeta: float
    cost_exponent: float
    log_factor: bool


def theory_rates(sp: SpdeParams, m: int) -> TheoryRates:
    """Spectral/temporal orders and the h = M^(-zeta) balancing exponent."""
    sp.require_existence()
    d = sp.d
    r_mu = 2.0 * sp.alpha / d
    r_lam = -2.0 * sp.beta / d
    nu = -(d / 2.0) * (1.0 + r_lam - (2.0 * sp.gamma - 1.0) * r_mu)
    b = min(2.0 * sp.gamma - 1.0, 2.0 * m + 2.0)
    if sp.gamma <= m + 1.5:
        delta = 1.0 + r_lam
    elif sp.gamma <= m + 2.0:
        delta = 1.0 + r_lam - (2.0 * sp.gamma - 2.0 * m - 3.0) * r_mu
    else:
        delta = 1.0 + r_lam - r_mu
    if sp.gamma <= m + 2.0:
        zeta = r_mu - min(0.0, delta / b)
    else:
        zeta = (2.0 * sp.gamma - 2.0) / (2.0 * m + 2.0) * r_mu - min(0.0, delta / b)
    return TheoryRates(
        nu=nu,
        r_mu=r_mu,
        r_lambda=r_lam,
        spatial_mse_order=2.0 * nu / d,
        temporal_mse_order=b,
        b=b,
        delta=delta,
        zeta=zeta,
        cost_exponent=d / (2.0 * nu) * (1.0 + zeta),
        log_factor=abs(sp.gamma - (m + 1.5)) < 1e-12,
    )


def with_sigma(sp: SpdeParams, sigma: float) -> SpdeParams:
    return replace(sp, sigma=sigma)
