"""Assembly of the fully discrete solution from kernel polynomials and noise.

The coefficient of mode k at mesh node t_n is

    c_k(t_n) = sqrt(lambda_k) / Gamma(gamma)
               * sum_l sum_j e^(-mu_k (t_n - t_l)) b_(n,l,j) t_l^j w_(l,j,k)

and fields are synthesised as sum_k c_k(t) e_k(x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .kernel import KernelSpec, LeftPoint, Projection, build_quadrature_poly
from .mesh import TemporalMesh
from .noise import NoiseBlock
from .spectral import EigenBasis, SpdeParams, mu_lambda


@dataclass
class OpCounter:
    """Counts inner-sum term evaluations of the path assembly."""

    terms: int = 0


@dataclass(frozen=True)
class CoefficientPath:
    k: int
    times: np.ndarray
    values: np.ndarray
    scheme: str
    provenance: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FieldSnapshot:
    time: float
    points: np.ndarray
    values: np.ndarray
    M: int


def _scheme_coefficients(gamma: float, mesh: TemporalMesh, n: int, scheme) -> np.ndarray:
    """Kernel coefficients b_(n,l,j) scaled by t_l^j, shape (n, m+1)."""
    spec = KernelSpec(gamma=gamma, t=float(mesh.nodes[n]))
    poly = build_quadrature_poly(spec, mesh, n, scheme)
    t_right = mesh.nodes[1 : n + 1]
    powers = t_right[:, None] ** np.arange(poly.m + 1)
    return poly.coeffs * powers


def coefficient_values(
    gamma: float,
    mu: np.ndarray,
    lam: np.ndarray,
    mesh: TemporalMesh,
    scheme,
    out_indices,
    noise: NoiseBlock,
    ops: OpCounter | None = None,
) -> np.ndarray:
    """Coefficient values for every mode at the requested node indices.

    Returns shape (n_times, n_modes). The noise block must live on the
    same mesh with matching modes and order.
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if not np.array_equal(noise.mesh.nodes, mesh.nodes):
        raise ValueError("noise block was sampled on a different mesh")
    if noise.m < scheme.order:
        raise ValueError(f"noise order {noise.m} is below the scheme order {scheme.order}")
    if noise.w.shape[0] != mu.size or not np.allclose(noise.mu, mu, rtol=1e-13, atol=0.0):
        raise ValueError("noise block modes do not match mu")

    # a higher-order block contains the lower-order one as its j <= order slice
    w = noise.w if noise.m == scheme.order else np.ascontiguousarray(noise.w[:, :, : scheme.order + 1])
    prefactor = np.sqrt(lam) / math.gamma(gamma)
    out = np.zeros((len(out_indices), mu.size))
    for row, n in enumerate(out_indices):
        n = int(n)
        if n == 0:
            continue  # zero initial condition
        coef = _scheme_coefficients(gamma, mesh, n, scheme)
        dt = mesh.nodes[n] - mesh.nodes[1 : n + 1]
        out[row] = prefactor * _kernels.path_accumulate(mu, dt, coef, w)
        if ops is not None:
            ops.terms += n * mu.size * (scheme.order + 1)
    return out


def simulate_paths(
    params: SpdeParams,
    basis: EigenBasis,
    mesh: TemporalMesh,
    scheme,
    output_times,
    noise: NoiseBlock,
    ops: OpCounter | None = None,
) -> list[CoefficientPath]:
    """Simulate the first basis.M coefficient processes at mesh nodes."""
    mu, lam = mu_lambda(params, basis)
    out_times = np.asarray(output_times, dtype=float)
    out_indices = [mesh.node_index(t) for t in out_times]
    values = coefficient_values(params.gamma, mu, lam, mesh, scheme, out_indices, noise, ops)
    return [
        CoefficientPath(
            k=k,
            times=out_times.copy(),
            values=values[:, k].copy(),
            scheme=scheme.label,
            provenance={"seed": noise.seed, "mesh": (mesh.end_time, mesh.n_intervals)},
        )
        for k in range(basis.M)
    ]


def assemble_field(paths, basis: EigenBasis, grid, time_index: int = 0, block: int = 256) -> FieldSnapshot:
    """Synthesise the field sum_k c_k e_k(x) on the given points."""
    grid = np.asarray(grid, dtype=float)
    times = {float(p.times[time_index]) for p in paths}
    if len(times) != 1:
        raise ValueError("all paths must share the evaluation time")
    coeffs = np.array([p.values[time_index] for p in paths])
    if len(paths) != basis.M:
        raise ValueError("need one path per basis function")
    vals = np.zeros(grid.shape[0])
    for start in range(0, basis.M, block):
        stop = min(start + block, basis.M)
        vals += basis.evaluate(grid, start, stop) @ coeffs[start:stop]
    return FieldSnapshot(time=times.pop(), points=grid, values=vals, M=basis.M)


def relative_rmse(reference: np.ndarray, approx: np.ndarray):
    """Relative root mean-square error over replicas, with jackknife SE.

    sqrt(mean((ref - approx)^2) / mean(ref^2)); the standard error is the
    delete-one jackknife of the same statistic.
    """
    reference = np.asarray(reference, dtype=float)
    approx = np.asarray(approx, dtype=float)
    if reference.shape != approx.shape:
        raise ValueError("replica arrays must have identical shape")
    n = reference.size
    if n < 2:
        raise ValueError("need at least 2 replicas")
    diff_sq = (reference - approx) ** 2
    ref_sq = reference**2
    num, den = diff_sq.sum(), ref_sq.sum()
    err = math.sqrt(num / den)
    loo = np.sqrt((num - diff_sq) / (den - ref_sq))
    se = math.sqrt((n - 1) / n * ((loo - loo.mean()) ** 2).sum())
    return err, se


__all__ = [
    "OpCounter",
    "CoefficientPath",
    "FieldSnapshot",
    "coefficient_values",
    "simulate_paths",
    "assemble_field",
    "relative_rmse",
    "LeftPoint",
    "Projection",
]
