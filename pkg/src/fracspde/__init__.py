"""Spectral simulation of fractional stochastic evolution equations.

Simulates (d/dt + A)^gamma X = white-in-time Q-noise by truncating the
eigenfunction expansion in space and applying exact-Gaussian quadrature
to the resulting singular Ito integrals in time, together with a
harness that verifies the strong convergence orders empirically.
"""

from .kernel import (
    KernelSpec,
    LeftPoint,
    PiecewisePoly,
    Projection,
    build_quadrature_poly,
    kernel_moments,
    legendre_orthonormal,
    leftpoint_kernel,
    project_kernel,
)
from .mesh import TemporalMesh, build_geometric_mesh, build_uniform_mesh, coarsen_mesh
from .noise import (
    FactorisationError,
    IncrementCovariance,
    NoiseBlock,
    restrict_noise,
    sample_block,
    sigma_matrix,
)
from .oracle import (
    cholesky_reference,
    covariance_matrix,
    exact_covariance,
    exact_variance,
    stationary_variance,
)
from .simulate import (
    CoefficientPath,
    FieldSnapshot,
    OpCounter,
    assemble_field,
    coefficient_values,
    relative_rmse,
    simulate_paths,
)
from .spectral import (
    EigenBasis,
    ModelError,
    RangeParams,
    SpdeParams,
    TheoryRates,
    eigen_rectangle,
    eigen_sphere,
    mu_lambda,
    theory_rates,
    to_range,
    to_spde,
)

__version__ = "0.1.0"

__all__ = [
    "KernelSpec",
    "LeftPoint",
    "PiecewisePoly",
    "Projection",
    "build_quadrature_poly",
    "kernel_moments",
    "legendre_orthonormal",
    "leftpoint_kernel",
    "project_kernel",
    "TemporalMesh",
    "build_geometric_mesh",
    "build_uniform_mesh",
    "coarsen_mesh",
    "FactorisationError",
    "IncrementCovariance",
    "NoiseBlock",
    "restrict_noise",
    "sample_block",
    "sigma_matrix",
    "cholesky_reference",
    "covariance_matrix",
    "exact_covariance",
    "exact_variance",
    "stationary_variance",
    "CoefficientPath",
    "FieldSnapshot",
    "OpCounter",
    "assemble_field",
    "coefficient_values",
    "relative_rmse",
    "simulate_paths",
    "EigenBasis",
    "ModelError",
    "RangeParams",
    "SpdeParams",
    "TheoryRates",
    "eigen_rectangle",
    "eigen_sphere",
    "mu_lambda",
    "theory_rates",
    "to_range",
    "to_spde",
    "__version__",
]
