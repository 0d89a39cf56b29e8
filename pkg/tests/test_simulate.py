"""Path assembly, field synthesis, error metrics, operation accounting."""

import math

import numpy as np
import pytest

import fracspde as fs
from fracspde import LeftPoint, OpCounter, Projection, relative_rmse
from fracspde._kernels import _path_accumulate_np, _restricted_sum_np, path_accumulate, restricted_sum
from fracspde._rng import derive_seed


def _single_mode_values(gamma, mu, lam, mesh, scheme, n, noise):
    return fs.coefficient_values(gamma, [mu], [lam], mesh, scheme, [n], noise)[0, 0]


# ------------------------------------------------------------ single terms

def test_single_interval_closed_form():
    # M = 1 mode, one interval, theta = 0: c = sqrt(lam)/Gamma(1.5) * 1^0.5 * w
    mesh = fs.build_uniform_mesh(1.0, 1)
    noise = fs.sample_block(mesh, [0.4], 0, seed=5)
    val = _single_mode_values(1.5, 0.4, 2.0, mesh, LeftPoint(0.0), 1, noise)
    expected = math.sqrt(2.0) / math.gamma(1.5) * 1.0 * noise.w[0, 0, 0]
    assert val == pytest.approx(expected, rel=1e-14)


def test_zero_initial_condition():
    mesh = fs.build_uniform_mesh(1.0, 4)
    noise = fs.sample_block(mesh, [1.0], 0, seed=1)
    vals = fs.coefficient_values(0.8, [1.0], [1.0], mesh, LeftPoint(0.0), [0, 4], noise)
    assert vals[0, 0] == 0.0
    assert vals[1, 0] != 0.0


def test_linearity_in_noise():
    mesh = fs.build_uniform_mesh(1.0, 16)
    b1 = fs.sample_block(mesh, [0.7], 1, seed=2)
    b2 = fs.sample_block(mesh, [0.7], 1, seed=3)
    both = fs.NoiseBlock(
        mesh=mesh, mu=b1.mu, m=1, w=b1.w + b2.w, seed=0, stream_policy="sum"
    )
    scheme = Projection(1)
    v1 = _single_mode_values(0.9, 0.7, 1.0, mesh, scheme, 16, b1)
    v2 = _single_mode_values(0.9, 0.7, 1.0, mesh, scheme, 16, b2)
    v12 = _single_mode_values(0.9, 0.7, 1.0, mesh, scheme, 16, both)
    assert v12 == pytest.approx(v1 + v2, rel=1e-12)


def test_mismatched_noise_rejected():
    mesh = fs.build_uniform_mesh(1.0, 4)
    other = fs.build_uniform_mesh(1.0, 8)
    noise = fs.sample_block(other, [1.0], 0, seed=1)
    with pytest.raises(ValueError):
        fs.coefficient_values(0.8, [1.0], [1.0], mesh, LeftPoint(0.0), [4], noise)
    low = fs.sample_block(mesh, [1.0], 0, seed=1)
    with pytest.raises(ValueError):
        fs.coefficient_values(0.8, [1.0], [1.0], mesh, Projection(1), [4], low)
    with pytest.raises(ValueError):
        fs.coefficient_values(0.8, [2.0], [1.0], mesh, LeftPoint(0.0), [4], low)


def test_off_node_times_rejected():
    sp = fs.SpdeParams(gamma=1.0, alpha=1.0, beta=1.0, kappa=1.0, r=1.0, sigma=1.0, d=1)
    basis = fs.eigen_rectangle(1, 2)
    mesh = fs.build_uniform_mesh(1.0, 4)
    mu, _ = fs.mu_lambda(sp, basis)
    noise = fs.sample_block(mesh, mu, 0, seed=1)
    with pytest.raises(ValueError):
        fs.simulate_paths(sp, basis, mesh, LeftPoint(0.0), [0.3], noise)


# -------------------------------------------------------- exactness gamma=1

def test_gamma_one_exact_across_restriction():
    mesh = fs.build_uniform_mesh(1.0, 2**10)
    block = fs.sample_block(mesh, [0.1], 0, seed=42)
    fine = _single_mode_values(1.0, 0.1, 1.0, mesh, LeftPoint(0.0), 2**10, block)
    for _ in range(3):
        block = fs.restrict_noise(block)
    coarse = _single_mode_values(1.0, 0.1, 1.0, block.mesh, LeftPoint(0.0), block.mesh.n_intervals, block)
    assert coarse == pytest.approx(fine, abs=1e-12)


def test_gamma_one_projection_also_exact():
    mesh = fs.build_uniform_mesh(1.0, 2**8)
    block = fs.sample_block(mesh, [0.5], 1, seed=9)
    fine = _single_mode_values(1.0, 0.5, 1.0, mesh, Projection(1), 2**8, block)
    coarse_block = fs.restrict_noise(fs.restrict_noise(block))
    coarse = _single_mode_values(1.0, 0.5, 1.0, coarse_block.mesh, Projection(1), 2**6, coarse_block)
    assert coarse == pytest.approx(fine, abs=1e-12)


# ----------------------------------------------------------------- variance

def test_variance_against_oracle():
    mesh = fs.build_uniform_mesh(1.0, 2**7)
    r = 4000
    block = fs.sample_block(mesh, np.full(r, 0.1), 0, seed=31)
    vals = fs.coefficient_values(1.0, np.full(r, 0.1), np.ones(r), mesh, LeftPoint(0.0), [2**7], block)[0]
    target = fs.exact_variance(0.1, 1.0, 1.0, 1.0)
    emp = vals.var(ddof=1)
    assert abs(emp - target) <= 3.0 * target * math.sqrt(2.0 / (r - 1))


def test_variance_saturates_at_stationary_level():
    mu, lam, gamma = 2.0, 1.0, 1.25
    t_end = 50.0 / mu
    mesh = fs.build_uniform_mesh(t_end, 2**9)
    r = 4000
    block = fs.sample_block(mesh, np.full(r, mu), 1, seed=13)
    vals = fs.coefficient_values(gamma, np.full(r, mu), np.full(r, lam), mesh, Projection(1), [2**9], block)[0]
    limit = fs.stationary_variance(mu, lam, gamma)
    emp = vals.var(ddof=1)
    # h^(2 gamma - 1) discretisation bias is ~2e-3 here, inside the MC band
    assert abs(emp - limit) <= 3.0 * limit * math.sqrt(2.0 / (r - 1)) + 0.01 * limit


def test_orthogonal_modes_uncorrelated():
    sp = fs.SpdeParams(gamma=1.0, alpha=1.0, beta=1.0, kappa=1.0, r=1.0, sigma=1.0, d=2)
    basis = fs.eigen_rectangle(2, 2)
    mesh = fs.build_uniform_mesh(1.0, 2**6)
    mu, lam = fs.mu_lambda(sp, basis)
    samples = []
    for rep in range(400):
        noise = fs.sample_block(mesh, mu, 0, seed=derive_seed(77, "modes", rep))
        vals = fs.coefficient_values(sp.gamma, mu, lam, mesh, LeftPoint(0.0), [2**6], noise)[0]
        samples.append(vals)
    samples = np.array(samples)
    cross = np.mean(samples[:, 0] * samples[:, 1])
    scale = samples[:, 0].std() * samples[:, 1].std()
    assert abs(cross) <= 3.0 * scale / math.sqrt(samples.shape[0])


# ------------------------------------------------------------------- fields

def test_field_single_mode_scaling():
    basis = fs.eigen_rectangle(2, 1)
    path = fs.CoefficientPath(k=0, times=np.array([1.0]), values=np.array([2.0]), scheme="test")
    grid = np.array([[0.5, 0.5], [0.25, 0.5]])
    snap = fs.assemble_field([path], basis, grid)
    assert np.allclose(snap.values, 2.0 * basis.evaluate(grid)[:, 0], rtol=1e-14)


def test_field_zero_coefficients():
    basis = fs.eigen_rectangle(2, 3)
    paths = [
        fs.CoefficientPath(k=k, times=np.array([1.0]), values=np.array([0.0]), scheme="test")
        for k in range(3)
    ]
    snap = fs.assemble_field(paths, basis, np.array([[0.3, 0.7]]))
    assert np.all(snap.values == 0.0)


def test_field_matches_dense_oracle():
    basis = fs.eigen_rectangle(2, 4)
    rng = np.random.default_rng(2)
    coeffs = rng.standard_normal(4)
    paths = [
        fs.CoefficientPath(k=k, times=np.array([2.0]), values=np.array([coeffs[k]]), scheme="test")
        for k in range(4)
    ]
    grid = rng.random((50, 2))
    snap = fs.assemble_field(paths, basis, grid, block=2)
    dense = np.zeros(50)
    for k, (i, j) in enumerate(basis.indices):
        dense += coeffs[k] * 2.0 * np.sin(i * math.pi * grid[:, 0]) * np.sin(j * math.pi * grid[:, 1])
    assert np.allclose(snap.values, dense, rtol=1e-12, atol=1e-12)


def test_field_snapshot_invariant_recomputed():
    sp = fs.SpdeParams(gamma=1.2, alpha=0.8, beta=1.0, kappa=1.5, r=1.0, sigma=1.0, d=2)
    basis = fs.eigen_rectangle(2, 6)
    mesh = fs.build_uniform_mesh(1.0, 8)
    mu, lam = fs.mu_lambda(sp, basis)
    noise = fs.sample_block(mesh, mu, 0, seed=3)
    paths = fs.simulate_paths(sp, basis, mesh, LeftPoint(0.0), [1.0], noise)
    grid = np.array([[0.2, 0.4], [0.9, 0.1]])
    snap = fs.assemble_field(paths, basis, grid)
    manual = basis.evaluate(grid) @ np.array([p.values[0] for p in paths])
    assert np.allclose(snap.values, manual, rtol=1e-12)


# ----------------------------------------------------------- relative error

def test_relative_rmse_identical_inputs():
    vals = np.linspace(1.0, 2.0, 10)
    err, se = relative_rmse(vals, vals)
    assert err == 0.0 and se == 0.0


def test_relative_rmse_constant_offset():
    rng = np.random.default_rng(0)
    ref = rng.standard_normal(10**5)
    ref /= math.sqrt(np.mean(ref**2))  # unit second moment
    eps = 0.01
    err, se = relative_rmse(ref, ref + eps)
    assert err == pytest.approx(eps, rel=1e-9)
    assert se >= 0.0


def test_relative_rmse_needs_replicas():
    with pytest.raises(ValueError):
        relative_rmse(np.array([1.0]), np.array([1.0]))


# ------------------------------------------------------------- op counting

def test_operation_counter_linear_scaling():
    def ops_for(J, N, M):
        mesh = fs.build_uniform_mesh(1.0, N)
        mu = np.linspace(0.5, 2.0, M)
        block = fs.sample_block(mesh, mu, 0, seed=1)
        counter = OpCounter()
        out = list(range(N - J + 1, N + 1))
        fs.coefficient_values(0.8, mu, np.ones(M), mesh, LeftPoint(0.0), out, block, ops=counter)
        return counter.terms

    base = ops_for(4, 256, 8)
    assert abs(ops_for(8, 256, 8) / base - 2.0) <= 0.2
    assert abs(ops_for(4, 512, 8) / base - 2.0) <= 0.2
    assert abs(ops_for(4, 256, 16) / base - 2.0) <= 0.2


# ------------------------------------------------------------ kernel lanes

def test_numba_and_numpy_paths_agree():
    rng = np.random.default_rng(4)
    mu = rng.uniform(0.1, 5.0, 7)
    dt = np.sort(rng.uniform(0.0, 1.0, 9))[::-1].copy()
    coef = rng.standard_normal((9, 2))
    w = rng.standard_normal((7, 12, 2))
    a = path_accumulate(mu, dt, coef, w)
    b = _path_accumulate_np(mu, dt, coef, w)
    assert np.allclose(a, b, rtol=1e-13)
    weights = rng.standard_normal(9)
    c = restricted_sum(weights, coef, w)
    d = _restricted_sum_np(weights, coef, w)
    assert np.allclose(c, d, rtol=1e-13)


def test_exp_underflow_guard():
    # mu dt > 700 contributes exactly zero on both lanes
    mu = np.array([1000.0])
    dt = np.array([1.0])
    coef = np.ones((1, 1))
    w = np.ones((1, 1, 1))
    assert path_accumulate(mu, dt, coef, w)[0] == 0.0
    assert _path_accumulate_np(mu, dt, coef, w)[0] == 0.0
