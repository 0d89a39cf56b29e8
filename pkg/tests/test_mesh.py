import numpy as np
import pytest

from fracspde import build_geometric_mesh, build_uniform_mesh, coarsen_mesh
from fracspde.mesh import TemporalMesh


def test_uniform_mesh_nodes():
    mesh = build_uniform_mesh(1.0, 4)
    assert np.allclose(mesh.nodes, [0.0, 0.25, 0.5, 0.75, 1.0])
    assert mesh.h == 0.25
    assert mesh.eta == 1.0


def test_uniform_single_interval():
    mesh = build_uniform_mesh(1.0, 1)
    assert list(mesh.nodes) == [0.0, 1.0]
    assert mesh.h == 1.0


def test_uniform_reference_resolution():
    mesh = build_uniform_mesh(1.0, 2**17)
    assert mesh.h == pytest.approx(2.0**-17, rel=1e-15)
    assert mesh.n_intervals == 2**17
    assert mesh.eta <= 1.0 + 1e-12


def test_invalid_arguments():
    with pytest.raises(ValueError):
        build_uniform_mesh(-1.0, 4)
    with pytest.raises(ValueError):
        build_uniform_mesh(1.0, 0)
    with pytest.raises(ValueError):
        TemporalMesh(np.array([0.1, 0.5, 1.0]))  # must start at 0
    with pytest.raises(ValueError):
        TemporalMesh(np.array([0.0, 0.5, 0.5, 1.0]))  # not strictly increasing


def test_geometric_mesh_ratio():
    mesh = build_geometric_mesh(1.0, 8, 1.3)
    widths = mesh.widths
    assert np.allclose(widths[1:] / widths[:-1], 1.3)
    assert mesh.eta == pytest.approx(1.3**7, rel=1e-12)
    assert mesh.end_time == 1.0


def test_coarsen_halves_and_preserves_nodes():
    mesh = build_uniform_mesh(1.0, 16)
    coarse = coarsen_mesh(mesh)
    assert coarse.n_intervals == 8
    assert np.array_equal(coarse.nodes, mesh.nodes[::2])
    with pytest.raises(ValueError):
        coarsen_mesh(build_uniform_mesh(1.0, 9))


def test_node_index():
    mesh = build_uniform_mesh(1.0, 8)
    assert mesh.node_index(0.5) == 4
    assert mesh.node_index(0.0) == 0
    assert mesh.node_index(1.0) == 8
    with pytest.raises(ValueError):
        mesh.node_index(0.3)
