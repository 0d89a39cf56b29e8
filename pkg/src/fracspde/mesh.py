"""Temporal discretisation grids 0 = t_0 < t_1 < ... < t_N = T."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TemporalMesh:
    """Ordered time nodes with cached step statistics.

    ``h`` is the largest interval width and ``eta`` the max/min width
    ratio, which controls the stability constant of the left-point
    scheme on non-uniform grids.
    """

    nodes: np.ndarray
    h: float = field(init=False)
    eta: float = field(init=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("mesh needs at least two nodes")
        if nodes[0] != 0.0:
            raise ValueError("mesh must start at t_0 = 0")
        widths = np.diff(nodes)
        if np.any(widths <= 0.0):
            raise ValueError("mesh nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "h", float(widths.max()))
        object.__setattr__(self, "eta", float(widths.max() / widths.min()))

    @property
    def n_intervals(self) -> int:
        return self.nodes.size - 1

    @property
    def end_time(self) -> float:
        return float(self.nodes[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    def is_uniform(self, rtol: float = 1e-12) -> bool:
        return self.eta <= 1.0 + rtol

    def node_index(self, t: float) -> int:
        """Index of the node equal to ``t``; raises if ``t`` is off-node."""
        idx = int(np.searchsorted(self.nodes, t))
        for cand in (idx - 1, idx, idx + 1):
            if 0 <= cand < self.nodes.size and abs(self.nodes[cand] - t) <= 1e-12 * max(1.0, self.end_time):
                return cand
        raise ValueError(f"t={t} is not a mesh node")


def build_uniform_mesh(T: float, N: int) -> TemporalMesh:
    """Uniform mesh with N intervals on [0, T]."""
    if T <= 0.0:
        raise ValueError("T must be positive")
    if N < 1:
        raise ValueError("N must be at least 1")
    return TemporalMesh(np.linspace(0.0, T, N + 1))


def build_geometric_mesh(T: float, N: int, ratio: float) -> TemporalMesh:
    """Mesh whose interval widths grow geometrically by ``ratio``."""
    if T <= 0.0 or N < 1:
        raise ValueError("T must be positive and N >= 1")
    if ratio <= 0.0:
        raise ValueError("ratio must be positive")
    widths = ratio ** np.arange(N)
    nodes = np.concatenate([[0.0], np.cumsum(widths)])
    nodes *= T / nodes[-1]
    nodes[-1] = T
    return TemporalMesh(nodes)


def coarsen_mesh(mesh: TemporalMesh, factor: int = 2) -> TemporalMesh:
    """Drop every other node (requires an even interval count)."""
    if factor != 2:
        raise ValueError("only coarsening factor 2 is supported")
    if mesh.n_intervals % 2 != 0:
        raise ValueError("coarsening requires an even number of intervals")
    return TemporalMesh(mesh.nodes[::2])
