"""Mollweide projection from its defining equation.

The auxiliary angle theta solves 2 theta + sin(2 theta) = pi sin(lat)
by Newton iteration; then x = (2 sqrt(2)/pi) lon cos(theta) and
y = sqrt(2) sin(theta). Implemented directly to keep the plotting
scripts free of geographic dependencies.
"""

import numpy as np

_SQRT2 = np.sqrt(2.0)


def auxiliary_angle(lat, tol=1e-12, max_iter=50):
    lat = np.asarray(lat, dtype=float)
    theta = np.array(lat, dtype=float, copy=True)
    # the iteration degenerates at the poles where the equation is exact
    polar = np.abs(np.abs(lat) - np.pi / 2.0) < 1e-12
    target = np.pi * np.sin(lat)
    for _ in range(max_iter):
        f = 2.0 * theta + np.sin(2.0 * theta) - target
        df = 2.0 + 2.0 * np.cos(2.0 * theta)
        step = np.where(polar, 0.0, f / np.maximum(df, 1e-12))
        theta = theta - step
        if np.max(np.abs(step)) < tol:
            break
    theta[polar] = np.sign(lat[polar]) * np.pi / 2.0
    return theta


def project(lon, lat):
    """Map radians (lon in [-pi, pi], lat in [-pi/2, pi/2]) to (x, y)."""
    lon = np.asarray(lon, dtype=float)
    theta = auxiliary_angle(lat)
    x = 2.0 * _SQRT2 / np.pi * lon * np.cos(theta)
    y = _SQRT2 * np.sin(theta)
    return x, y
