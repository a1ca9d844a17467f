"""Deterministic test-signal generators.

Signals used by the verification suites and the command line.  Everything
is reproducible from explicit parameters and seeds.  The band-limited
generator builds even cosine superpositions, so its transform stays in
R + R e2; that is the hypothesis class of the fast wavelet path and of
most identities checked by the harness.
"""

from __future__ import annotations

import numpy as np

from .quaternion import qmul
from .signal import Grid2D, QSignal2D

__all__ = [
    "gaussian",
    "anisotropic_gaussian",
    "random_bandlimited",
    "impulse",
    "default_grid",
]


def default_grid(n=128, extent=8.0) -> Grid2D:
    return Grid2D.centered(n, extent)


def gaussian(grid: Grid2D, sigma=1.0, center=(0.0, 0.0), value=(1.0, 0.0, 0.0, 0.0)) -> QSignal2D:
    """exp(-pi |x - c|^2 / sigma^2) times a constant quaternion (on the right)."""
    X, Y = grid.mesh()
    r2 = (X - center[0]) ** 2 + (Y - center[1]) ** 2
    env = np.exp(-np.pi * r2 / sigma**2)
    data = qmul(env[..., None] * np.array([1.0, 0, 0, 0]), np.asarray(value, dtype=float))
    return QSignal2D(grid, data)


def anisotropic_gaussian(grid: Grid2D, sigma1=1.5, sigma2=0.75, center=(0.0, 0.0)) -> QSignal2D:
    """Axis-aligned Gaussian with distinct widths; real-valued."""
    X, Y = grid.mesh()
    env = np.exp(
        -np.pi * (((X - center[0]) / sigma1) ** 2 + ((Y - center[1]) / sigma2) ** 2)
    )
    return QSignal2D.from_scalar(grid, env)


def random_bandlimited(
    grid: Grid2D,
    seed: int,
    k_lo=0.35,
    k_hi=0.9,
    n_modes=24,
    envelope_sigma=2.2,
    value=(1.0, 0.0, 0.0, 0.0),
) -> QSignal2D:
    """Random superposition of separable cosines with wavevectors in an annulus.

    Products cos(2 pi k1 x1) cos(2 pi k2 x2) are even along each axis
    separately, so the transform of the field is real-valued; the Gaussian
    envelope keeps the signal well inside the grid.  Normalized to unit
    L2 norm, then scaled by a constant quaternion on the right.
    """
    rng = np.random.default_rng(seed)
    radii = rng.uniform(k_lo, k_hi, n_modes)
    phis = rng.uniform(0.0, 2.0 * np.pi, n_modes)
    amps = rng.normal(size=n_modes)
    X, Y = grid.mesh()
    field = np.zeros_like(X)
    for r, p, c in zip(radii, phis, amps):
        field += c * np.cos(2.0 * np.pi * r * np.cos(p) * X) * np.cos(
            2.0 * np.pi * r * np.sin(p) * Y
        )
    field *= np.exp(-(X**2 + Y**2) / (2.0 * envelope_sigma**2))
    norm = np.sqrt((field**2).sum() * grid.cell_area)
    if norm == 0:
        raise ValueError("degenerate random draw")
    field /= norm
    data = qmul(field[..., None] * np.array([1.0, 0, 0, 0]), np.asarray(value, dtype=float))
    return QSignal2D(grid, data)


def impulse(grid: Grid2D, at=(0.0, 0.0), value=(0.0, 0.0, 0.0, 1.0)) -> QSignal2D:
    """Single nonzero sample at the grid point nearest to `at`."""
    i = int(round((at[0] - grid.x0) / grid.dx))
    j = int(round((at[1] - grid.y0) / grid.dy))
    if not (0 <= i < grid.n1 and 0 <= j < grid.n2):
        raise ValueError(f"impulse location {at} outside the grid")
    data = np.zeros((grid.n1, grid.n2, 4))
    data[i, j] = np.asarray(value, dtype=float)
    return QSignal2D(grid, data)
