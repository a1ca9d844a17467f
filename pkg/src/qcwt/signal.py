"""Sampled quaternion-valued 2D signals on uniform grids.

A signal is a row-major (n1, n2, 4) float64 array attached to a Grid2D
that fixes the physical coordinates.  The cell area dx*dy is the
quadrature weight for every integral, so norms and inner products
approximate their continuum counterparts directly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .quaternion import Quaternion, qconj, qmodulus_sq, qmul

__all__ = [
    "Grid2D",
    "QSignal2D",
    "SimGrid",
    "GridMismatchError",
    "QSFFormatError",
    "inner_product",
    "l2_norm",
    "resample_similitude",
    "sample_field",
    "read_qsf",
    "write_qsf",
]

QSF_MAGIC = b"QSF1"


class GridMismatchError(ValueError):
    """Two signals do not share the same grid."""


class QSFFormatError(ValueError):
    """Malformed or truncated QSF file."""


@dataclass(frozen=True)
class Grid2D:
    """Uniform sampling lattice: n1 x n2 points, origin (x0, y0), spacings (dx, dy)."""

    n1: int
    n2: int
    x0: float
    y0: float
    dx: float
    dy: float

    def __post_init__(self):
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError("grid needs at least 2 samples per axis")
        if self.dx <= 0 or self.dy <= 0:
            raise ValueError("grid spacings must be positive")

    @classmethod
    def centered(cls, n, extent):
        """Square grid covering [-extent, extent) with n samples per axis."""
        d = 2.0 * extent / n
        return cls(n, n, -extent, -extent, d, d)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def x(self):
        return self.x0 + self.dx * np.arange(self.n1)

    @property
    def y(self):
        return self.y0 + self.dy * np.arange(self.n2)

    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    def radius_sq(self):
        X, Y = self.mesh()
        return X**2 + Y**2

    def freq_dual(self) -> "Grid2D":
        """Exact dual frequency grid, centered at 0, spacing 1/(n*d)."""
        du = 1.0 / (self.n1 * self.dx)
        dv = 1.0 / (self.n2 * self.dy)
        return Grid2D(self.n1, self.n2, -(self.n1 // 2) * du, -(self.n2 // 2) * dv, du, dv)

    def is_centered(self, tol=1e-9):
        return (
            abs(self.x0 + (self.n1 // 2) * self.dx) <= tol * self.dx
            and abs(self.y0 + (self.n2 // 2) * self.dy) <= tol * self.dy
        )


@dataclass
class QSignal2D:
    """Quaternion field sampled on a Grid2D.  Immutable by convention."""

    grid: Grid2D
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.shape != (self.grid.n1, self.grid.n2, 4):
            raise ValueError(
                f"data shape {self.data.shape} does not match grid "
                f"({self.grid.n1}, {self.grid.n2}, 4)"
            )
        if not np.all(np.isfinite(self.data)):
            raise ValueError("signal contains non-finite values")

    @classmethod
    def from_scalar(cls, grid, values):
        """Real field placed in the e0 component."""
        data = np.zeros((grid.n1, grid.n2, 4))
        data[..., 0] = values
        return cls(grid, data)

    def component(self, k):
        return self.data[..., k]

    def modulus(self):
        return np.sqrt(qmodulus_sq(self.data))

    def copy(self):
        return QSignal2D(self.grid, self.data.copy())


def inner_product(f, g) -> Quaternion:
    """Quaternion L2 inner product: cell_area * sum f(x) conj(g(x)).

    Works for any pair of fields sharing a grid (signals or spectra).
    """
    if f.grid != g.grid:
        raise GridMismatchError("inner product requires identical grids")
    s = qmul(f.data, qconj(g.data)).sum(axis=(0, 1)) * f.grid.cell_area
    return Quaternion.from_array(s)


def l2_norm(f) -> float:
    """sqrt(cell_area * sum |f(x)|^2)."""
    return float(np.sqrt(qmodulus_sq(f.data).sum() * f.grid.cell_area))


def sample_field(f: QSignal2D, px, py, order=1):
    """Interpolate all four components of f at physical points (px, py).

    Points outside the grid evaluate to zero.  order=1 is bilinear,
    order=3 a cubic spline (used for smooth spectra).
    """
    ix = (np.asarray(px) - f.grid.x0) / f.grid.dx
    iy = (np.asarray(py) - f.grid.y0) / f.grid.dy
    coords = np.stack([ix, iy])
    out = np.empty(ix.shape + (4,))
    for k in range(4):
        out[..., k] = ndimage.map_coordinates(
            f.data[..., k], coords, order=order, mode="constant", cval=0.0
        )
    return out


def resample_similitude(f: QSignal2D, a: float, theta: float, b=(0.0, 0.0)) -> QSignal2D:
    """Dilate, rotate and translate: x -> (1/a) f(r_{-theta}((x - b)/a)).

    Bilinear interpolation, zero outside the grid.  Carries the 1/a
    factor that preserves the L2 norm of well-contained signals.
    """
    if a <= 0:
        raise ValueError("dilation parameter a must be positive")
    X, Y = f.grid.mesh()
    px = (X - b[0]) / a
    py = (Y - b[1]) / a
    c, s = np.cos(theta), np.sin(theta)
    # r_{-theta} = [[c, s], [-s, c]] applied to (px, py)
    qx = c * px + s * py
    qy = -s * px + c * py
    return QSignal2D(f.grid, sample_field(f, qx, qy) / a)


@dataclass
class SimGrid:
    """Discretized similitude parameters: scales, angles, translation grid.

    weights[j, k] approximates the measure a^-3 da dtheta at (a_j, theta_k);
    for log-spaced scales this is a_j^-2 * dln(a) * dtheta since da = a dln(a).
    The translation quadrature weight is grid.cell_area, applied separately.
    """

    scales: np.ndarray
    angles: np.ndarray
    grid: Grid2D
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        self.scales = np.asarray(self.scales, dtype=float)
        self.angles = np.asarray(self.angles, dtype=float)
        if np.any(self.scales <= 0) or np.any(np.diff(self.scales) <= 0):
            raise ValueError("scales must be ascending and positive")
        if self.weights is None:
            self.weights = np.outer(self.scales**-2 * self.dlna, np.full(self.n_angles, self.dtheta))
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (self.n_scales, self.n_angles):
            raise ValueError("weights must have shape (n_scales, n_angles)")
        if np.any(self.weights <= 0):
            raise ValueError("Haar weights must be positive")

    @classmethod
    def log_spaced(cls, grid, n_scales, a_min, a_max, n_angles):
        """Log-uniform scales over [a_min, a_max], uniform angles over [0, 2pi)."""
        if n_scales < 2 or a_min <= 0 or a_max <= a_min:
            raise ValueError("need n_scales >= 2 and 0 < a_min < a_max")
        scales = np.geomspace(a_min, a_max, n_scales)
        angles = 2.0 * np.pi * np.arange(n_angles) / n_angles
        return cls(scales, angles, grid)

    @property
    def n_scales(self):
        return len(self.scales)

    @property
    def n_angles(self):
        return len(self.angles)

    @property
    def dtheta(self) -> float:
        return 2.0 * np.pi / self.n_angles

    @property
    def dlna(self):
        """Per-scale log step, trapezoid-style for non-uniform ladders."""
        lna = np.log(self.scales)
        d = np.empty_like(lna)
        d[1:-1] = 0.5 * (lna[2:] - lna[:-2])
        d[0] = lna[1] - lna[0]
        d[-1] = lna[-1] - lna[-2]
        return d

    @property
    def n_coefficients(self):
        return self.n_scales * self.n_angles * self.grid.n1 * self.grid.n2

    def scale_integral(self, values):
        """Quadrature of integrand(a) against the measure a^-1 da.

        values[j] = integrand evaluated at scales[j]; the log spacing turns
        a^-1 da into dln(a).
        """
        return float(np.sum(np.asarray(values) * self.dlna))


def write_qsf(path, f: QSignal2D):
    """Binary signal format: magic, u32 n1 n2, f64 x0 y0 dx dy, 4 planes."""
    g = f.grid
    with open(path, "wb") as fh:
        fh.write(QSF_MAGIC)
        fh.write(struct.pack("<II", g.n1, g.n2))
        fh.write(struct.pack("<4d", g.x0, g.y0, g.dx, g.dy))
        for k in range(4):
            fh.write(np.ascontiguousarray(f.data[..., k]).astype("<f8").tobytes())


def read_qsf(path) -> QSignal2D:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != QSF_MAGIC:
        raise QSFFormatError(f"bad magic {blob[:4]!r}, expected {QSF_MAGIC!r}")
    header = struct.calcsize("<II4d")
    if len(blob) < 4 + header:
        raise QSFFormatError("truncated header")
    n1, n2 = struct.unpack_from("<II", blob, 4)
    x0, y0, dx, dy = struct.unpack_from("<4d", blob, 12)
    expected = 4 + header + 4 * n1 * n2 * 8
    if len(blob) != expected:
        raise QSFFormatError(
            f"payload length mismatch: file has {len(blob)} bytes, "
            f"header implies {expected}"
        )
    planes = np.frombuffer(blob, dtype="<f8", offset=4 + header)
    data = planes.reshape(4, n1, n2).transpose(1, 2, 0).astype(float)
    if not np.all(np.isfinite(data)):
        raise QSFFormatError("file contains non-finite samples")
    return QSignal2D(Grid2D(n1, n2, x0, y0, dx, dy), data)
