"""Admissible quaternion wavelets.

A wavelet is admissible when the scale-and-rotation integral of its
squared rotated spectrum,

    C(xi) = int_0^inf int_SO(2) |F{phi(r_{-theta} .)}(a xi)|^2 dtheta a^-1 da,

is finite, positive and independent of the probe direction xi.  The
constant is evaluated by log-scale quadrature against spectra of the
rotated mother; a nonzero DC component makes the small-scale tail
non-integrable and is rejected.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .quaternion import Quaternion, qconj, qmodulus_sq, qmul
from .qft import QSpectrum2D, qft_forward
from .signal import Grid2D, QSignal2D, SimGrid, resample_similitude

__all__ = [
    "QWavelet",
    "AdmissibilityError",
    "XiDependenceError",
    "GridTooSmallError",
    "log_gaussian_wavelet",
    "dgauss_wavelet",
    "admissibility_constant",
    "daughter",
    "daughter_spectrum",
    "aqw_inner_product",
    "rotated_mother",
]

COMMUTE_TOL = 1e-8


class AdmissibilityError(ValueError):
    """The admissibility integral diverges or is degenerate."""


class XiDependenceError(AdmissibilityError):
    """The admissibility integral varies with the probe direction."""


class GridTooSmallError(ValueError):
    """Grid does not span the support needed by an analytic wavelet."""


@dataclass
class QWavelet:
    """Mother wavelet with its cached spectrum and admissibility state.

    c_phi, c_phi_spread and commutes_with_e2 start unset and are filled
    in by admissibility_constant once the wavelet has been vetted.
    analytic, when present, evaluates the mother at arbitrary points
    (mesh arrays -> (..., 4) components); rotations inside the
    admissibility and spectral machinery then sample exactly instead of
    interpolating, which is what makes the tight commute-with-e2
    threshold meaningful.
    """

    mother: QSignal2D
    spectrum: QSpectrum2D = None
    c_phi: float = None
    c_phi_spread: float = None
    commutes_with_e2: bool = None
    analytic: callable = None

    def __post_init__(self):
        if not np.any(self.mother.data):
            raise ValueError("mother wavelet must not be identically zero")
        if self.spectrum is None:
            self.spectrum = qft_forward(self.mother)

    @property
    def grid(self) -> Grid2D:
        return self.mother.grid

    def l2_norm(self) -> float:
        from .signal import l2_norm

        return l2_norm(self.mother)


def rotated_mother(w: QWavelet, theta: float) -> QSignal2D:
    """phi(r_{-theta} x) on the wavelet grid.

    Sampled from the closed form when available, otherwise by cubic
    resampling of the stored samples (zero outside the grid).
    """
    X, Y = w.grid.mesh()
    c, s = np.cos(theta), np.sin(theta)
    qx = c * X + s * Y
    qy = -s * X + c * Y
    if w.analytic is not None:
        return QSignal2D(w.grid, w.analytic(qx, qy))
    from .signal import sample_field

    return QSignal2D(w.grid, sample_field(w.mother, qx, qy, order=3))


def _require_span(grid, half_width):
    x_hi = grid.x0 + (grid.n1 - 1) * grid.dx
    y_hi = grid.y0 + (grid.n2 - 1) * grid.dy
    if (
        grid.x0 > -half_width
        or grid.y0 > -half_width
        or x_hi < half_width - grid.dx
        or y_hi < half_width - grid.dy
    ):
        raise GridTooSmallError(
            f"grid must span at least [-{half_width}, {half_width}]^2"
        )


def log_gaussian_wavelet(grid: Grid2D) -> QWavelet:
    """Negative normalized Laplacian of the unit Gaussian.

    Closed form (1/pi - |t|^2) exp(-pi |t|^2); its spectrum is the real
    radial function |xi|^2 exp(-pi |xi|^2), which vanishes at 0 and gives
    the admissibility constant 1/(4 pi).
    """
    _require_span(grid, 6.0)

    def closed_form(px, py):
        r2 = px**2 + py**2
        out = np.zeros(np.shape(px) + (4,))
        out[..., 0] = (1.0 / np.pi - r2) * np.exp(-np.pi * r2)
        return out

    X, Y = grid.mesh()
    return QWavelet(QSignal2D(grid, closed_form(X, Y)), analytic=closed_form)


def dgauss_wavelet(grid: Grid2D, scale=(0.5, 0.5, 0.5, 0.5)) -> QWavelet:
    """First derivative of the Gaussian along axis 1, quaternion-scaled.

    Anisotropic on purpose: rotation covariance is non-trivial for it.
    The right quaternion factor makes all four components non-zero while
    keeping the admissibility constant at |scale|^2 * pi^2.
    """
    _require_span(grid, 6.0)
    lam = np.asarray(scale, dtype=float)

    def closed_form(px, py):
        base = -2.0 * np.pi * px * np.exp(-np.pi * (px**2 + py**2))
        return qmul(base[..., None] * np.array([1.0, 0, 0, 0]), lam)

    X, Y = grid.mesh()
    return QWavelet(QSignal2D(grid, closed_form(X, Y)), analytic=closed_form)


def _default_probes():
    angles = 2.0 * np.pi * np.arange(8) / 8
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    return np.concatenate([dirs, 0.5 * dirs])


def admissibility_constant(
    w: QWavelet,
    probes=None,
    scale_quad: SimGrid = None,
    spread_tol: float = 0.02,
    set_fields: bool = True,
) -> float:
    """Admissibility constant by quadrature over probe directions.

    For each probe xi != 0 the integral C(xi) is evaluated on the
    scale_quad ladder; the mean over probes is returned and the relative
    spread recorded.  Also flags whether the rotated-mother spectra stay
    in R + R e2 (the commute-with-e2 hypothesis of the main identities).

    Raises
    ------
    AdmissibilityError
        Divergent small-scale tail (nonzero DC) or degenerate integral.
    XiDependenceError
        Spread across probes beyond spread_tol.
    """
    probes = _default_probes() if probes is None else np.atleast_2d(np.asarray(probes, dtype=float))
    if len(probes) < 4:
        raise ValueError("need at least 4 probe directions")
    if np.any(np.hypot(probes[:, 0], probes[:, 1]) == 0):
        raise ValueError("probes must be non-zero frequencies")
    if scale_quad is None:
        scale_quad = SimGrid.log_spaced(w.grid, 256, 1e-2, 1e2, 64)

    scales = scale_quad.scales
    dlna = scale_quad.dlna
    dtheta = scale_quad.dtheta

    commute_metric = 0.0
    # integrand[j, p] = sum_theta |M_theta(a_j * xi_p)|^2 * dtheta
    integrand = np.zeros((len(scales), len(probes)))
    for theta in scale_quad.angles:
        M = qft_forward(rotated_mother(w, theta))
        mod = M.modulus()
        peak = mod.max()
        if peak > 0:
            off = max(np.abs(M.data[..., 1]).max(), np.abs(M.data[..., 3]).max())
            commute_metric = max(commute_metric, off / peak)
        plane = ndimage.spline_filter(mod**2, order=3, mode="constant")
        for p, xi in enumerate(probes):
            px = scales * xi[0]
            py = scales * xi[1]
            ix = (px - M.grid.x0) / M.grid.dx
            iy = (py - M.grid.y0) / M.grid.dy
            vals = ndimage.map_coordinates(
                plane, np.stack([ix, iy]), order=3, prefilter=False,
                mode="constant", cval=0.0,
            )
            integrand[:, p] += np.maximum(vals, 0.0) * dtheta

    per_probe = (integrand * dlna[:, None]).sum(axis=0)
    if np.any(per_probe <= 0) or not np.all(np.isfinite(per_probe)):
        raise AdmissibilityError("admissibility integral is not positive and finite")

    # small-scale tail: a nonzero DC value keeps the integrand flat as a -> 0,
    # which diverges against a^-1 da.  Integrable tails fall off like a
    # positive power, so the lowest decade must sit well below the next one.
    dec1 = scales <= scales[0] * 10.0
    dec2 = (scales > scales[0] * 10.0) & (scales <= scales[0] * 100.0)
    tail1 = integrand[dec1].mean(axis=0)
    tail2 = integrand[dec2].mean(axis=0)
    peak_g = integrand.max(axis=0)
    flat = tail1 > 0.3 * np.maximum(tail2, 1e-300)
    negligible = tail1 <= 1e-12 * peak_g
    if np.any(flat & ~negligible):
        raise AdmissibilityError(
            "admissibility integral diverges at small scales "
            "(spectrum does not vanish at zero frequency)"
        )

    mean = float(per_probe.mean())
    spread = float((per_probe.max() - per_probe.min()) / mean)
    if spread > spread_tol:
        raise XiDependenceError(
            f"admissibility constant varies with probe direction "
            f"(spread {spread:.3g} > {spread_tol})"
        )
    if set_fields:
        w.c_phi = mean
        w.c_phi_spread = spread
        w.commutes_with_e2 = bool(commute_metric <= COMMUTE_TOL)
    return mean


def daughter(w: QWavelet, a: float, theta: float, b=(0.0, 0.0)) -> QSignal2D:
    """Dilated, rotated, translated copy (1/a) phi(r_{-theta}((x-b)/a))."""
    return resample_similitude(w.mother, a, theta, b)


def daughter_spectrum(w: QWavelet, a: float, theta: float, b=(0.0, 0.0)) -> QSpectrum2D:
    """Daughter transform assembled in the frequency domain.

    a * exp(-2 pi xi1 b1 e1) F{phi(r_{-theta} .)}(a xi) exp(-2 pi xi2 b2 e2),
    with the rotated-mother spectrum sampled at a*xi by cubic interpolation.
    """
    if a <= 0:
        raise ValueError("dilation parameter a must be positive")
    M = qft_forward(rotated_mother(w, theta))
    U1, U2 = M.grid.mesh()
    ix = (a * U1 - M.grid.x0) / M.grid.dx
    iy = (a * U2 - M.grid.y0) / M.grid.dy
    coords = np.stack([ix, iy])
    out = np.empty_like(M.data)
    for k in range(4):
        out[..., k] = ndimage.map_coordinates(
            M.data[..., k], coords, order=3, mode="constant", cval=0.0
        )
    out *= a

    ph1 = 2.0 * np.pi * U1 * b[0]
    left = np.zeros_like(out)
    left[..., 0] = np.cos(ph1)
    left[..., 1] = -np.sin(ph1)
    ph2 = 2.0 * np.pi * U2 * b[1]
    right = np.zeros_like(out)
    right[..., 0] = np.cos(ph2)
    right[..., 2] = -np.sin(ph2)
    return QSpectrum2D(M.grid, qmul(left, qmul(out, right)), M.space_grid)


def aqw_inner_product(w1: QWavelet, w2: QWavelet) -> Quaternion:
    """Frequency-domain inner product weighted by |xi|^-2.

    The zero-frequency bin is excluded; admissible wavelets vanish there,
    and a non-vanishing DC value is rejected because the weight makes the
    integral meaningless.
    """
    F1, F2 = w1.spectrum, w2.spectrum
    if F1.grid != F2.grid:
        raise ValueError("wavelets must share a frequency grid")
    U1, U2 = F1.grid.mesh()
    r2 = U1**2 + U2**2
    zero = r2 == 0.0
    for F in (F1, F2):
        peak = F.modulus().max()
        if F.modulus()[zero].max(initial=0.0) > 1e-8 * peak:
            raise ValueError("wavelet spectrum does not vanish at zero frequency")
    weight = np.where(zero, 0.0, 1.0 / np.where(zero, 1.0, r2))
    prod = qmul(F1.data, qconj(F2.data)) * weight[..., None]
    return Quaternion.from_array(prod.sum(axis=(0, 1)) * F1.grid.cell_area)
