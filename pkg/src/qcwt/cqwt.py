"""Continuous quaternion wavelet transform over similitude parameters.

A scalogram collects the inner products of a signal with every daughter
wavelet indexed by (scale, angle, translation).  Three evaluation routes
are provided:

* cqwt_direct   - explicit inner products (the reference; guarded size)
* _cqwt_correlation - the same sums evaluated as zero-padded FFT
  correlations (exact to rounding, any size)
* cqwt_fast     - the spectral route: per (scale, angle) one spectral
  product with conj(fhat), one inverse QFT and a conjugate/reflection.
  Valid when the rotated wavelet spectra commute with e2 and fhat takes
  values in R + R e2; otherwise it falls back to the correlation route
  and flags the result.

The Haar quadrature weight at (a_j, theta_k) is sim.weights[j, k]
(approximating a^-3 da dtheta) and the translation weight is the grid
cell area.
"""

from __future__ import annotations

import csv
import os
import struct
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .quaternion import Quaternion, qconj, qmodulus_sq, qmul
from .qft import QSpectrum2D, qft_forward, qft_inverse
from .signal import (
    Grid2D,
    GridMismatchError,
    QSignal2D,
    SimGrid,
    inner_product,
    l2_norm,
    sample_field,
)
from .wavelet import QWavelet, daughter

__all__ = [
    "Scalogram",
    "cqwt_direct",
    "cqwt_fast",
    "cqwt_inverse",
    "cqwt_roundtrip",
    "reproducing_kernel_check",
    "parseval_check",
    "lp_bound_check",
    "read_qcw",
    "write_qcw",
    "export_csv",
    "QCWFormatError",
]

DIRECT_MAX_COEFFICIENTS = 100_000
HYPOTHESIS_TOL = 1e-8
QCW_MAGIC = b"QCW1"


class QCWFormatError(ValueError):
    """Malformed or truncated QCW file."""


@dataclass
class Scalogram:
    """CQWT coefficients indexed (scale, angle, b-row, b-col)."""

    sim: SimGrid
    coeffs: np.ndarray
    source_norm: float
    energy_deficit: float = None
    used_fallback: bool = False

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        expected = (self.sim.n_scales, self.sim.n_angles, self.sim.grid.n1, self.sim.grid.n2, 4)
        if self.coeffs.shape != expected:
            raise ValueError(f"coefficient shape {self.coeffs.shape} != {expected}")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("scalogram contains non-finite coefficients")

    def modulus(self):
        return np.sqrt(qmodulus_sq(self.coeffs))

    def max_modulus(self) -> float:
        return float(self.modulus().max())

    def norm_sq(self) -> float:
        """Squared L2 norm over the similitude quadrature."""
        m2 = qmodulus_sq(self.coeffs).sum(axis=(2, 3)) * self.sim.grid.cell_area
        return float((m2 * self.sim.weights).sum())

    def lp_norm(self, p) -> float:
        """Haar-weighted p-norm; p = inf gives the sup of the modulus."""
        if p == np.inf:
            return self.max_modulus()
        mp = (qmodulus_sq(self.coeffs) ** (p / 2.0)).sum(axis=(2, 3)) * self.sim.grid.cell_area
        return float(((mp * self.sim.weights).sum()) ** (1.0 / p))

    def slice(self, j, k) -> QSignal2D:
        """The translation field at one (scale, angle) pair."""
        return QSignal2D(self.sim.grid, self.coeffs[j, k])


def _worker_count():
    try:
        return max(1, int(os.environ.get("QCWT_THREADS", "1")))
    except ValueError:
        return 1


def _daughter_lattice(w: QWavelet, a: float, theta: float, grid: Grid2D):
    """Daughter values on the offset lattice {(i - k) dx} x {(j - l) dy}.

    The lattice covers every offset x - b that a grid-to-grid correlation
    can request, sampled with the same bilinear rule as the resampler.
    """
    ox = grid.dx * (np.arange(2 * grid.n1 - 1) - (grid.n1 - 1))
    oy = grid.dy * (np.arange(2 * grid.n2 - 1) - (grid.n2 - 1))
    OX, OY = np.meshgrid(ox, oy, indexing="ij")
    px, py = OX / a, OY / a
    c, s = np.cos(theta), np.sin(theta)
    return sample_field(w.mother, c * px + s * py, -s * px + c * py) / a


def _lattice_center_block(lattice, grid: Grid2D):
    """Daughter at b = 0 restricted to the grid (the lattice's aligned block)."""
    r0 = grid.n1 - 1 - grid.n1 // 2
    c0 = grid.n2 - 1 - grid.n2 // 2
    return lattice[r0 : r0 + grid.n1, c0 : c0 + grid.n2]


def _planes(data):
    """Split into the two e1-complex planes: q = A + B e2."""
    return data[..., 0] + 1j * data[..., 1], data[..., 2] + 1j * data[..., 3]


def _from_planes(A, B):
    return np.stack([A.real, A.imag, B.real, B.imag], axis=-1)


def _lagged(u, V):
    """sum_x u(x) V(x - b) for complex grid array u and lattice array V."""
    n1 = u.shape[0]
    n2 = u.shape[1]
    full = fftconvolve(u, V[::-1, ::-1], mode="full")
    return full[n1 - 1 : 2 * n1 - 1, n2 - 1 : 2 * n2 - 1]


def _conv(T, V):
    """sum_b T(b) V(t - b) for complex grid array T and lattice array V."""
    n1 = T.shape[0]
    n2 = T.shape[1]
    full = fftconvolve(T, V, mode="full")
    return full[n1 - 1 : 2 * n1 - 1, n2 - 1 : 2 * n2 - 1]


def _correlate_slice(f_data, lattice, cell_area):
    """T(b) = cell_area * sum_x f(x) conj(K(x - b)) with K on the lattice."""
    fa, fb = _planes(f_data)
    Ka, Kb = _planes(lattice)
    Ta = _lagged(fa, np.conj(Ka)) + _lagged(fb, np.conj(Kb))
    Tb = _lagged(fb, Ka) - _lagged(fa, Kb)
    return _from_planes(Ta, Tb) * cell_area


def _synthesize_slice(T_data, lattice, cell_area):
    """S(t) = cell_area * sum_b T(b) K(t - b), keeping T on the left."""
    Ta, Tb = _planes(T_data)
    Ka, Kb = _planes(lattice)
    Sa = _conv(Ta, Ka) - _conv(Tb, np.conj(Kb))
    Sb = _conv(Ta, Kb) + _conv(Tb, np.conj(Ka))
    return _from_planes(Sa, Sb) * cell_area


def _check_shared_geometry(f: QSignal2D, w: QWavelet, sim: SimGrid):
    if f.grid != w.grid or f.grid != sim.grid:
        raise GridMismatchError("signal, wavelet and translation grids must coincide")


def cqwt_direct(f: QSignal2D, w: QWavelet, sim: SimGrid) -> Scalogram:
    """Reference transform: explicit inner products with every daughter.

    O(n_scales * n_angles * N^2 * N^2); guarded to small problems.
    """
    _check_shared_geometry(f, w, sim)
    if sim.n_coefficients > DIRECT_MAX_COEFFICIENTS:
        raise ValueError(
            f"direct evaluation limited to {DIRECT_MAX_COEFFICIENTS} coefficients, "
            f"requested {sim.n_coefficients}"
        )
    g = sim.grid
    out = np.zeros((sim.n_scales, sim.n_angles, g.n1, g.n2, 4))
    for j, a in enumerate(sim.scales):
        for k, theta in enumerate(sim.angles):
            lattice = _daughter_lattice(w, a, theta, g)
            conj_lat = qconj(lattice)
            for bi in range(g.n1):
                for bj in range(g.n2):
                    win = conj_lat[g.n1 - 1 - bi : 2 * g.n1 - 1 - bi,
                                   g.n2 - 1 - bj : 2 * g.n2 - 1 - bj]
                    out[j, k, bi, bj] = qmul(f.data, win).sum(axis=(0, 1))
    out *= g.cell_area
    return Scalogram(sim, out, l2_norm(f))


def _cqwt_correlation(f: QSignal2D, w: QWavelet, sim: SimGrid) -> Scalogram:
    """Same sums as cqwt_direct, evaluated by zero-padded FFT correlation."""
    _check_shared_geometry(f, w, sim)
    g = sim.grid
    out = np.zeros((sim.n_scales, sim.n_angles, g.n1, g.n2, 4))

    def work(jk):
        j, k = jk
        lattice = _daughter_lattice(w, sim.scales[j], sim.angles[k], g)
        out[j, k] = _correlate_slice(f.data, lattice, g.cell_area)

    pairs = [(j, k) for j in range(sim.n_scales) for k in range(sim.n_angles)]
    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, pairs))
    else:
        for jk in pairs:
            work(jk)
    return Scalogram(sim, out, l2_norm(f))


def _reflect(data, grid: Grid2D):
    """g(b) -> g(-b) on a centered grid; the unpaired edge row/column is zeroed."""
    h1, h2 = grid.n1 // 2, grid.n2 // 2
    src1 = 2 * h1 - np.arange(grid.n1)
    src2 = 2 * h2 - np.arange(grid.n2)
    v1 = (src1 >= 0) & (src1 < grid.n1)
    v2 = (src2 >= 0) & (src2 < grid.n2)
    out = np.zeros_like(data)
    out[np.ix_(np.flatnonzero(v1), np.flatnonzero(v2))] = data[np.ix_(src1[v1], src2[v2])]
    return out


def _fast_hypotheses_ok(f_hat: QSpectrum2D, w: QWavelet):
    if w.commutes_with_e2 is not True:
        return False, "wavelet spectrum is not flagged as commuting with e2"
    peak = f_hat.modulus().max()
    if peak == 0.0:
        return True, ""
    off = max(np.abs(f_hat.data[..., 1]).max(), np.abs(f_hat.data[..., 3]).max())
    if off > HYPOTHESIS_TOL * peak:
        return False, "signal spectrum has e1/e3 components beyond tolerance"
    return True, ""


def cqwt_fast(f: QSignal2D, w: QWavelet, sim: SimGrid) -> Scalogram:
    """Spectral evaluation of the transform on the whole translation grid.

    Per (scale, angle): one QFT of the daughter at b = 0, one pointwise
    product with conj(fhat), one inverse QFT, then a conjugation and
    b -> -b reflection recover the coefficients.  Falls back to the
    correlation route (with a warning and used_fallback=True) when the
    hypotheses do not hold.
    """
    _check_shared_geometry(f, w, sim)
    f_hat = qft_forward(f)
    ok, why = _fast_hypotheses_ok(f_hat, w)
    if not ok or not sim.grid.is_centered():
        reason = why or "translation grid is not centered"
        warnings.warn(f"cqwt_fast hypotheses violated ({reason}); using direct evaluation")
        S = _cqwt_correlation(f, w, sim)
        S.used_fallback = True
        S.energy_deficit = _energy_deficit(f_hat, w, sim)
        return S

    g = sim.grid
    conj_fhat = qconj(f_hat.data)
    out = np.zeros((sim.n_scales, sim.n_angles, g.n1, g.n2, 4))
    coverage = np.zeros((g.n1, g.n2))

    def work(jk):
        j, k = jk
        dght = daughter(w, sim.scales[j], sim.angles[k], (0.0, 0.0))
        D = qft_forward(dght)
        P = QSpectrum2D(D.grid, qmul(D.data, conj_fhat), g)
        ginv = qft_inverse(P)
        out[j, k] = qconj(_reflect(ginv.data, g))
        return sim.weights[j, k] * qmodulus_sq(D.data)

    pairs = [(j, k) for j in range(sim.n_scales) for k in range(sim.n_angles)]
    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for cov in pool.map(work, pairs):
                coverage += cov
    else:
        for jk in pairs:
            coverage += work(jk)

    S = Scalogram(sim, out, l2_norm(f))
    if w.c_phi:
        m2 = qmodulus_sq(f_hat.data)
        total = m2.sum()
        if total > 0:
            S.energy_deficit = float(1.0 - (coverage * m2).sum() / (w.c_phi * total))
    return S


def _energy_deficit(f_hat: QSpectrum2D, w: QWavelet, sim: SimGrid):
    """Fraction of signal energy outside the scale/angle coverage of sim."""
    if not w.c_phi:
        return None
    coverage = np.zeros((sim.grid.n1, sim.grid.n2))
    for j, a in enumerate(sim.scales):
        for k, theta in enumerate(sim.angles):
            D = qft_forward(daughter(w, a, theta, (0.0, 0.0)))
            coverage += sim.weights[j, k] * qmodulus_sq(D.data)
    m2 = qmodulus_sq(f_hat.data)
    total = m2.sum()
    if total == 0:
        return 0.0
    return float(1.0 - (coverage * m2).sum() / (w.c_phi * total))


def cqwt_inverse(S: Scalogram, w: QWavelet, reference: QSignal2D = None):
    """Haar-weighted synthesis: f(t) = (1/C) sum T(a,theta,b) phi_{a,theta,b}(t).

    Returns (signal, info); info carries the reconstructed-to-source norm
    ratio and, when a reference signal is supplied, the relative L2 error.
    """
    if not w.c_phi:
        raise ValueError("wavelet admissibility constant is not set; run admissibility_constant first")
    g = S.sim.grid
    acc = np.zeros((g.n1, g.n2, 4))
    for j, a in enumerate(S.sim.scales):
        for k, theta in enumerate(S.sim.angles):
            lattice = _daughter_lattice(w, a, theta, g)
            acc += S.sim.weights[j, k] * _synthesize_slice(S.coeffs[j, k], lattice, g.cell_area)
    rec = QSignal2D(g, acc / w.c_phi)
    info = {"norm_ratio": l2_norm(rec) / S.source_norm if S.source_norm else np.inf,
            "energy_deficit": S.energy_deficit}
    if reference is not None:
        diff = rec.data - reference.data
        ref_norm = l2_norm(reference)
        info["rel_l2_error"] = float(
            np.sqrt(qmodulus_sq(diff).sum() * g.cell_area) / ref_norm
        )
    return rec, info


def cqwt_roundtrip(f: QSignal2D, w: QWavelet, sim: SimGrid):
    """Analysis followed by synthesis without storing the scalogram.

    Streams one (scale, angle) pair at a time so large similitude grids
    stay within memory.  Requires the fast-path hypotheses.  Returns
    (reconstruction, relative L2 error).
    """
    _check_shared_geometry(f, w, sim)
    if not w.c_phi:
        raise ValueError("wavelet admissibility constant is not set")
    f_hat = qft_forward(f)
    ok, why = _fast_hypotheses_ok(f_hat, w)
    if not ok or not sim.grid.is_centered():
        raise ValueError(f"fast-path hypotheses violated: {why or 'grid not centered'}")
    g = sim.grid
    conj_fhat = qconj(f_hat.data)
    acc = np.zeros((g.n1, g.n2, 4))

    def work(jk):
        j, k = jk
        lattice = _daughter_lattice(w, sim.scales[j], sim.angles[k], g)
        block = _lattice_center_block(lattice, g)
        D = qft_forward(QSignal2D(g, block))
        P = QSpectrum2D(D.grid, qmul(D.data, conj_fhat), g)
        T = qconj(_reflect(qft_inverse(P).data, g))
        return sim.weights[j, k] * _synthesize_slice(T, lattice, g.cell_area)

    pairs = [(j, k) for j in range(sim.n_scales) for k in range(sim.n_angles)]
    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for term in pool.map(work, pairs):
                acc += term
    else:
        for jk in pairs:
            acc += work(jk)
    rec = QSignal2D(g, acc / w.c_phi)
    err = float(np.sqrt(qmodulus_sq(rec.data - f.data).sum() * g.cell_area) / l2_norm(f))
    return rec, err


def reproducing_kernel_check(S: Scalogram, w: QWavelet, sample_points) -> float:
    """Max relative residual of the reproducing-kernel identity.

    For each (a', theta', b') the coefficient is re-derived from the whole
    scalogram through the daughter-daughter inner products and compared
    with the stored value.
    """
    if not w.c_phi:
        raise ValueError("wavelet admissibility constant is not set")
    g = S.sim.grid
    scale_mod = S.max_modulus()
    worst = 0.0
    for (ap, thetap, bp) in sample_points:
        psi = daughter(w, ap, thetap, bp)
        Ca, Cb = _planes(qconj(psi.data))
        rhs = np.zeros(4)
        for j, a in enumerate(S.sim.scales):
            for k, theta in enumerate(S.sim.angles):
                lattice = _daughter_lattice(w, a, theta, g)
                Ka, Kb = _planes(lattice)
                Ga = _lagged(Ca, Ka) - _lagged(np.conj(Cb), Kb)
                Gb = _lagged(Cb, Ka) + _lagged(np.conj(Ca), Kb)
                G = _from_planes(Ga, Gb) * g.cell_area
                rhs += S.sim.weights[j, k] * (
                    qmul(S.coeffs[j, k], G).sum(axis=(0, 1)) * g.cell_area
                )
        rhs /= w.c_phi
        lhs = _coefficient_at(S, ap, thetap, bp)
        denom = max(float(np.sqrt((lhs**2).sum())), 0.05 * scale_mod)
        worst = max(worst, float(np.sqrt(((lhs - rhs) ** 2).sum())) / denom)
    return worst


def _coefficient_at(S: Scalogram, a, theta, b):
    j = int(np.argmin(np.abs(S.sim.scales - a)))
    k = int(np.argmin(np.abs(((S.sim.angles - theta + np.pi) % (2 * np.pi)) - np.pi)))
    bi = int(round((b[0] - S.sim.grid.x0) / S.sim.grid.dx))
    bj = int(round((b[1] - S.sim.grid.y0) / S.sim.grid.dy))
    return S.coeffs[j, k, bi, bj]


def parseval_check(f: QSignal2D, g: QSignal2D, w: QWavelet, sim: SimGrid):
    """Both sides of <T f, T g> = C (f, g), computed independently.

    Left: quaternion inner product of the two scalograms over the
    similitude quadrature.  Right: C_phi times the plane inner product.
    """
    Sf = cqwt_fast(f, w, sim)
    Sg = cqwt_fast(g, w, sim) if g is not f else Sf
    prod = qmul(Sf.coeffs, qconj(Sg.coeffs)).sum(axis=(2, 3)) * sim.grid.cell_area
    lhs = Quaternion.from_array((prod * sim.weights[..., None]).sum(axis=(0, 1)))
    rhs = Quaternion.from_array(w.c_phi * inner_product(f, g).components)
    return lhs, rhs


def lp_bound_check(S: Scalogram, w: QWavelet, p):
    """Scalogram p-norm versus C^(1/p) ||phi||^(1-2/p) ||f||."""
    if p != np.inf and p < 2:
        raise ValueError("bound requires p >= 2 or p = inf")
    if not w.c_phi:
        raise ValueError("wavelet admissibility constant is not set")
    lhs = S.lp_norm(p)
    if p == np.inf:
        rhs = w.l2_norm() * S.source_norm
    else:
        rhs = w.c_phi ** (1.0 / p) * w.l2_norm() ** (1.0 - 2.0 / p) * S.source_norm
    return lhs, rhs


def write_qcw(path, S: Scalogram):
    """QCW format: magic, counts, scale/angle/weight tables, grid, coefficients."""
    sim = S.sim
    g = sim.grid
    with open(path, "wb") as fh:
        fh.write(QCW_MAGIC)
        fh.write(struct.pack("<IIII", sim.n_scales, sim.n_angles, g.n1, g.n2))
        fh.write(sim.scales.astype("<f8").tobytes())
        fh.write(sim.angles.astype("<f8").tobytes())
        fh.write(np.ascontiguousarray(sim.weights).astype("<f8").tobytes())
        fh.write(struct.pack("<4d", g.x0, g.y0, g.dx, g.dy))
        fh.write(struct.pack("<d", S.source_norm))
        fh.write(np.ascontiguousarray(S.coeffs).astype("<f8").tobytes())


def read_qcw(path) -> Scalogram:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != QCW_MAGIC:
        raise QCWFormatError(f"bad magic {blob[:4]!r}, expected {QCW_MAGIC!r}")
    off = 4
    try:
        ns, na, n1, n2 = struct.unpack_from("<IIII", blob, off)
    except struct.error as exc:
        raise QCWFormatError("truncated header") from exc
    off += 16
    expected = off + 8 * (ns + na + ns * na) + 40 + 8 * ns * na * n1 * n2 * 4
    if len(blob) != expected:
        raise QCWFormatError(
            f"payload length mismatch: file has {len(blob)} bytes, header implies {expected}"
        )
    scales = np.frombuffer(blob, "<f8", ns, off).copy(); off += 8 * ns
    angles = np.frombuffer(blob, "<f8", na, off).copy(); off += 8 * na
    weights = np.frombuffer(blob, "<f8", ns * na, off).reshape(ns, na).copy(); off += 8 * ns * na
    x0, y0, dx, dy = struct.unpack_from("<4d", blob, off); off += 32
    (source_norm,) = struct.unpack_from("<d", blob, off); off += 8
    coeffs = np.frombuffer(blob, "<f8", ns * na * n1 * n2 * 4, off).reshape(ns, na, n1, n2, 4).copy()
    sim = SimGrid(scales, angles, Grid2D(n1, n2, x0, y0, dx, dy), weights)
    return Scalogram(sim, coeffs, source_norm)


def export_csv(S: Scalogram, path, a_index=None, theta_index=None):
    """Rows a, theta, b1, b2, q0..q3, modulus for the selected slices."""
    sim = S.sim
    js = range(sim.n_scales) if a_index is None else [a_index]
    ks = range(sim.n_angles) if theta_index is None else [theta_index]
    for j in js:
        if not 0 <= j < sim.n_scales:
            raise IndexError(f"scale index {j} out of range")
    for k in ks:
        if not 0 <= k < sim.n_angles:
            raise IndexError(f"angle index {k} out of range")
    bx = sim.grid.x
    by = sim.grid.y
    count = 0
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["a", "theta", "b1", "b2", "q0", "q1", "q2", "q3", "modulus"])
        for j in js:
            for k in ks:
                block = S.coeffs[j, k]
                mod = np.sqrt(qmodulus_sq(block))
                for bi in range(sim.grid.n1):
                    for bj in range(sim.grid.n2):
                        q = block[bi, bj]
                        wr.writerow(
                            [sim.scales[j], sim.angles[k], bx[bi], by[bj],
                             q[0], q[1], q[2], q[3], mod[bi, bj]]
                        )
                        count += 1
    return count
