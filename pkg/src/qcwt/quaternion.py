"""Quaternion arithmetic with Hamilton's multiplication rules.

Quaternions are stored as four float64 components along the basis
e0, e1, e2, e3 with e1^2 = e2^2 = -1, e1 e2 = e3 = -e2 e1.  The module
provides both a scalar ``Quaternion`` class and vectorized routines that
act on numpy arrays whose last axis has length 4.  All downstream signal
code works on the array form; the class is a convenience wrapper with the
same semantics.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Quaternion",
    "qmul",
    "qconj",
    "qmodulus",
    "qmodulus_sq",
    "qinverse",
    "quat_mul",
    "quat_conj",
    "quat_modulus",
    "quat_inverse",
    "e0",
    "e1",
    "e2",
    "e3",
]


def qmul(p, q):
    """Hamilton product of quaternion arrays, broadcast over leading axes.

    Parameters
    ----------
    p, q : array_like, shape (..., 4)
        Left and right factors.  Order matters: the product is not
        commutative.

    Returns
    -------
    ndarray, shape (..., 4)
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p0, p1, p2, p3 = np.moveaxis(p, -1, 0)
    q0, q1, q2, q3 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
            p1 * q0 + p0 * q1 - p3 * q2 + p2 * q3,
            p2 * q0 + p3 * q1 + p0 * q2 - p1 * q3,
            p3 * q0 - p2 * q1 + p1 * q2 + p0 * q3,
        ],
        axis=-1,
    )


def qconj(q):
    """Quaternion conjugate: negates the e1, e2, e3 components."""
    q = np.asarray(q, dtype=float)
    out = q.copy()
    out[..., 1:] *= -1.0
    return out


def qmodulus_sq(q):
    """Squared modulus, summed over the component axis."""
    q = np.asarray(q, dtype=float)
    return np.einsum("...k,...k->...", q, q)


def qmodulus(q):
    """Modulus sqrt(q0^2 + q1^2 + q2^2 + q3^2)."""
    return np.sqrt(qmodulus_sq(q))


def qinverse(q):
    """Multiplicative inverse conj(q) / |q|^2.

    Raises
    ------
    ZeroDivisionError
        If any quaternion in the array is zero.
    """
    q = np.asarray(q, dtype=float)
    m2 = qmodulus_sq(q)
    if np.any(m2 == 0.0):
        raise ZeroDivisionError("zero quaternion has no inverse")
    return qconj(q) / m2[..., None]


class Quaternion:
    """A single quaternion q0 + q1 e1 + q2 e2 + q3 e3.

    Supports +, -, * (Hamilton product, also with real scalars),
    conjugate, modulus and inverse.  Backed by a length-4 float array.
    """

    __slots__ = ("components",)

    def __init__(self, q0=0.0, q1=0.0, q2=0.0, q3=0.0):
        self.components = np.array([q0, q1, q2, q3], dtype=float)

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=float).reshape(4)
        q = cls.__new__(cls)
        q.components = arr.copy()
        return q

    @property
    def q0(self):
        return float(self.components[0])

    @property
    def q1(self):
        return float(self.components[1])

    @property
    def q2(self):
        return float(self.components[2])

    @property
    def q3(self):
        return float(self.components[3])

    def conjugate(self):
        return Quaternion.from_array(qconj(self.components))

    def modulus(self):
        return float(qmodulus(self.components))

    def inverse(self):
        return Quaternion.from_array(qinverse(self.components))

    def scalar_part(self):
        return self.q0

    def vector_part(self):
        return self.components[1:].copy()

    def __add__(self, other):
        other = _coerce(other)
        return Quaternion.from_array(self.components + other.components)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        return Quaternion.from_array(self.components - other.components)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __neg__(self):
        return Quaternion.from_array(-self.components)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion.from_array(self.components * other)
        other = _coerce(other)
        return Quaternion.from_array(qmul(self.components, other.components))

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion.from_array(self.components * other)
        return _coerce(other) * self

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion.from_array(self.components / other)
        return self * _coerce(other).inverse()

    def __abs__(self):
        return self.modulus()

    def __eq__(self, other):
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return bool(np.array_equal(self.components, other.components))

    def __hash__(self):
        return hash(self.components.tobytes())

    def allclose(self, other, rtol=1e-12, atol=1e-15):
        other = _coerce(other)
        return bool(
            np.allclose(self.components, other.components, rtol=rtol, atol=atol)
        )

    def __repr__(self):
        c = self.components
        return f"Quaternion({c[0]:g}, {c[1]:g}, {c[2]:g}, {c[3]:g})"


def _coerce(value):
    if isinstance(value, Quaternion):
        return value
    if isinstance(value, (int, float)):
        return Quaternion(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return Quaternion.from_array(np.asarray(value))
    raise TypeError(f"cannot interpret {value!r} as a quaternion")


def quat_mul(p: Quaternion, q: Quaternion) -> Quaternion:
    """Hamilton product of two quaternions (non-commutative)."""
    return _coerce(p) * _coerce(q)


def quat_conj(q: Quaternion) -> Quaternion:
    """Conjugate; a linear anti-involution: conj(pq) = conj(q) conj(p)."""
    return _coerce(q).conjugate()


def quat_modulus(q: Quaternion) -> float:
    """Modulus; multiplicative: |pq| = |p| |q|."""
    return _coerce(q).modulus()


def quat_inverse(q: Quaternion) -> Quaternion:
    """Inverse conj(q)/|q|^2.  Raises ZeroDivisionError for q = 0."""
    return _coerce(q).inverse()


e0 = Quaternion(1.0, 0.0, 0.0, 0.0)
e1 = Quaternion(0.0, 1.0, 0.0, 0.0)
e2 = Quaternion(0.0, 0.0, 1.0, 0.0)
e3 = Quaternion(0.0, 0.0, 0.0, 1.0)
