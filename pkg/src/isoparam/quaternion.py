"""Quaternion arithmetic.

Quaternions are stored as float arrays whose last axis has length 4,
ordered ``(w, x, y, z)`` for ``w + x i + y j + z k``.  All array functions
broadcast over leading axes.  :class:`Quaternion` is a small value type for
single quaternions built on the same functions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

UNIT_TOL = 1e-10
RENORM_TOL = 1e-12

_CONJ = np.array([1.0, -1.0, -1.0, -1.0])

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])
IMAGINARY_UNITS = np.stack([I, J, K])


def qmul(p, q):
    """Hamilton product ``p q``, broadcasting over leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, px, py, pz = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    qw, qx, qy, qz = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )


def qconj(q):
    return np.asarray(q, dtype=float) * _CONJ


def qnorm2(q):
    q = np.asarray(q, dtype=float)
    return np.sum(q * q, axis=-1)


def qnorm(q):
    return np.sqrt(qnorm2(q))


def qreal(q):
    return np.asarray(q, dtype=float)[..., 0]


def qimag(q):
    """Imaginary part ``q - Re(q)``, still as a 4-vector."""
    out = np.array(q, dtype=float, copy=True)
    out[..., 0] = 0.0
    return out


def qinner(p, q):
    """Euclidean inner product ``Re(p conj(q))``."""
    return np.sum(np.asarray(p, dtype=float) * np.asarray(q, dtype=float), axis=-1)


def qinv(q):
    q = np.asarray(q, dtype=float)
    n2 = qnorm2(q)
    if np.any(n2 == 0.0):
        raise DomainError("zero quaternion has no inverse")
    return qconj(q) / n2[..., None]


def renormalize(q, tol=RENORM_TOL):
    """Rescale unit quaternions whose norm has drifted by more than `tol`."""
    q = np.array(q, dtype=float, copy=True)
    n = qnorm(q)
    drift = np.abs(n - 1.0) > tol
    if np.any(drift):
        q[drift] = q[drift] / n[drift][..., None]
    return q


def check_unit(q, tol=UNIT_TOL, name="q"):
    n = qnorm(q)
    if np.any(np.abs(n - 1.0) > tol):
        raise DomainError(f"{name} must be a unit quaternion (|{name}| = {np.max(n)!r})")


def qexp(v):
    """Exponential of a purely imaginary quaternion ``v``."""
    v = np.asarray(v, dtype=float)
    theta = qnorm(qimag(v))
    out = np.zeros(v.shape)
    out[..., 0] = np.cos(theta)
    # sinc(theta/pi) = sin(theta)/theta, finite at 0
    s = np.sinc(theta / np.pi)
    out[..., 1:] = v[..., 1:] * s[..., None]
    return out


def rotate(q, v):
    """Rotate the imaginary quaternion `v` by the unit quaternion `q`: ``q v conj(q)``.

    The real part of the result is set to zero exactly.
    """
    check_unit(q)
    v = np.asarray(v, dtype=float)
    if np.any(np.abs(qreal(v)) > UNIT_TOL):
        raise DomainError("rotate expects an imaginary quaternion")
    out = qmul(qmul(q, v), qconj(q))
    out[..., 0] = 0.0
    return out


def rotation_matrix(q):
    """The 3x3 matrix of ``x -> q x conj(q)`` on Im(H) in the basis (i, j, k)."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    return np.stack(
        [
            np.stack([w * w + x * x - y * y - z * z, 2 * (x * y - w * z), 2 * (x * z + w * y)], -1),
            np.stack([2 * (x * y + w * z), w * w - x * x + y * y - z * z, 2 * (y * z - w * x)], -1),
            np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), w * w - x * x - y * y + z * z], -1),
        ],
        axis=-2,
    )


def rotation_between(u, v):
    """Unit quaternion ``q`` with ``q u conj(q)`` parallel to ``v``.

    `u` and `v` are nonzero 3-vectors (imaginary parts).  The shortest-arc
    rotation is returned; antiparallel inputs rotate by pi about an axis
    orthogonal to `u`.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    c = float(np.dot(u, v))
    if c < -1.0 + 1e-12:
        axis = np.cross(u, [1.0, 0.0, 0.0])
        if np.linalg.norm(axis) < 1e-6:
            axis = np.cross(u, [0.0, 1.0, 0.0])
        axis /= np.linalg.norm(axis)
        return np.concatenate([[0.0], axis])
    q = np.concatenate([[1.0 + c], np.cross(u, v)])
    return q / np.linalg.norm(q)


@dataclass(frozen=True)
class Quaternion:
    """A single quaternion ``w + x i + y j + z k``."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, arr) -> "Quaternion":
        w, x, y, z = (float(c) for c in np.asarray(arr, dtype=float).reshape(4))
        return cls(w, x, y, z)

    @property
    def array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    @property
    def real(self) -> float:
        return self.w

    @property
    def imag(self) -> "Quaternion":
        return Quaternion(0.0, self.x, self.y, self.z)

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm2(self) -> float:
        return float(qnorm2(self.array))

    def norm(self) -> float:
        return float(qnorm(self.array))

    def normalized(self) -> "Quaternion":
        n = self.norm()
        if n == 0.0:
            raise DomainError("cannot normalize the zero quaternion")
        return Quaternion.from_array(self.array / n)

    def inverse(self) -> "Quaternion":
        return Quaternion.from_array(qinv(self.array))

    def rotate(self, v: "Quaternion") -> "Quaternion":
        return Quaternion.from_array(rotate(self.array, _as_array(v)))

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion.from_array(qmul(self.array, other.array))
        if np.isscalar(other):
            return Quaternion.from_array(self.array * other)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return Quaternion.from_array(self.array * other)
        return NotImplemented

    def __truediv__(self, other):
        if np.isscalar(other):
            return Quaternion.from_array(self.array / other)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion.from_array(self.array + other.array)
        if np.isscalar(other):
            return Quaternion(self.w + other, self.x, self.y, self.z)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion.from_array(self.array - other.array)
        if np.isscalar(other):
            return Quaternion(self.w - other, self.x, self.y, self.z)
        return NotImplemented

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def isclose(self, other: "Quaternion", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.array, _as_array(other), atol=atol, rtol=0.0))


def _as_array(q):
    if isinstance(q, Quaternion):
        return q.array
    return np.asarray(q, dtype=float)
