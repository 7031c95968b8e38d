"""The compact symplectic group Sp(2) with left-invariant metrics.

Points are 2x2 quaternionic matrices stored as float arrays of shape
``(..., 2, 2, 4)``.  Tangent vectors are kept left-trivialized: the vector
``Q xi`` at ``Q`` is stored as the pair ``(Q, xi)`` with ``xi`` in the Lie
algebra sp(2) = {[[x, y], [-conj(y), z]] : Re x = Re z = 0}.

Algebra elements have two coordinate systems, both of length 10 and laid
out as ``(x_i, x_j, x_k, y_1, y_i, y_j, y_k, z_i, z_j, z_k)``:

* *raw* coordinates, the quaternion components themselves;
* *orthonormal* coordinates for a given :class:`MetricWeights`, obtained by
  scaling each block with ``sqrt(w)``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from . import quaternion as qt
from .errors import DomainError

SP2_TOL = 1e-10
DIM = 10

IDENTITY = np.zeros((2, 2, 4))
IDENTITY[0, 0, 0] = IDENTITY[1, 1, 0] = 1.0


# ----------------------------------------------------------------------------
# quaternionic matrix helpers


def qmatmul(A, B):
    """Product of quaternionic matrices of shapes ``(..., n, m, 4)`` and ``(..., m, p, 4)``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    return qt.qmul(A[..., :, :, None, :], B[..., None, :, :, :]).sum(axis=-3)


def qstar(A):
    """Quaternionic conjugate transpose."""
    return qt.qconj(np.swapaxes(np.asarray(A, dtype=float), -2, -3))


def to_complex(A):
    """Embed a quaternionic n x n matrix as a complex 2n x 2n matrix.

    Uses ``z1 + z2 j -> [[z1, z2], [-conj(z2), conj(z1)]]``, which is an
    algebra homomorphism.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[-2]
    z1 = A[..., 0] + 1j * A[..., 1]
    z2 = A[..., 2] + 1j * A[..., 3]
    out = np.zeros(A.shape[:-3] + (2 * n, 2 * n), dtype=complex)
    out[..., 0::2, 0::2] = z1
    out[..., 0::2, 1::2] = z2
    out[..., 1::2, 0::2] = -np.conj(z2)
    out[..., 1::2, 1::2] = np.conj(z1)
    return out


def from_complex(C):
    C = np.asarray(C)
    z1 = C[..., 0::2, 0::2]
    z2 = C[..., 0::2, 1::2]
    return np.stack([z1.real, z1.imag, z2.real, z2.imag], axis=-1)


def qexpm(A):
    """Matrix exponential of quaternionic matrices (batched)."""
    return from_complex(expm(to_complex(A)))


def orthogonality_residual(M):
    """``max |M M* - I|`` over the trailing matrix axes."""
    M = np.asarray(M, dtype=float)
    return np.abs(qmatmul(M, qstar(M)) - IDENTITY).max(axis=(-3, -2, -1))


# ----------------------------------------------------------------------------
# group elements and algebra elements


class Sp2Element:
    """A point (or a batch of points) of Sp(2).

    Parameters
    ----------
    matrix : array_like, shape (..., 2, 2, 4)
    check : bool
        Verify ``Q Q* = I`` within 1e-10.
    """

    def __init__(self, matrix, check: bool = True):
        m = np.array(matrix, dtype=float)
        if m.shape[-3:] != (2, 2, 4):
            raise DomainError(f"expected shape (..., 2, 2, 4), got {m.shape}")
        if check:
            res = np.max(orthogonality_residual(m))
            if res > SP2_TOL:
                raise DomainError(f"matrix is not in Sp(2): max|QQ*-I| = {res:.3e}")
        self.matrix = m

    @classmethod
    def identity(cls) -> "Sp2Element":
        return cls(IDENTITY.copy(), check=False)

    @classmethod
    def diag(cls, p, q) -> "Sp2Element":
        p = _qarray(p)
        q = _qarray(q)
        m = np.zeros(np.broadcast_shapes(p.shape, q.shape)[:-1] + (2, 2, 4))
        m[..., 0, 0, :] = p
        m[..., 1, 1, :] = q
        return cls(m)

    @property
    def batch_shape(self):
        return self.matrix.shape[:-3]

    a = property(lambda self: self.matrix[..., 0, 0, :])
    b = property(lambda self: self.matrix[..., 0, 1, :])
    c = property(lambda self: self.matrix[..., 1, 0, :])
    d = property(lambda self: self.matrix[..., 1, 1, :])

    def residual(self):
        return orthogonality_residual(self.matrix)

    def star(self) -> "Sp2Element":
        return Sp2Element(qstar(self.matrix), check=False)

    def __matmul__(self, other):
        if isinstance(other, Sp2Element):
            return Sp2Element(qmatmul(self.matrix, other.matrix), check=False)
        return NotImplemented

    def __len__(self):
        return self.matrix.shape[0] if self.matrix.ndim > 3 else 1

    def __getitem__(self, idx) -> "Sp2Element":
        if self.matrix.ndim == 3:
            raise TypeError("a single Sp2Element is not indexable")
        return Sp2Element(self.matrix[idx], check=False)

    def __repr__(self):
        return f"Sp2Element(batch_shape={self.batch_shape})"


class Sp2Algebra:
    """An element (or batch) of sp(2), stored as its quaternionic matrix."""

    def __init__(self, matrix):
        self.matrix = np.array(matrix, dtype=float)

    @classmethod
    def from_parts(cls, x, y, z) -> "Sp2Algebra":
        """Build ``[[x, y], [-conj(y), z]]``; real parts of `x` and `z` are dropped."""
        x = qt.qimag(_qarray(x))
        z = qt.qimag(_qarray(z))
        y = _qarray(y)
        shape = np.broadcast_shapes(x.shape, y.shape, z.shape)
        m = np.zeros(shape[:-1] + (2, 2, 4))
        m[..., 0, 0, :] = x
        m[..., 0, 1, :] = y
        m[..., 1, 0, :] = -qt.qconj(y)
        m[..., 1, 1, :] = z
        return cls(m)

    @classmethod
    def from_coords(cls, coords) -> "Sp2Algebra":
        c = np.asarray(coords, dtype=float)
        zero = np.zeros(c.shape[:-1] + (1,))
        x = np.concatenate([zero, c[..., 0:3]], axis=-1)
        z = np.concatenate([zero, c[..., 7:10]], axis=-1)
        return cls.from_parts(x, c[..., 3:7], z)

    @classmethod
    def project(cls, M) -> "Sp2Algebra":
        """Orthogonal projection of a quaternionic 2x2 matrix onto sp(2)."""
        M = np.asarray(M, dtype=float)
        y = 0.5 * (M[..., 0, 1, :] - qt.qconj(M[..., 1, 0, :]))
        return cls.from_parts(M[..., 0, 0, :], y, M[..., 1, 1, :])

    @classmethod
    def zeros(cls, batch_shape=()) -> "Sp2Algebra":
        return cls(np.zeros(tuple(batch_shape) + (2, 2, 4)))

    x = property(lambda self: self.matrix[..., 0, 0, :])
    y = property(lambda self: self.matrix[..., 0, 1, :])
    z = property(lambda self: self.matrix[..., 1, 1, :])

    @property
    def coords(self) -> np.ndarray:
        m = self.matrix
        return np.concatenate([m[..., 0, 0, 1:], m[..., 0, 1, :], m[..., 1, 1, 1:]], axis=-1)

    def bracket(self, other: "Sp2Algebra") -> "Sp2Algebra":
        return bracket(self, other)

    def __add__(self, other):
        return Sp2Algebra(self.matrix + other.matrix)

    def __sub__(self, other):
        return Sp2Algebra(self.matrix - other.matrix)

    def __neg__(self):
        return Sp2Algebra(-self.matrix)

    def __mul__(self, s):
        s = np.asarray(s, dtype=float)
        return Sp2Algebra(self.matrix * s[..., None, None, None])

    __rmul__ = __mul__

    def __truediv__(self, s):
        s = np.asarray(s, dtype=float)
        return Sp2Algebra(self.matrix / s[..., None, None, None])

    def __repr__(self):
        return f"Sp2Algebra(coords={np.array2string(self.coords, precision=4)})"


@dataclass
class Sp2Tangent:
    """Tangent vector ``base.matrix @ xi.matrix`` at `base`."""

    base: Sp2Element
    xi: Sp2Algebra

    @property
    def vector(self) -> np.ndarray:
        return qmatmul(self.base.matrix, self.xi.matrix)

    def norm(self, m: "MetricWeights | None" = None):
        m = m or STANDARD_METRIC
        return np.sqrt(m.inner(self.xi.coords, self.xi.coords))


def _qarray(q):
    if isinstance(q, qt.Quaternion):
        return q.array
    q = np.asarray(q, dtype=float)
    if q.ndim == 0:
        return np.array([float(q), 0.0, 0.0, 0.0])
    return q


def as_matrix(Q) -> np.ndarray:
    """Accept an :class:`Sp2Element` or a raw ``(..., 2, 2, 4)`` array."""
    if isinstance(Q, Sp2Element):
        return Q.matrix
    return np.asarray(Q, dtype=float)


def exp_algebra(xi: Sp2Algebra) -> Sp2Element:
    return Sp2Element(qexpm(xi.matrix), check=False)


def bracket(xi: Sp2Algebra, eta: Sp2Algebra) -> Sp2Algebra:
    """Matrix commutator ``[xi, eta]``, the bracket of the left-invariant fields."""
    m = qmatmul(xi.matrix, eta.matrix) - qmatmul(eta.matrix, xi.matrix)
    return Sp2Algebra.project(m)


# ----------------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class MetricWeights:
    """Left-invariant metric ``w_x |x|^2 + w_y |y|^2 + w_z |z|^2`` on sp(2)."""

    w_x: float = 1.0
    w_y: float = 1.0
    w_z: float = 1.0

    def __post_init__(self):
        if min(self.w_x, self.w_y, self.w_z) <= 0:
            raise DomainError(f"metric weights must be positive, got {self.as_tuple()}")

    def as_tuple(self):
        return (float(self.w_x), float(self.w_y), float(self.w_z))

    @property
    def diag(self) -> np.ndarray:
        return np.repeat(np.array(self.as_tuple()), [3, 4, 3])

    def inner(self, c1, c2):
        """Inner product of raw coordinate vectors."""
        return np.sum(self.diag * np.asarray(c1) * np.asarray(c2), axis=-1)

    def to_orthonormal(self, raw):
        return np.asarray(raw) * np.sqrt(self.diag)

    def from_orthonormal(self, on):
        return np.asarray(on) / np.sqrt(self.diag)

    def basis(self) -> Sp2Algebra:
        """The fixed orthonormal basis, as a batch of 10 algebra elements."""
        return Sp2Algebra.from_coords(np.diag(1.0 / np.sqrt(self.diag)))


STANDARD_METRIC = MetricWeights(1.0, 1.0, 1.0)
BIINVARIANT_METRIC = MetricWeights(1.0, 2.0, 1.0)


def inner(u: Sp2Tangent, v: Sp2Tangent, m: MetricWeights = STANDARD_METRIC):
    """Metric inner product of two tangent vectors at the same base point."""
    if np.max(np.abs(u.base.matrix - v.base.matrix)) > SP2_TOL:
        raise DomainError("tangent vectors have different base points")
    return m.inner(u.xi.coords, v.xi.coords)


@functools.lru_cache(maxsize=32)
def _structure(weights: tuple):
    m = MetricWeights(*weights)
    basis = m.basis()
    ei = Sp2Algebra(basis.matrix[:, None])
    ej = Sp2Algebra(basis.matrix[None, :])
    # [e_i, e_j] = C[i, j, k] e_k in orthonormal coordinates
    C = m.to_orthonormal(bracket(ei, ej).coords)
    # 2 <nabla_i e_j, e_k> = C_ijk - C_jki + C_kij
    gamma = 0.5 * (C - np.transpose(C, (2, 0, 1)) + np.transpose(C, (1, 2, 0)))
    C.setflags(write=False)
    gamma.setflags(write=False)
    return C, gamma


def structure_constants(m: MetricWeights = STANDARD_METRIC) -> np.ndarray:
    """``C[i, j, k] = <[e_i, e_j], e_k>`` for the orthonormal basis of `m`."""
    return _structure(m.as_tuple())[0]


def connection_coefficients(m: MetricWeights = STANDARD_METRIC) -> np.ndarray:
    """``G[i, j, k] = <nabla_{e_i} e_j, e_k>`` solved from the Koszul formula."""
    return _structure(m.as_tuple())[1]


def _levi_civita_on(c1, c2, m):
    return np.einsum("...i,...j,ijk->...k", c1, c2, connection_coefficients(m))


def levi_civita_left_invariant(xi: Sp2Algebra, eta: Sp2Algebra, m: MetricWeights = STANDARD_METRIC) -> Sp2Algebra:
    """``nabla_xi eta`` for the left-invariant extensions of `xi` and `eta`."""
    c = _levi_civita_on(m.to_orthonormal(xi.coords), m.to_orthonormal(eta.coords), m)
    return Sp2Algebra.from_coords(m.from_orthonormal(c))


def closed_form_connection(xi: Sp2Algebra, eta: Sp2Algebra) -> Sp2Algebra:
    """Levi-Civita connection of the weight-(1,1,1) metric in closed form.

    ``nabla_xi eta = [xi, eta]/2 + D(xi, eta)`` where D only has an
    off-diagonal block ``(y1 z2 + y2 z1 - x1 y2 - x2 y1) / 2``.
    """
    x1, y1, z1 = xi.x, xi.y, xi.z
    x2, y2, z2 = eta.x, eta.y, eta.z
    off = 0.5 * (qt.qmul(y1, z2) + qt.qmul(y2, z1) - qt.qmul(x1, y2) - qt.qmul(x2, y1))
    zero = np.zeros_like(off)
    return bracket(xi, eta) * 0.5 + Sp2Algebra.from_parts(zero, off, zero)


# ----------------------------------------------------------------------------
# retraction and sampling


def retract(M) -> Sp2Element:
    """Quaternionic Gram-Schmidt on the rows of `M`.

    Raises
    ------
    DomainError
        If the rows are (numerically) quaternionically dependent.
    """
    M = np.array(as_matrix(M), dtype=float)
    scale = np.sqrt(np.sum(M * M, axis=(-3, -2, -1)))
    r1 = M[..., 0, :, :]
    n1 = np.sqrt(np.sum(r1 * r1, axis=(-2, -1)))
    if np.any(n1 <= 1e-14 * np.maximum(scale, 1e-300)):
        raise DomainError("rank-deficient matrix: first row vanishes")
    r1 = r1 / n1[..., None, None]
    r2 = M[..., 1, :, :]
    for _ in range(2):  # second pass restores orthogonality lost to rounding
        c = qt.qmul(r2, qt.qconj(r1)).sum(axis=-2)
        r2 = r2 - qt.qmul(c[..., None, :], r1)
    n2 = np.sqrt(np.sum(r2 * r2, axis=(-2, -1)))
    if np.any(n2 <= 1e-12 * np.maximum(scale, 1e-300)):
        raise DomainError("rank-deficient matrix: rows are quaternionically dependent")
    r2 = r2 / n2[..., None, None]
    return Sp2Element(np.stack([r1, r2], axis=-3), check=False)


def haar_sample(seed=None, size=None) -> Sp2Element:
    """Haar-distributed element(s) of Sp(2).

    Gaussian quaternionic entries followed by row Gram-Schmidt; the law is
    right-invariant, hence Haar.  `seed` may be an int or a
    :class:`numpy.random.Generator`.
    """
    rng = np.random.default_rng(seed)
    shape = () if size is None else (size,) if np.isscalar(size) else tuple(size)
    return retract(rng.standard_normal(shape + (2, 2, 4)))


def complete_row(a, b) -> Sp2Element:
    """An element of Sp(2) whose first row is ``(a, b)``."""
    a = _qarray(a)
    b = _qarray(b)
    a, b = np.broadcast_arrays(a, b)
    n2 = qt.qnorm2(a) + qt.qnorm2(b)
    if np.any(np.abs(n2 - 1.0) > SP2_TOL):
        raise DomainError(f"first row must have unit norm, |a|^2+|b|^2 = {np.max(n2)!r}")
    r1 = np.stack([a, b], axis=-2)
    best = None
    best_norm = None
    for col in (0, 1):
        v = np.zeros_like(r1)
        v[..., col, 0] = 1.0
        c = qt.qmul(v, qt.qconj(r1)).sum(axis=-2)
        r2 = v - qt.qmul(c[..., None, :], r1)
        norm = np.sqrt(np.sum(r2 * r2, axis=(-2, -1)))
        if best is None:
            best, best_norm = r2, norm
        else:
            take = norm > best_norm
            best = np.where(take[..., None, None], r2, best)
            best_norm = np.where(take, norm, best_norm)
    r2 = best / best_norm[..., None, None]
    return retract(np.stack([r1, r2], axis=-3))


# ----------------------------------------------------------------------------
# covariant derivatives and geodesics


def covariant_derivative_along(
    field: Callable[[float], Sp2Tangent],
    curve: Callable[[float], Sp2Element],
    t0: float,
    m: MetricWeights = STANDARD_METRIC,
    h: float = 1e-5,
) -> Sp2Tangent:
    """Covariant derivative of a vector field along a curve at ``t0``.

    With ``Q = curve(t0)`` and velocity ``Q eta``, returns
    ``Q (d/dt xi(t) + nabla_eta xi)`` where ``xi(t)`` is the left-trivialized
    field and the second term is the left-invariant connection.  Both
    derivatives are central differences with step `h`.
    """
    if h <= 0 or t0 + h == t0 or t0 - h == t0:
        raise DomainError(f"finite-difference step {h!r} underflows at t0={t0!r}")
    Q0 = curve(t0)
    X0 = field(t0)
    if np.max(np.abs(X0.base.matrix - Q0.matrix)) > 1e-8:
        raise DomainError("field base point does not match curve(t0)")
    dxi = (field(t0 + h).xi.matrix - field(t0 - h).xi.matrix) / (2 * h)
    dQ = (curve(t0 + h).matrix - curve(t0 - h).matrix) / (2 * h)
    eta = Sp2Algebra.project(qmatmul(qstar(Q0.matrix), dQ))
    return Sp2Tangent(Q0, Sp2Algebra.project(dxi) + levi_civita_left_invariant(eta, X0.xi, m))


@dataclass
class GeodesicPath:
    """Output of :func:`geodesic_integrate`.

    ``velocities`` are orthonormal coordinates of the left-trivialized
    velocity at each node.
    """

    s: np.ndarray
    points: Sp2Element
    velocities: np.ndarray
    metric: MetricWeights

    @property
    def speed(self) -> np.ndarray:
        return np.linalg.norm(self.velocities, axis=-1)

    @property
    def arc_length(self):
        ds = np.diff(self.s, axis=0)
        sp = self.speed
        return np.sum(0.5 * (sp[1:] + sp[:-1]) * ds, axis=0)

    @property
    def endpoint(self) -> Sp2Element:
        return Sp2Element(self.points.matrix[-1], check=False)


def _geodesic_rhs(Q, c, m):
    xi = Sp2Algebra.from_coords(m.from_orthonormal(c)).matrix
    return qmatmul(Q, xi), -_levi_civita_on(c, c, m)


def geodesic_step(Q, c, h, m: MetricWeights = STANDARD_METRIC):
    """One classical Runge-Kutta step of ``Q' = Q xi``, ``xi' = -nabla_xi xi``.

    `h` broadcasts against the batch shape.  The new point is retracted
    onto Sp(2).
    """
    h = np.asarray(h, dtype=float)
    hq = h[..., None, None, None]
    hc = h[..., None]
    k1Q, k1c = _geodesic_rhs(Q, c, m)
    k2Q, k2c = _geodesic_rhs(Q + 0.5 * hq * k1Q, c + 0.5 * hc * k1c, m)
    k3Q, k3c = _geodesic_rhs(Q + 0.5 * hq * k2Q, c + 0.5 * hc * k2c, m)
    k4Q, k4c = _geodesic_rhs(Q + hq * k3Q, c + hc * k3c, m)
    Qn = Q + hq / 6.0 * (k1Q + 2 * k2Q + 2 * k3Q + k4Q)
    cn = c + hc / 6.0 * (k1c + 2 * k2c + 2 * k3c + k4c)
    return retract(Qn).matrix, cn


def geodesic_integrate(
    q0,
    v0: Sp2Tangent,
    length,
    steps: int | None = None,
    m: MetricWeights = STANDARD_METRIC,
) -> GeodesicPath:
    """Integrate the geodesic with unit initial velocity `v0` for arc length `length`.

    The default step count keeps ``length / steps <= 1e-3``.  Batches are
    supported: `length` broadcasts against the batch shape of `q0`.
    """
    Q = np.array(as_matrix(q0), dtype=float)
    if np.max(np.abs(v0.base.matrix - Q)) > SP2_TOL:
        raise DomainError("initial velocity is not based at q0")
    c = m.to_orthonormal(v0.xi.coords)
    speed = np.linalg.norm(c, axis=-1)
    if np.any(np.abs(speed - 1.0) > 1e-8):
        raise DomainError(f"initial velocity must have unit length, got {speed!r}")
    length = np.broadcast_to(np.asarray(length, dtype=float), Q.shape[:-3])
    if np.any(length < 0):
        raise DomainError("length must be non-negative")
    if steps is None:
        steps = max(1, int(np.ceil(np.max(length, initial=0.0) / 1e-3)))
    h = length / steps
    pts = [Q]
    vel = [c]
    for _ in range(steps):
        Q, c = geodesic_step(Q, c, h, m)
        pts.append(Q)
        vel.append(c)
    s = np.arange(steps + 1).reshape((-1,) + (1,) * h.ndim) * h
    return GeodesicPath(s=s, points=Sp2Element(np.stack(pts), check=False), velocities=np.stack(vel), metric=m)
