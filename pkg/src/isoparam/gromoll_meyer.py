"""The S^3 biquotient action on Sp(2) and the function it induces on the quotient 7-sphere.

The action is ``Q -> diag(q, 1) Q diag(conj q, conj q)`` for unit ``q``.  It
preserves ``F = Re(a)`` and the left-invariant metric, so ``F`` descends to a
function ``f`` on the quotient with ``|grad f|^2 = 1 - f^2``.  The quotient
Laplacian differs from the upstairs one by the mean curvature of the orbits:
``lap f = -7 f + phi`` with ``phi = -sum g^{ab} H_F(nu_a, nu_b)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import quaternion as qt
from .calculus import ScalarField
from .errors import DegenerateOrbitError, DomainError, FocalPointError
from .sp2 import (
    STANDARD_METRIC,
    Sp2Algebra,
    Sp2Element,
    Sp2Tangent,
    as_matrix,
    complete_row,
    covariant_derivative_along,
    haar_sample,
    qexpm,
    qmatmul,
    retract,
)
from .sp2_function import F_eval, grad_F_algebra, grad_F_norm2, hessian_F_matrix, hessian_operator, unit_normal

NORMAL_FORM_TOL = 1e-10
GRAM_CONDITION_MAX = 1e8
EF_MIN = 1e-12
ZERO_LEVEL_TOL = 1e-10
THETA_GRID = 720


# ----------------------------------------------------------------------------
# the action


def s3_act(q, Q) -> Sp2Element:
    """``diag(q, 1) Q diag(conj q, conj q)``; `q` broadcasts against the batch of `Q`."""
    q = np.asarray(q, dtype=float)
    qt.check_unit(q)
    Q = as_matrix(Q)
    qb = qt.qconj(q)
    left = np.stack([q, np.broadcast_to(qt.ONE, q.shape)], axis=-2)[..., :, None, :]
    out = qt.qmul(left, Q)
    return Sp2Element(qt.qmul(out, qb[..., None, None, :]), check=False)


def s3_pushforward(q, v: Sp2Tangent) -> Sp2Tangent:
    """Differential of the action: the algebra part is conjugated entrywise by `q`."""
    q = np.asarray(q, dtype=float)
    qt.check_unit(q)
    qe = q[..., None, None, :]
    xi = qt.qmul(qt.qmul(qe, v.xi.matrix), qt.qconj(qe))
    return Sp2Tangent(s3_act(q, v.base), Sp2Algebra(xi))


def recover_action(P, Q):
    """The unique ``q`` with ``s3_act(q, P) = Q`` if the orbits agree.

    The second row transforms as ``(c, d) -> (c conj q, d conj q)``, so
    ``conj q = conj(c) c' + conj(d) d'``.  Returns ``(q, residual)``.
    """
    P, Q = as_matrix(P), as_matrix(Q)
    qb = qt.qmul(qt.qconj(P[..., 1, 0, :]), Q[..., 1, 0, :]) + qt.qmul(qt.qconj(P[..., 1, 1, :]), Q[..., 1, 1, :])
    q = qt.qconj(qb)
    q = q / qt.qnorm(q)[..., None]
    res = np.max(np.abs(s3_act(q, P).matrix - Q), axis=(-3, -2, -1))
    return q, res


# ----------------------------------------------------------------------------
# normal form


def _axis_rotation_i(angle):
    """Unit quaternion rotating Im(H) by `angle` about the i-axis."""
    return np.array([np.cos(angle / 2), np.sin(angle / 2), 0.0, 0.0])


def normal_form(a, b):
    """A unit ``q`` with ``q b conj(q)`` in span{1, i} and ``q a conj(q)`` in span{1, i, j}.

    Returns ``(q, a', b')``.  Stage one rotates ``Im b`` onto the positive
    i-axis (skipped when ``Im b = 0``); stage two rotates about the i-axis to
    clear the k-component of ``a`` and make its j-component non-negative.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    q = qt.ONE.copy()
    ib = b[1:]
    if np.linalg.norm(ib) > NORMAL_FORM_TOL:
        q = qt.rotation_between(ib, [1.0, 0.0, 0.0])
    a1 = qt.qmul(qt.qmul(q, a), qt.qconj(q))
    y, z = a1[2], a1[3]
    if np.hypot(y, z) > 0.0:
        q = qt.qmul(_axis_rotation_i(-np.arctan2(z, y)), q)
    q = q / qt.qnorm(q)
    a2 = qt.qmul(qt.qmul(q, a), qt.qconj(q))
    b2 = qt.qmul(qt.qmul(q, b), qt.qconj(q))
    # zero the components removed by construction
    a2[3] = 0.0
    b2[2:] = 0.0
    return q, a2, b2


def normalize(Q) -> tuple:
    """Normal-form representative of the orbit of a single `Q`; returns ``(q, Q')``."""
    Q = as_matrix(Q)
    q, _, _ = normal_form(Q[0, 0], Q[0, 1])
    return q, s3_act(q, Q)


def is_normal_form(Q, tol: float = NORMAL_FORM_TOL) -> bool:
    Q = as_matrix(Q)
    return bool(abs(Q[0, 0, 3]) < tol and np.all(np.abs(Q[0, 1, 2:]) < tol))


def normal_form_point(a1, a2, b0, b1, a0=0.0) -> Sp2Element:
    """Complete the normal-form first row ``(a0 + a1 i + a2 j, b0 + b1 i)`` to Sp(2)."""
    a1, a2, b0, b1, a0 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a1, a2, b0, b1, a0)))
    zero = np.zeros_like(a1)
    a = np.stack([a0, a1, a2, zero], axis=-1)
    b = np.stack([b0, b1, zero, zero], axis=-1)
    return complete_row(a, b)


def _residual_stabilizer(theta, flip: bool):
    """``exp(i theta / 2)``, optionally premultiplied by ``j``."""
    q = np.stack([np.cos(theta / 2), np.sin(theta / 2), np.zeros_like(theta), np.zeros_like(theta)], axis=-1)
    if flip:
        q = qt.qmul(qt.J, q)
    return q


@dataclass
class OrbitPoint:
    """A point of the quotient, held as an upstairs representative."""

    representative: Sp2Element
    normalized: bool = False

    @classmethod
    def from_matrix(cls, Q, normalize_rep: bool = True) -> "OrbitPoint":
        Q = Sp2Element(as_matrix(Q))
        if normalize_rep:
            _, Q = normalize(Q)
        return cls(Q, normalize_rep)

    @property
    def f(self) -> float:
        return float(F_eval(self.representative.matrix))

    def normal(self) -> "OrbitPoint":
        if self.normalized:
            return self
        return OrbitPoint.from_matrix(self.representative, True)

    def distance(self, other: "OrbitPoint") -> float:
        """Distance between normal forms, minimized over the residual stabilizer.

        A grid of angles is scanned for each of the two components
        ``{exp(i t)}`` and ``{j exp(i t)}``, then refined by a bounded scalar
        search around the best grid point.
        """
        P = self.normal().representative.matrix
        Q = other.normal().representative.matrix
        theta = np.linspace(0.0, 4 * np.pi, THETA_GRID, endpoint=False)
        step = theta[1] - theta[0]
        best = np.inf
        for flip in (False, True):
            d = np.max(np.abs(s3_act(_residual_stabilizer(theta, flip), P).matrix - Q), axis=(-3, -2, -1))
            k = int(np.argmin(d))

            def obj(t, flip=flip):
                return float(np.max(np.abs(s3_act(_residual_stabilizer(np.asarray(t), flip), P).matrix - Q)))

            res = minimize_scalar(obj, bounds=(theta[k] - step, theta[k] + step), method="bounded", options={"xatol": 1e-13})
            best = min(best, float(d[k]), float(res.fun))
        return best

    def isclose(self, other: "OrbitPoint", tol: float = 1e-8) -> bool:
        return self.distance(other) < tol

    def __eq__(self, other):
        if not isinstance(other, OrbitPoint):
            return NotImplemented
        return self.isclose(other)

    __hash__ = None


# ----------------------------------------------------------------------------
# orbit frame and Gram matrix


@dataclass
class OrbitFrame:
    """Tangent frame ``nu(i), nu(j), nu(k)`` of the orbit through a point."""

    nu1: Sp2Tangent
    nu2: Sp2Tangent
    nu3: Sp2Tangent

    def __iter__(self):
        return iter((self.nu1, self.nu2, self.nu3))

    @property
    def algebra(self) -> Sp2Algebra:
        """The three left-trivialized frame vectors stacked on axis -4."""
        return Sp2Algebra(np.stack([v.xi.matrix for v in self], axis=-4))


def orbit_generator(Q, x) -> Sp2Algebra:
    """Algebra part of ``nu(x) = Q [[a* x a - x, a* x b], [b* x a, b* x b - x]]``."""
    Q = as_matrix(Q)
    a, b = Q[..., 0, 0, :], Q[..., 0, 1, :]
    x = np.asarray(x, dtype=float)
    ab, bb = qt.qconj(a), qt.qconj(b)
    m = np.stack(
        [
            np.stack([qt.qmul(qt.qmul(ab, x), a) - x, qt.qmul(qt.qmul(ab, x), b)], axis=-2),
            np.stack([qt.qmul(qt.qmul(bb, x), a), qt.qmul(qt.qmul(bb, x), b) - x], axis=-2),
        ],
        axis=-3,
    )
    return Sp2Algebra.project(m)


def orbit_frame(Q) -> OrbitFrame:
    Q = as_matrix(Q)
    base = Sp2Element(Q, check=False)
    return OrbitFrame(*(Sp2Tangent(base, orbit_generator(Q, x)) for x in qt.IMAGINARY_UNITS))


def _frame_coords(Q):
    """Orthonormal coordinates of the orbit frame; shape (..., 3, 10)."""
    return np.stack([STANDARD_METRIC.to_orthonormal(orbit_generator(Q, x).coords) for x in qt.IMAGINARY_UNITS], axis=-2)


@dataclass
class GramData:
    """Gram matrix of the orbit frame.

    ``E`` is the leading 2x2 minor and ``F_scalar`` the (3, 3) entry; at
    normal-form points of the zero level the matrix is block diagonal and
    these two scalars determine its inverse.
    """

    g: np.ndarray
    g_inv: np.ndarray
    E: np.ndarray
    F_scalar: np.ndarray
    condition: np.ndarray


def gram_condition(Q):
    V = _frame_coords(as_matrix(Q))
    return np.linalg.cond(V @ np.swapaxes(V, -1, -2))


def _closed_gram(Q):
    Q = as_matrix(Q)
    a, b = Q[..., 0, 0, :], Q[..., 0, 1, :]
    if np.any(np.abs(a[..., 0]) > NORMAL_FORM_TOL):
        raise DomainError("closed-form Gram matrix needs Re(a) = 0")
    if not (np.all(np.abs(a[..., 3]) < NORMAL_FORM_TOL) and np.all(np.abs(b[..., 2:]) < NORMAL_FORM_TOL)):
        raise DomainError("closed-form Gram matrix needs a normal-form representative")
    a1, a2, b0, b1 = a[..., 1], a[..., 2], b[..., 0], b[..., 1]
    return _gram_entries(a1, a2, b0, b1)


def _gram_entries(a1, a2, b0, b1):
    s = 1.0 - (a1**2 + a2**2) * (b0**2 + b1**2)
    g = np.zeros(np.shape(a1) + (3, 3))
    g[..., 0, 0] = s + 4 * a2**2
    g[..., 0, 1] = g[..., 1, 0] = -4 * a1 * a2
    g[..., 1, 1] = s + 4 * (a1**2 + b1**2)
    g[..., 2, 2] = s + 4 * (a1**2 + a2**2 + b1**2)
    return g


def gram_matrix(Q, closed_form: bool = False) -> GramData:
    """Gram matrix ``g_ab = <nu_a, nu_b>`` and its inverse.

    The default computes inner products of :func:`orbit_frame` directly and
    works at any point.  ``closed_form=True`` evaluates the polynomial
    entries, valid for normal-form points with ``Re(a) = 0``.

    Raises
    ------
    DegenerateOrbitError
        If the condition number exceeds ``1e8``.
    """
    Q = as_matrix(Q)
    if closed_form:
        g = _closed_gram(Q)
    else:
        V = _frame_coords(Q)
        g = V @ np.swapaxes(V, -1, -2)
    cond = np.linalg.cond(g)
    if np.any(~np.isfinite(cond)) or np.any(cond > GRAM_CONDITION_MAX):
        worst = float(np.max(np.where(np.isfinite(cond), cond, np.inf)))
        raise DegenerateOrbitError(f"orbit Gram matrix is singular (condition {worst:.3e})", worst)
    E = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    return GramData(g, np.linalg.inv(g), E, g[..., 2, 2].copy(), cond)


# ----------------------------------------------------------------------------
# phi and the quotient Laplacian


def frame_hessian(Q):
    """``H_F(nu_a, nu_b)`` from the closed-form Hessian; shape (..., 3, 3)."""
    Q = as_matrix(Q)
    V = _frame_coords(Q)
    HV = np.stack(
        [STANDARD_METRIC.to_orthonormal(hessian_operator(Q, orbit_generator(Q, x)).coords) for x in qt.IMAGINARY_UNITS],
        axis=-2,
    )
    return V @ np.swapaxes(HV, -1, -2)


def phi_numeric(Q):
    """``Phi = -sum g^{ab} H_F(nu_a, nu_b)``, the orbit mean curvature paired with grad F."""
    Q = as_matrix(Q)
    gd = gram_matrix(Q)
    return -np.sum(gd.g_inv * frame_hessian(Q), axis=(-2, -1))


def phi_closed(a1, a2, b0, b1):
    """``phi = 8 a1 b1 b0 (E - 8 a2^2 b1^2) / (E F)`` at the zero-level normal form.

    Raises
    ------
    DomainError
        If the data do not describe a unit first row.
    FocalPointError
        If ``E F < 1e-12``.
    """
    a1, a2, b0, b1 = (np.asarray(v, dtype=float) for v in (a1, a2, b0, b1))
    n = a1**2 + a2**2 + b0**2 + b1**2
    if np.any(np.abs(n - 1.0) > NORMAL_FORM_TOL):
        raise DomainError(f"a1^2 + a2^2 + b0^2 + b1^2 must be 1, got {np.max(n)!r}")
    g = _gram_entries(a1, a2, b0, b1)
    E = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    F = g[..., 2, 2]
    if np.any(E * F < EF_MIN):
        raise FocalPointError("E F vanishes: closed form is singular")
    return 8 * a1 * b1 * b0 * (E - 8 * a2**2 * b1**2) / (E * F)


def quotient_laplacian(Q):
    """``lap f = -7 f + phi`` at the orbit of `Q`."""
    Q = as_matrix(Q)
    return -7.0 * F_eval(Q) + phi_numeric(Q)


def horizontal_laplacian(Q):
    """Trace of ``H_F`` over the orthogonal complement of the orbit.

    For a Riemannian submersion this is the Laplacian of the descended
    function, computed without the orbit-frame inverse weights.
    """
    Q = as_matrix(Q)
    V = _frame_coords(Q)
    # orthonormal basis of the vertical space
    U, _ = np.linalg.qr(np.swapaxes(V, -1, -2))
    P = np.eye(10) - U @ np.swapaxes(U, -1, -2)
    H = hessian_F_matrix(Q)
    return np.einsum("...ij,...ji->...", P, H)


def phi_from_connection(Q, h: float = 1e-5) -> float:
    """``sum g^{ab} <nabla_{nu_a} nu_b, grad F>`` from covariant derivatives of the frame.

    Each ``nu_b`` is differentiated along ``s -> Q exp(s xi_a)``, where
    ``Q xi_a = nu_a``.  Single point only.
    """
    Q = as_matrix(Q)
    if Q.shape != (2, 2, 4):
        raise DomainError("phi_from_connection takes a single point")
    gd = gram_matrix(Q)
    grad = grad_F_algebra(Q).coords
    frame = orbit_frame(Q)
    total = 0.0
    for i, va in enumerate(frame):
        xa = va.xi.matrix

        def curve(s, xa=xa):
            return Sp2Element(qmatmul(Q, qexpm(s * xa)), check=False)

        for j, x in enumerate(qt.IMAGINARY_UNITS):

            def field(s, x=x, curve=curve):
                P = curve(s)
                return Sp2Tangent(P, orbit_generator(P.matrix, x))

            D = covariant_derivative_along(field, curve, 0.0, STANDARD_METRIC, h)
            total += gd.g_inv[i, j] * float(STANDARD_METRIC.inner(D.xi.coords, grad))
    return total


def mean_curvature_gm(Q):
    """Mean curvature ``(6 f - phi) / sqrt(1 - f^2)`` of the level of f through the orbit of `Q`."""
    Q = as_matrix(Q)
    t = F_eval(Q)
    if np.any(np.abs(t) >= 1 - 1e-6):
        raise FocalPointError("mean curvature is undefined at the focal points")
    return (6 * t - phi_numeric(Q)) / np.sqrt(1 - t * t)


GM_FIELD = ScalarField(
    F_eval,
    name="f (biquotient)",
    gradient_norm2=grad_F_norm2,
    laplacian=quotient_laplacian,
    metric=STANDARD_METRIC,
)


# ----------------------------------------------------------------------------
# sampling


def flow_to_zero_level(Q, steps: int = 200, tol: float = ZERO_LEVEL_TOL, max_polish: int = 8) -> Sp2Element:
    """Move points along the unit normal of F until ``|F| < tol``.

    Along the unit normal ``F = sin(s + asin F0)``, so each point travels
    arc length ``asin F0`` towards zero; a few short polishing flows remove
    the integration error.
    """
    Q = np.array(as_matrix(Q), dtype=float)
    t = F_eval(Q)
    if np.any(np.abs(t) >= 1 - 1e-8):
        raise FocalPointError("cannot flow from a focal point")
    n = steps
    for _ in range(max_polish + 1):
        t = F_eval(Q)
        if np.all(np.abs(t) < tol):
            break
        length = -np.arcsin(np.clip(t, -1, 1))
        h = (length / n)[..., None, None, None]

        def rhs(P):
            return qmatmul(P, unit_normal(P).matrix)

        for _ in range(n):
            k1 = rhs(Q)
            k2 = rhs(Q + 0.5 * h * k1)
            k3 = rhs(Q + 0.5 * h * k2)
            k4 = rhs(Q + h * k3)
            Q = retract(Q + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)).matrix
        n = 4
    t = F_eval(Q)
    if np.any(np.abs(t) >= tol):
        raise RuntimeError(f"zero-level flow did not converge (max |F| = {np.max(np.abs(t)):.2e})")
    return Sp2Element(Q, check=False)


def sample_zero_level(n: int, seed=None) -> Sp2Element:
    """Normal-form representatives of `n` random points of ``f^{-1}(0)``."""
    Q = flow_to_zero_level(haar_sample(seed, n).matrix)
    M = Q.matrix
    out = np.empty_like(M)
    for k in range(M.shape[0]):
        _, P = normalize(M[k])
        out[k] = P.matrix
    return Sp2Element(out, check=False)


def zero_level_data(Q):
    """``(a1, a2, b0, b1)`` read from normal-form representatives."""
    Q = as_matrix(Q)
    return Q[..., 0, 0, 1], Q[..., 0, 0, 2], Q[..., 0, 1, 0], Q[..., 0, 1, 1]


WITNESS_PHI_MAX = (1 / np.sqrt(2), 0.0, 0.5, 0.5)
WITNESS_PHI_ZERO = (1 / np.sqrt(2), 0.0, 0.0, 1 / np.sqrt(2))
