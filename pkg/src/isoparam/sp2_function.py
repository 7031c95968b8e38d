"""The function ``F(Q) = Re(a)`` on Sp(2) and the geometry of its level sets.

Everything here is for the weight-(1,1,1) left-invariant metric unless a
metric argument says otherwise.  The unit normal of a level set is
``nu = +grad F / |grad F|``; principal curvatures carry that orientation.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import brentq

from . import quaternion as qt
from .calculus import ScalarField
from .errors import DomainError, FocalPointError, SpectrumMismatchError
from .sp2 import (
    STANDARD_METRIC,
    GeodesicPath,
    MetricWeights,
    Sp2Algebra,
    Sp2Element,
    Sp2Tangent,
    as_matrix,
    geodesic_step,
    qmatmul,
    retract,
)

FOCAL_TOL = 1e-8
DEGENERATE_B = 1e-8
SPECTRUM_TOL = 1e-8


def F_eval(Q):
    """Real part of the upper-left entry."""
    return as_matrix(Q)[..., 0, 0, 0]


def grad_F_algebra(Q, m: MetricWeights = STANDARD_METRIC) -> Sp2Algebra:
    """Left-trivialized gradient ``-[[Im a, b], [-conj b, 0]]``, rescaled for `m`."""
    Q = as_matrix(Q)
    a, b = Q[..., 0, 0, :], Q[..., 0, 1, :]
    zero = np.zeros_like(a)
    return Sp2Algebra.from_parts(-qt.qimag(a) / m.w_x, -b / m.w_y, zero)


def grad_F_closed(Q, m: MetricWeights = STANDARD_METRIC) -> Sp2Tangent:
    Q = as_matrix(Q)
    return Sp2Tangent(Sp2Element(Q, check=False), grad_F_algebra(Q, m))


def grad_F_norm2(Q, m: MetricWeights = STANDARD_METRIC):
    g = grad_F_algebra(Q, m).coords
    return m.inner(g, g)


def unit_normal(Q) -> Sp2Algebra:
    """``grad F / |grad F|`` (left-trivialized); undefined on the focal sets."""
    g = grad_F_algebra(Q)
    n = np.sqrt(grad_F_norm2(Q))
    if np.any(n < FOCAL_TOL):
        raise FocalPointError("gradient vanishes: point is focal")
    return g / n


def hessian_operator(Q, xi: Sp2Algebra) -> Sp2Algebra:
    """The algebra element ``h`` with ``H_F(xi, eta) = <h, eta>`` for every eta."""
    Q = as_matrix(Q)
    t = Q[..., 0, 0, 0]
    b = Q[..., 0, 1, :]
    ts = t[..., None]
    x, y, z = xi.x, xi.y, xi.z
    return -Sp2Algebra.from_parts(ts * x, ts * y + qt.qmul(b, z), qt.qimag(qt.qmul(qt.qconj(b), y)))


def hessian_F_closed(Q, u: Sp2Tangent, v: Sp2Tangent):
    if np.max(np.abs(u.base.matrix - v.base.matrix)) > 1e-10:
        raise DomainError("tangent vectors have different base points")
    return STANDARD_METRIC.inner(hessian_operator(Q, u.xi).coords, v.xi.coords)


def hessian_F_matrix(Q) -> np.ndarray:
    """Closed-form Hessian in the orthonormal frame; shape ``(..., 10, 10)``."""
    Q = as_matrix(Q)
    basis = STANDARD_METRIC.basis()
    cols = hessian_operator(Q[..., None, :, :, :], basis).coords
    # row j holds the operator applied to e_j
    return cols


def laplacian_F_closed(Q):
    """Trace of the closed-form Hessian (summed, not the formula -7F)."""
    return np.trace(hessian_F_matrix(Q), axis1=-2, axis2=-1)


REAL_PART_FIELD = ScalarField(
    F_eval,
    name="F=Re(a)",
    gradient_norm2=grad_F_norm2,
    laplacian=laplacian_F_closed,
    metric=STANDARD_METRIC,
)


# ----------------------------------------------------------------------------
# shape operator


def level_tangent_basis(Q) -> np.ndarray:
    """Orthonormal coordinates of a basis of the level-set tangent space.

    Shape ``(..., 10, 9)``; columns are orthogonal to ``grad F``, obtained by
    Gram-Schmidt of the fixed frame against the unit normal.
    """
    n = STANDARD_METRIC.to_orthonormal(unit_normal(Q).coords)
    frame = np.concatenate([n[..., :, None], np.broadcast_to(np.eye(10), n.shape[:-1] + (10, 10))], axis=-1)
    q, _ = np.linalg.qr(frame)
    return q[..., :, 1:10]


def shape_operator_matrix(Q) -> np.ndarray:
    """``-H_F / |grad F|`` restricted to the level tangent space (9x9, symmetric)."""
    t = F_eval(Q)
    if np.any(np.abs(t) >= 1 - FOCAL_TOL):
        raise FocalPointError(f"|F| = {np.max(np.abs(t))!r} is focal")
    B = level_tangent_basis(Q)
    H = hessian_F_matrix(Q)
    S = -np.swapaxes(B, -1, -2) @ H @ B / np.sqrt(1.0 - t * t)[..., None, None]
    return 0.5 * (S + np.swapaxes(S, -1, -2))


def closed_form_curvatures(t, b_norm):
    """``(lambda1, lambda2, lambda3)`` for the generic branch ``|b| > 0``."""
    g = np.sqrt(1.0 - t * t)
    r = np.sqrt(t * t + 4.0 * b_norm * b_norm)
    return t / g, (t + r) / (2 * g), (t - r) / (2 * g)


@dataclass
class SpectrumResult:
    """Principal curvatures of the level set through a point."""

    eigenvalues: list
    level: float
    b_norm: float
    branch: str
    numeric: np.ndarray
    deviation: float
    notes: list = dc_field(default_factory=list)

    def expanded(self) -> np.ndarray:
        vals = [v for v, mult in self.eigenvalues for _ in range(mult)]
        return np.sort(np.array(vals))

    @property
    def mean_curvature(self) -> float:
        return float(sum(v * mult for v, mult in self.eigenvalues))


def shape_spectrum(Q, tol: float = SPECTRUM_TOL) -> SpectrumResult:
    """Closed-form principal curvatures, checked against a numeric eigen-solve.

    Raises
    ------
    FocalPointError
        If ``|F(Q)| >= 1 - 1e-8``.
    SpectrumMismatchError
        If the two computations differ by more than `tol`.
    """
    Q = as_matrix(Q)
    t = float(F_eval(Q))
    if abs(t) >= 1 - FOCAL_TOL:
        raise FocalPointError(f"F = {t!r} is a focal value")
    bn = float(qt.qnorm(Q[0, 1]))
    notes = []
    if bn > DEGENERATE_B:
        l1, l2, l3 = closed_form_curvatures(t, bn)
        eig = [(float(l1), 3), (float(l2), 3), (float(l3), 3)]
        branch = "generic"
    else:
        g = np.sqrt(1 - t * t)
        eig = [(t / g, 6), (0.0, 3)] if t != 0.0 else [(0.0, 9)]
        branch = "degenerate"
        notes.append("b = 0 stratum: multiplicities (6, 3) derived from the eigen-equation with b = 0")
    numeric = np.linalg.eigvalsh(shape_operator_matrix(Q))
    result = SpectrumResult(eig, t, bn, branch, numeric, 0.0, notes)
    result.deviation = float(np.max(np.abs(np.sort(numeric) - result.expanded())))
    if result.deviation > tol:
        raise SpectrumMismatchError(f"closed form and eigen-solve differ by {result.deviation:.3e}")
    return result


def eigenspace_basis(Q, which: int) -> list:
    """Three tangent vectors spanning the eigenspace T_which (1, 2 or 3)."""
    Q = as_matrix(Q)
    if which not in (1, 2, 3):
        raise DomainError("which must be 1, 2 or 3")
    t = float(F_eval(Q))
    if abs(t) >= 1 - FOCAL_TOL:
        raise FocalPointError(f"F = {t!r} is a focal value")
    a, b = Q[0, 0], Q[0, 1]
    b2 = float(qt.qnorm2(b))
    if np.sqrt(b2) <= DEGENERATE_B:
        raise DomainError("b = 0: eigenspaces merge")
    base = Sp2Element(Q, check=False)
    zero = np.zeros(4)
    out = []
    if which == 1:
        for x in qt.IMAGINARY_UNITS:
            y = float(qt.qreal(qt.qmul(a, x))) / b2 * b
            out.append(Sp2Tangent(base, Sp2Algebra.from_parts(x, y, zero)))
        return out
    lam = closed_form_curvatures(t, np.sqrt(b2))[which - 1]
    mu = lam * np.sqrt(1 - t * t)
    for u in qt.IMAGINARY_UNITS:
        y = qt.qmul(b, u) / np.sqrt(b2)
        z = qt.qmul(qt.qconj(b), y) / mu
        out.append(Sp2Tangent(base, Sp2Algebra.from_parts(zero, y, z)))
    return out


def shape_operator_apply(Q, xi: Sp2Algebra) -> Sp2Algebra:
    """``A_nu xi = -(H_F xi) / |grad F|`` for a level-tangent `xi`."""
    n = np.sqrt(grad_F_norm2(Q))
    return -hessian_operator(Q, xi) / n


# ----------------------------------------------------------------------------
# focal sets and normal geodesics


class FocalSide(str, enum.Enum):
    PLUS = "plus"
    MINUS = "minus"
    REGULAR = "regular"


def focal_membership(Q, tol: float = FOCAL_TOL) -> FocalSide:
    """Classify `Q` as lying on ``F = 1``, ``F = -1`` or a regular level.

    On a focal set the matrix must be ``diag(+-1, d)`` with ``|d| = 1``; a
    focal value without that shape raises :class:`DomainError`.
    """
    Q = as_matrix(Q)
    t = float(F_eval(Q))
    for side, target in ((FocalSide.PLUS, 1.0), (FocalSide.MINUS, -1.0)):
        if abs(t - target) < tol:
            off = max(float(qt.qnorm(Q[0, 1])), float(qt.qnorm(Q[1, 0])))
            dn = float(qt.qnorm(Q[1, 1]))
            if off > 1e-6 or abs(dn - 1.0) > 1e-6:
                raise DomainError(f"focal value without diagonal form (off-diagonal {off:.2e}, |d| = {dn!r})")
            return side
    return FocalSide.REGULAR


@dataclass
class NormalTrace:
    start_level: float
    sign: int
    arc_length: float
    endpoint: Sp2Element
    side: FocalSide
    path: GeodesicPath

    def levels(self) -> np.ndarray:
        return F_eval(self.path.points.matrix)


def _dF_ds(Q, c):
    g = STANDARD_METRIC.to_orthonormal(grad_F_algebra(Q).coords)
    return np.sum(g * c, axis=-1)


def normal_geodesic_trace(Q0, sign: int = 1, step: float = 1e-3) -> NormalTrace:
    """Follow the normal geodesic from `Q0` in direction ``sign * nu`` until F stops changing.

    Integral curves of ``nu`` are geodesics, so the geodesic equation is
    integrated instead of the singular first-order flow.  The stopping arc
    length is the root of ``dF/ds`` inside the last step, found by Brent's
    method on the length of a single Runge-Kutta step.
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    Q = np.array(as_matrix(Q0), dtype=float)
    t0 = float(F_eval(Q))
    if abs(t0) >= 1 - FOCAL_TOL:
        raise FocalPointError(f"F = {t0!r} is a focal value")
    c = sign * STANDARD_METRIC.to_orthonormal(unit_normal(Q).coords)
    pts, vel, ss = [Q], [c], [0.0]
    s = 0.0
    # F(s) = sin(asin t0 + s) reaches +-1 before s = pi
    max_len = np.pi + 0.1
    while s < max_len:
        Qn, cn = geodesic_step(Q, c, step)
        if sign * _dF_ds(Qn, cn) <= 0.0:
            def g(tau):
                if tau == 0.0:
                    return sign * _dF_ds(Q, c)
                Qt, ct = geodesic_step(Q, c, tau)
                return sign * _dF_ds(Qt, ct)

            tau = brentq(g, 0.0, step, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            Qe, ce = geodesic_step(Q, c, tau)
            s += tau
            pts.append(Qe)
            vel.append(ce)
            ss.append(s)
            break
        Q, c = Qn, cn
        s += step
        pts.append(Q)
        vel.append(c)
        ss.append(s)
    else:
        raise RuntimeError("normal geodesic did not reach a focal set")
    path = GeodesicPath(np.array(ss), Sp2Element(np.stack(pts), check=False), np.stack(vel), STANDARD_METRIC)
    end = path.endpoint
    return NormalTrace(t0, sign, s, end, focal_membership(end, tol=1e-8), path)


def normal_flow(Q0, length: float, sign: int = 1, steps: int | None = None) -> Sp2Element:
    """Integrate the first-order flow ``Q' = Q nu(Q)`` (away from focal sets)."""
    Q = np.array(as_matrix(Q0), dtype=float)
    if steps is None:
        steps = max(1, int(np.ceil(abs(length) / 1e-3)))
    h = length / steps

    def rhs(P):
        return qmatmul(P, (unit_normal(P) * sign).matrix)

    for _ in range(steps):
        k1 = rhs(Q)
        k2 = rhs(Q + 0.5 * h * k1)
        k3 = rhs(Q + 0.5 * h * k2)
        k4 = rhs(Q + h * k3)
        Q = retract(Q + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)).matrix
    return Sp2Element(Q, check=False)
