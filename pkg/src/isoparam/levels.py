"""Level-set geometry of transnormal functions from their profile pair ``(b, a)``.

A transnormal ``f`` with ``|grad f|^2 = b(f)`` and ``lap f = a(f)`` has level
hypersurfaces of constant mean curvature ``h(t) = (b'(t) - 2 a(t)) / (2 sqrt b(t))``
with respect to the normal ``grad f / |grad f|``.  At a focal endpoint the
Laplacian is the Hessian trace over the normal space of the focal variety,
which gives ``a = b' codim / 2`` there.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import bisect

from .calculus import ConformalMetric, ScalarField, gradient_norm2, numeric_hessian, numeric_laplacian
from .errors import DomainError
from .gromoll_meyer import horizontal_laplacian, phi_numeric, quotient_laplacian
from .sp2 import STANDARD_METRIC, Sp2Tangent, as_matrix, complete_row, haar_sample
from .sp2_function import F_eval, REAL_PART_FIELD, grad_F_algebra, grad_F_norm2, hessian_F_closed, laplacian_F_closed

FITTED_TOL = 1e-3


@dataclass
class LevelProfilePair:
    """Profile functions ``b``, ``b'`` and ``a`` on the interval ``[alpha, beta]``.

    An infinite endpoint is flagged and skipped by the endpoint checks.
    ``fitted`` marks profiles built from sampled tables.
    """

    b: Callable
    db: Callable
    a: Callable
    alpha: float
    beta: float
    alpha_infinite: bool = False
    beta_infinite: bool = False
    name: str = "profile"
    fitted: bool = False

    @classmethod
    def from_table(cls, t, b, a, name: str = "fitted", alpha=None, beta=None) -> "LevelProfilePair":
        """Spline interpolants through tabulated ``(t, b(t), a(t))``."""
        t = np.asarray(t, dtype=float)
        bs = CubicSpline(t, np.asarray(b, dtype=float))
        as_ = CubicSpline(t, np.asarray(a, dtype=float))
        return cls(
            b=bs,
            db=bs.derivative(),
            a=as_,
            alpha=float(t[0] if alpha is None else alpha),
            beta=float(t[-1] if beta is None else beta),
            name=name,
            fitted=True,
        )

    def check(self, n: int = 101) -> None:
        """Validate ``b > 0`` inside the domain and the endpoint sign conditions."""
        lo = self.alpha if not self.alpha_infinite else -1e3
        hi = self.beta if not self.beta_infinite else 1e3
        t = np.linspace(lo, hi, n)[1:-1]
        if np.any(np.asarray(self.b(t)) <= 0):
            raise DomainError(f"{self.name}: b must be positive inside the domain")
        if not self.alpha_infinite and not self.db(self.alpha) > 0:
            raise DomainError(f"{self.name}: need b'(alpha) > 0")
        if not self.beta_infinite and not self.db(self.beta) < 0:
            raise DomainError(f"{self.name}: need b'(beta) < 0")


def mean_curvature_profile(p: LevelProfilePair, t):
    """``h(t) = (b'(t) - 2 a(t)) / (2 sqrt(b(t)))``.

    Raises
    ------
    DomainError
        Where ``b(t) <= 0``.
    """
    t = np.asarray(t, dtype=float)
    b = np.asarray(p.b(t), dtype=float)
    if np.any(b <= 0):
        raise DomainError("mean curvature is undefined where b <= 0")
    return (np.asarray(p.db(t)) - 2 * np.asarray(p.a(t))) / (2 * np.sqrt(b))


def minimal_level(p: LevelProfilePair, codim_minus: int, codim_plus: int, xtol: float = 1e-15) -> float:
    """A level ``t0`` whose hypersurface is minimal, by bisection of ``b' - 2a``.

    For proper functions (both focal codimensions at least 2) the numerator is
    ``b'(alpha)(1 - codim_minus) < 0`` at ``alpha`` and positive at ``beta``,
    so the endpoints bracket a root.
    """
    if codim_minus < 2 or codim_plus < 2:
        raise DomainError("minimal_level needs focal codimensions >= 2 (proper case)")
    if p.alpha_infinite or p.beta_infinite:
        raise DomainError("minimal_level needs finite focal endpoints")

    def g(t):
        return float(p.db(t) - 2 * p.a(t))

    lo, hi = float(p.alpha), float(p.beta)
    if not (g(lo) < 0 < g(hi)):
        raise DomainError(f"no sign bracket: g(alpha) = {g(lo)!r}, g(beta) = {g(hi)!r}")
    return float(bisect(g, lo, hi, xtol=xtol, maxiter=400))


def focal_codim_check(p: LevelProfilePair, codim_minus: int, codim_plus: int):
    """``(|a(alpha) - b'(alpha) c_- / 2|, |a(beta) - b'(beta) c_+ / 2|)``; ``nan`` for infinite ends."""
    lo = np.nan if p.alpha_infinite else abs(float(p.a(p.alpha)) - 0.5 * float(p.db(p.alpha)) * codim_minus)
    hi = np.nan if p.beta_infinite else abs(float(p.a(p.beta)) - 0.5 * float(p.db(p.beta)) * codim_plus)
    return lo, hi


def conformal_deform(p: LevelProfilePair, u: Callable, du: Callable, n: int) -> LevelProfilePair:
    """Profile of the same function under ``exp(2 u(f)) g`` on an `n`-manifold."""
    if n < 2:
        raise DomainError("dimension must be at least 2")

    def b(t):
        return np.exp(-2 * u(t)) * p.b(t)

    def db(t):
        return np.exp(-2 * u(t)) * (p.db(t) - 2 * du(t) * p.b(t))

    def a(t):
        return np.exp(-2 * u(t)) * ((n - 2) * du(t) * p.b(t) + p.a(t))

    return LevelProfilePair(
        b, db, a, p.alpha, p.beta, p.alpha_infinite, p.beta_infinite, name=f"{p.name} (conformal)", fitted=p.fitted
    )


# ----------------------------------------------------------------------------
# shipped profiles


def sp2_profile() -> LevelProfilePair:
    return LevelProfilePair(
        b=lambda t: 1.0 - np.asarray(t) ** 2,
        db=lambda t: -2.0 * np.asarray(t),
        a=lambda t: -7.0 * np.asarray(t),
        alpha=-1.0,
        beta=1.0,
        name="sp2",
    )


def symmetric_profile(n: int) -> LevelProfilePair:
    return LevelProfilePair(
        b=lambda t: 1.0 - np.asarray(t) ** 2,
        db=lambda t: -2.0 * np.asarray(t),
        a=lambda t: -float(n) * np.asarray(t),
        alpha=-1.0,
        beta=1.0,
        name=f"symmetric({n})",
    )


def s3_profile() -> LevelProfilePair:
    """Profile ``b = 4f - 4f^2``, ``a = 2 - 8f`` of an improper example on the 3-sphere."""
    return LevelProfilePair(
        b=lambda t: 4.0 * np.asarray(t) - 4.0 * np.asarray(t) ** 2,
        db=lambda t: 4.0 - 8.0 * np.asarray(t),
        a=lambda t: 2.0 - 8.0 * np.asarray(t),
        alpha=0.0,
        beta=1.0,
        name="s3",
    )


def gm_section(t) -> np.ndarray:
    """Representatives with first row ``(t, sqrt(1 - t^2))``, one per level."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    zero = np.zeros_like(t)
    a = np.stack([t, zero, zero, zero], axis=-1)
    b = np.stack([np.sqrt(np.clip(1 - t * t, 0, None)), zero, zero, zero], axis=-1)
    return complete_row(a, b).matrix


def gm_profile() -> LevelProfilePair:
    """Profile of the quotient function evaluated along :func:`gm_section`.

    ``b`` is the squared gradient and ``a`` the quotient Laplacian at the
    section points, so the endpoint values include the orbit correction.
    ``b'`` uses the transnormal identity ``b = 1 - t^2``.
    """
    def _wrap(fn):
        def g(t):
            t_arr = np.asarray(t, dtype=float)
            out = fn(gm_section(t_arr))
            return float(out[0]) if t_arr.ndim == 0 else out

        return g

    return LevelProfilePair(
        b=_wrap(grad_F_norm2),
        db=lambda t: -2.0 * np.asarray(t),
        a=_wrap(quotient_laplacian),
        alpha=-1.0,
        beta=1.0,
        name="gm",
    )


PROFILES = {"sp2": sp2_profile, "gm": gm_profile, "s3": s3_profile}
FOCAL_CODIMS = {"sp2": (7, 7), "gm": (7, 7), "s3": (1, 3)}


def profile_table(p: LevelProfilePair, points: int = 201, lo: float = -0.99, hi: float = 0.99) -> np.ndarray:
    """Rows ``(t, b, a, h)`` on a uniform grid.

    The grid ``[lo, hi]`` is relative to the symmetric interval ``[-1, 1]``
    and is mapped affinely onto ``[alpha, beta]``.
    """
    s = np.linspace(lo, hi, points)
    t = p.alpha + (s + 1.0) * 0.5 * (p.beta - p.alpha)
    b = np.asarray(p.b(t), dtype=float)
    a = np.asarray(p.a(t), dtype=float)
    h = mean_curvature_profile(p, t)
    return np.column_stack([t, b, a, h])


# ----------------------------------------------------------------------------
# checks against the Sp(2) calculus


def _composed(u: Callable, name: str = "u(F)") -> ScalarField:
    return ScalarField(lambda Q: u(F_eval(Q)), name=name)


def conformal_profile_check(u: Callable, du: Callable, samples: int = 50, seed=0, n: int = 10):
    """Max deviation of deformed-profile predictions from deformed-metric finite differences.

    Returns ``(gradient_residual, laplacian_residual)`` for ``F`` on Sp(2)
    under ``exp(2 u(F)) g``.
    """
    Q = haar_sample(seed, samples).matrix
    t = F_eval(Q)
    metric = ConformalMetric(STANDARD_METRIC, _composed(u))
    p = conformal_deform(sp2_profile(), u, du, n)
    g2 = gradient_norm2(REAL_PART_FIELD, Q, metric)
    lap = numeric_laplacian(REAL_PART_FIELD, Q, metric)
    return float(np.max(np.abs(g2 - p.b(t)))), float(np.max(np.abs(lap - p.a(t))))


def hessian_deform_check(Q, u: Sp2Tangent, v: Sp2Tangent, u_func: Callable, du: Callable) -> float:
    """``|H~(X, Y) - (H(X, Y) + u'(f) b(f) <X, Y> - 2 u'(f) X(f) Y(f))|`` for ``F`` on Sp(2).

    The left side is the finite-difference Hessian in the deformed metric;
    the right side uses the closed-form Hessian of the base metric.
    """
    Q = as_matrix(Q)
    t = F_eval(Q)
    metric = ConformalMetric(STANDARD_METRIC, _composed(u_func))
    lhs = numeric_hessian(REAL_PART_FIELD, Q, u, v, metric)
    g = grad_F_algebra(Q).coords
    Xf = STANDARD_METRIC.inner(u.xi.coords, g)
    Yf = STANDARD_METRIC.inner(v.xi.coords, g)
    uv = STANDARD_METRIC.inner(u.xi.coords, v.xi.coords)
    rhs = hessian_F_closed(Q, u, v) + du(t) * (1 - t * t) * uv - 2 * du(t) * Xf * Yf
    return float(np.max(np.abs(lhs - rhs)))


@dataclass
class LiftResiduals:
    """Residuals of the Riemannian-submersion identities at sample points."""

    gradient: float
    laplacian: float
    horizontal: float
    samples: int
    seed: int


def lift_residuals(Q):
    """Per-point residuals ``(gradient, laplacian, horizontal)`` on the biquotient instance.

    * gradient: ``|grad F|^2 - (1 - f^2)``
    * laplacian: ``lap F - (lap f - Phi)``
    * horizontal: ``lap f - tr_horizontal H_F``
    """
    Q = as_matrix(Q)
    t = F_eval(Q)
    grad = grad_F_norm2(Q) - (1 - t * t)
    lapf = quotient_laplacian(Q)
    lap = laplacian_F_closed(Q) - (lapf - phi_numeric(Q))
    hor = lapf - horizontal_laplacian(Q)
    return grad, lap, hor


def submersion_lift_check(samples: int = 1000, seed=0) -> LiftResiduals:
    Q = haar_sample(seed, samples).matrix
    g, l, h = lift_residuals(Q)
    return LiftResiduals(
        float(np.max(np.abs(g))), float(np.max(np.abs(l))), float(np.max(np.abs(h))), int(samples), int(seed) if seed is not None else -1
    )
