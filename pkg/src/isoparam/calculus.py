"""Finite-difference calculus of scalar fields on Sp(2) and a functional-dependence tester.

Derivatives are taken along the curves ``s -> Q exp(s e_k)`` for the fixed
orthonormal basis ``e_k`` of the metric.  The Hessian is the first central
difference of the finite-difference gradient, corrected by the Levi-Civita
connection of the left-invariant metric.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .errors import InsufficientSamplesError
from .sp2 import (
    STANDARD_METRIC,
    MetricWeights,
    Sp2Algebra,
    Sp2Tangent,
    Sp2Element,
    as_matrix,
    connection_coefficients,
    haar_sample,
    qexpm,
    qmatmul,
)

GRADIENT_STEP = 1e-5
HESSIAN_STEP = 1e-4

CLOSED_FORM_TOL = 1e-6
FINITE_DIFFERENCE_TOL = 1e-3
FOCAL_TRIM = 0.95


@dataclass
class ScalarField:
    """A smooth function on Sp(2).

    `evaluate` maps arrays of shape ``(..., 2, 2, 4)`` to ``(...)`` and must
    broadcast over arbitrary leading axes.  The optional closed forms
    `gradient_norm2` and `laplacian` are trusted only for `metric`.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    name: str = "field"
    gradient_norm2: Optional[Callable[[np.ndarray], np.ndarray]] = None
    laplacian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    metric: Optional[MetricWeights] = None

    def __call__(self, Q):
        return self.evaluate(as_matrix(Q))


def constant_field(value: float = 1.0) -> ScalarField:
    return ScalarField(lambda Q: np.full(np.shape(Q)[:-3], float(value)), name=f"constant({value})")


@dataclass(frozen=True)
class ConformalMetric:
    """The metric ``exp(2 u(Q)) <., .>`` for a left-invariant base metric."""

    base: MetricWeights
    log_factor: ScalarField


def _split(metric):
    if isinstance(metric, ConformalMetric):
        return metric.base, metric.log_factor
    return metric, None


@functools.lru_cache(maxsize=16)
def _shifts(weights, h):
    """``exp(+-h e_k)`` for the orthonormal basis: shape (10, 2, 2, 2, 4)."""
    basis = MetricWeights(*weights).basis().matrix
    steps = np.stack([basis * h, basis * -h], axis=1)
    out = qexpm(steps)
    out.setflags(write=False)
    return out


def directional_derivatives(field: ScalarField, Q, m: MetricWeights = STANDARD_METRIC, h: float = GRADIENT_STEP):
    """Central differences ``e_k f`` along the orthonormal basis of `m`; shape ``(..., 10)``."""
    Q = as_matrix(Q)
    pts = qmatmul(Q[..., None, None, :, :, :], _shifts(m.as_tuple(), h))
    vals = field.evaluate(pts)
    return (vals[..., 0] - vals[..., 1]) / (2 * h)


def numeric_gradient(field: ScalarField, Q, metric=STANDARD_METRIC, h: float = GRADIENT_STEP) -> Sp2Tangent:
    """Finite-difference gradient, left-trivialized at `Q`."""
    m, u = _split(metric)
    d = directional_derivatives(field, Q, m, h)
    if u is not None:
        d = d * np.exp(-2 * u(Q))[..., None]
    Q = as_matrix(Q)
    return Sp2Tangent(Sp2Element(Q, check=False), Sp2Algebra.from_coords(m.from_orthonormal(d)))


def gradient_norm2(field: ScalarField, Q, metric=STANDARD_METRIC, h: float = GRADIENT_STEP):
    """``|grad f|^2`` in `metric` from finite differences."""
    m, u = _split(metric)
    d = directional_derivatives(field, Q, m, h)
    out = np.sum(d * d, axis=-1)
    if u is not None:
        out = out * np.exp(-2 * u(Q))
    return out


def hessian_matrix(field: ScalarField, Q, metric=STANDARD_METRIC, h: float = HESSIAN_STEP):
    """Hessian in the orthonormal frame ``e_k`` of the (base) metric; shape ``(..., 10, 10)``.

    Entry ``[j, k]`` is ``H(e_j, e_k) = e_j(e_k f) - (nabla_{e_j} e_k) f``.  The
    matrix is not symmetrized, so its asymmetry measures the discretization
    error.  For a :class:`ConformalMetric` the deformed connection
    ``nabla_X Y + X(u) Y + Y(u) X - <X, Y> grad u`` is used, still expressed
    in the base frame.
    """
    m, u = _split(metric)
    Q = as_matrix(Q)
    outer = _shifts(m.as_tuple(), h)
    d0 = directional_derivatives(field, Q, m, GRADIENT_STEP)
    dd = np.empty(Q.shape[:-3] + (10, 10))
    for j in range(10):
        dp = directional_derivatives(field, qmatmul(Q, outer[j, 0]), m, h)
        dm = directional_derivatives(field, qmatmul(Q, outer[j, 1]), m, h)
        dd[..., j, :] = (dp - dm) / (2 * h)
    gamma = connection_coefficients(m)
    H = dd - np.einsum("...l,jkl->...jk", d0, gamma)
    if u is not None:
        du = directional_derivatives(u, Q, m, GRADIENT_STEP)
        H = (
            H
            - du[..., :, None] * d0[..., None, :]
            - d0[..., :, None] * du[..., None, :]
            + np.sum(du * d0, axis=-1)[..., None, None] * np.eye(10)
        )
    return H


def numeric_hessian(field: ScalarField, Q, u: Sp2Tangent, v: Sp2Tangent, metric=STANDARD_METRIC, h: float = HESSIAN_STEP):
    """``H_f(u, v)`` from finite differences."""
    m, _ = _split(metric)
    H = hessian_matrix(field, Q, metric, h)
    cu = m.to_orthonormal(u.xi.coords)
    cv = m.to_orthonormal(v.xi.coords)
    return np.einsum("...j,...jk,...k->...", cu, H, cv)


def numeric_laplacian(field: ScalarField, Q, metric=STANDARD_METRIC, h: float = HESSIAN_STEP):
    """Trace of the finite-difference Hessian over an orthonormal frame of `metric`."""
    _, u = _split(metric)
    H = hessian_matrix(field, Q, metric, h)
    tr = np.trace(H, axis1=-2, axis2=-1)
    if u is not None:
        tr = tr * np.exp(-2 * u(Q))
    return tr


# ----------------------------------------------------------------------------
# functional dependence


@dataclass
class DependenceReport:
    """Outcome of :func:`dependence_test`.

    ``fitted`` is the in-bin polynomial (plus reference) evaluated at the
    bin center, i.e. a tabulated estimate of the profile function.
    """

    edges: np.ndarray
    centers: np.ndarray
    means: np.ndarray
    fitted: np.ndarray
    spreads: np.ndarray
    counts: np.ndarray
    max_spread: float
    tol: float
    passed: bool
    notes: list = dc_field(default_factory=list)

    def spread_near(self, t: float) -> float:
        """Spread of the bin whose range contains `t`."""
        idx = int(np.clip(np.searchsorted(self.edges, t) - 1, 0, len(self.spreads) - 1))
        return float(self.spreads[idx])

    def interior_spreads(self, margin: int = 1) -> np.ndarray:
        return self.spreads[margin : len(self.spreads) - margin]


def dependence_test(
    pairs,
    bins: int = 32,
    tol: float = CLOSED_FORM_TOL,
    reference: Optional[Callable] = None,
    degree: int = 2,
    trim: Optional[float] = None,
    min_per_bin: int = 10,
) -> DependenceReport:
    """Decide whether ``v`` is (numerically) a function of ``s``.

    Pairs are sorted by ``s`` and split into `bins` equal-count bins.  Within
    each bin a polynomial of `degree` in ``s`` is fitted to ``v`` (or to
    ``v - reference(s)``) and the spread is the largest absolute residual.
    The test passes iff the largest spread is at most `tol`.

    Parameters
    ----------
    pairs : array_like, shape (N, 2)
    trim : float, optional
        Drop pairs with ``|s| > trim`` before binning.

    Raises
    ------
    InsufficientSamplesError
        If any bin receives fewer than `min_per_bin` pairs.
    """
    pairs = np.asarray(pairs, dtype=float)
    s, v = pairs[:, 0], pairs[:, 1]
    if trim is not None:
        keep = np.abs(s) <= trim
        s, v = s[keep], v[keep]
    order = np.argsort(s, kind="stable")
    s, v = s[order], v[order]
    r = v - reference(s) if reference is not None else v
    if len(s) < bins * min_per_bin:
        raise InsufficientSamplesError(
            f"{len(s)} samples cannot fill {bins} bins with {min_per_bin} samples each"
        )
    chunks = np.array_split(np.arange(len(s)), bins)
    edges = np.empty(bins + 1)
    centers = np.empty(bins)
    means = np.empty(bins)
    fitted = np.empty(bins)
    spreads = np.empty(bins)
    counts = np.empty(bins, dtype=int)
    for i, idx in enumerate(chunks):
        sb, rb = s[idx], r[idx]
        edges[i] = sb[0]
        center = float(np.median(sb))
        width = max(sb[-1] - sb[0], 1e-300)
        x = (sb - center) / width
        coef = np.polynomial.polynomial.polyfit(x, rb, min(degree, len(idx) - 1))
        resid = rb - np.polynomial.polynomial.polyval(x, coef)
        centers[i] = center
        means[i] = float(np.mean(v[idx]))
        fitted[i] = coef[0] + (float(reference(np.array([center]))[0]) if reference is not None else 0.0)
        spreads[i] = float(np.max(np.abs(resid)))
        counts[i] = len(idx)
    edges[-1] = s[-1]
    max_spread = float(np.max(spreads))
    return DependenceReport(
        edges=edges,
        centers=centers,
        means=means,
        fitted=fitted,
        spreads=spreads,
        counts=counts,
        max_spread=max_spread,
        tol=float(tol),
        passed=bool(max_spread <= tol),
        notes=["certifies consistency with some function at sample resolution only; smoothness is not tested"],
    )


@dataclass
class TransnormalSummary:
    field: str
    metric: tuple
    samples: int
    seed: int
    transnormal: DependenceReport
    laplacian: DependenceReport
    closed_forms: bool
    notes: list = dc_field(default_factory=list)

    @property
    def is_transnormal(self) -> bool:
        return self.transnormal.passed

    @property
    def is_isoparametric(self) -> bool:
        return self.transnormal.passed and self.laplacian.passed

    @property
    def fitted_b(self):
        return self.transnormal.centers, self.transnormal.fitted

    @property
    def fitted_a(self):
        return self.laplacian.centers, self.laplacian.fitted


def transnormal_report(
    field: ScalarField,
    samples: int = 10000,
    seed: int = 42,
    metric=STANDARD_METRIC,
    bins: int = 32,
    tol: Optional[float] = None,
    trim: float = FOCAL_TRIM,
    use_closed_forms: bool = True,
) -> TransnormalSummary:
    """Test ``|grad f|^2 = b(f)`` and ``Lap f = a(f)`` on Haar samples.

    Closed forms attached to `field` are used when `use_closed_forms` is set
    and they were declared for `metric`; otherwise finite differences are
    used.  The default tolerance is 1e-6 for closed forms and 1e-3 for
    finite-difference pipelines.
    """
    Q = haar_sample(seed, samples).matrix
    s = field.evaluate(Q)
    closed = use_closed_forms and field.metric is not None and field.metric == metric
    if closed and field.gradient_norm2 is not None:
        g2 = field.gradient_norm2(Q)
        g_closed = True
    else:
        g2 = gradient_norm2(field, Q, metric)
        g_closed = False
    if closed and field.laplacian is not None:
        lap = field.laplacian(Q)
        l_closed = True
    else:
        lap = numeric_laplacian(field, Q, metric)
        l_closed = False
    all_closed = g_closed and l_closed
    if tol is None:
        tol = CLOSED_FORM_TOL if all_closed else FINITE_DIFFERENCE_TOL
    trans = dependence_test(np.column_stack([s, g2]), bins=bins, tol=tol, trim=trim)
    lapr = dependence_test(np.column_stack([s, lap]), bins=bins, tol=tol, trim=trim)
    weights = metric.base.as_tuple() if isinstance(metric, ConformalMetric) else metric.as_tuple()
    notes = [
        f"levels with |f| > {trim} excluded (focal neighbourhood)",
        "gradient: " + ("closed form" if g_closed else "finite differences"),
        "laplacian: " + ("closed form" if l_closed else "finite differences"),
    ]
    return TransnormalSummary(
        field=field.name,
        metric=weights,
        samples=int(samples),
        seed=int(seed),
        transnormal=trans,
        laplacian=lapr,
        closed_forms=all_closed,
        notes=notes,
    )
