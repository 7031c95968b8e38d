"""Verification suites and their serializable reports.

Each suite returns a list of :class:`VerificationReport`.  A report passes
iff its ``max_residual`` is at most its ``tolerance``.  Checks that assert a
negative result (a dependence that must *fail*) use the shortfall
``max(0, threshold - observed)`` as their residual with tolerance 0, so the
same rule applies.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from . import gromoll_meyer as gm
from . import levels
from . import munzner as mz
from .calculus import dependence_test, gradient_norm2, numeric_laplacian
from .sp2 import (
    STANDARD_METRIC,
    MetricWeights,
    Sp2Algebra,
    Sp2Element,
    Sp2Tangent,
    bracket,
    closed_form_connection,
    complete_row,
    covariant_derivative_along,
    geodesic_step,
    haar_sample,
    levi_civita_left_invariant,
    qexpm,
    qmatmul,
)
from .sp2_function import (
    FocalSide,
    F_eval,
    REAL_PART_FIELD,
    grad_F_norm2,
    laplacian_F_closed,
    normal_geodesic_trace,
    shape_spectrum,
)
from .errors import DomainError


@dataclass
class VerificationReport:
    """Outcome of one numerical check."""

    check: str
    samples: int
    seed: Optional[int]
    tolerance: float
    max_residual: float
    passed: bool
    wall_time: float
    weights: Optional[List[float]] = None
    notes: List[str] = field(default_factory=list)
    data: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        return cls(**d)


def _clean(x):
    """Convert numpy containers and scalars into plain JSON types."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else repr(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def _report(check, samples, seed, tol, residual, timer, weights=None, notes=(), data=None, negative=False):
    residual = float(residual)
    return VerificationReport(
        check=check,
        samples=int(samples),
        seed=None if seed is None else int(seed),
        tolerance=float(tol),
        max_residual=residual,
        passed=bool(residual <= tol),
        wall_time=float(timer.elapsed),
        weights=None if weights is None else [float(w) for w in weights],
        notes=list(notes) + (["negative check: residual is the shortfall below the required spread"] if negative else []),
        data=_clean(data or {}),
    )


def _pick(tol, default):
    return default if tol is None else float(tol)


def _generic_point(t0: float):
    """A point with ``F = t0`` and ``|b| > 0``."""
    r = math.sqrt(max(0.0, 1.0 - t0 * t0))
    return complete_row([t0, r / math.sqrt(2), 0, 0], [0, 0, r / math.sqrt(2), 0])


# ----------------------------------------------------------------------------
# Sp(2)


def check_connection(pairs: int = 200, seed=42, tol=None) -> List[VerificationReport]:
    rng = np.random.default_rng(seed)
    out = []
    with _Timer() as tm:
        X = Sp2Algebra.from_coords(rng.standard_normal((pairs, 10)))
        Y = Sp2Algebra.from_coords(rng.standard_normal((pairs, 10)))
        Z = Sp2Algebra.from_coords(rng.standard_normal((pairs, 10)))
        koszul = levi_civita_left_invariant(X, Y)
        dev = np.max(np.abs(koszul.coords - closed_form_connection(X, Y).coords))
    out.append(_report("connection.closed_form", pairs, seed, _pick(tol, 1e-12), dev, tm))
    with _Timer() as tm:
        tors = levi_civita_left_invariant(X, Y) - levi_civita_left_invariant(Y, X) - bracket(X, Y)
        res = np.max(np.abs(tors.coords))
    out.append(_report("connection.torsion", pairs, seed, _pick(tol, 1e-12), res, tm))
    with _Timer() as tm:
        ip = STANDARD_METRIC.inner
        comp = ip(levi_civita_left_invariant(X, Y).coords, Z.coords) + ip(Y.coords, levi_civita_left_invariant(X, Z).coords)
        res_inv = float(np.max(np.abs(comp)))
        res_fd = _metric_compat_fd(rng, 20)
    out.append(
        _report(
            "connection.metric_compatibility",
            pairs,
            seed,
            _pick(tol, 1e-6),
            max(res_inv, res_fd),
            tm,
            notes=["left-invariant fields (exact) and non-invariant fields along curves (finite differences)"],
            data={"left_invariant": res_inv, "finite_difference": res_fd},
        )
    )
    return out


def _metric_compat_fd(rng, n: int) -> float:
    """``d/ds <X, Y> = <DX, Y> + <X, DY>`` along ``s -> Q exp(s zeta)`` for non-invariant X, Y."""
    worst = 0.0
    for _ in range(n):
        Q = haar_sample(rng).matrix
        zeta = Sp2Algebra.from_coords(rng.standard_normal(10)).matrix
        cx = rng.standard_normal((3, 10))
        cy = rng.standard_normal((3, 10))

        def curve(s):
            return Sp2Element(qmatmul(Q, qexpm(s * zeta)), check=False)

        def make(c):
            def field(s):
                return Sp2Tangent(curve(s), Sp2Algebra.from_coords(c[0] + s * c[1] + s * s * c[2]))

            return field

        X, Y = make(cx), make(cy)
        h = 1e-5
        lhs = (
            STANDARD_METRIC.inner(X(h).xi.coords, Y(h).xi.coords) - STANDARD_METRIC.inner(X(-h).xi.coords, Y(-h).xi.coords)
        ) / (2 * h)
        DX = covariant_derivative_along(X, curve, 0.0)
        DY = covariant_derivative_along(Y, curve, 0.0)
        rhs = STANDARD_METRIC.inner(DX.xi.coords, Y(0.0).xi.coords) + STANDARD_METRIC.inner(X(0.0).xi.coords, DY.xi.coords)
        worst = max(worst, abs(float(lhs - rhs)))
    return worst


def check_geodesic(t0: float = 0.0, sign: int = 1, tol=None) -> List[VerificationReport]:
    out = []
    with _Timer() as tm:
        Q0 = _generic_point(t0)
        tr = normal_geodesic_trace(Q0, sign)
        expected = math.pi / 2 - sign * math.asin(t0)
        err = abs(tr.arc_length - expected)
        end = tr.endpoint.matrix
        target = 1.0 if sign > 0 else -1.0
        shape = max(
            abs(end[0, 0, 0] - target),
            float(np.max(np.abs(end[0, 0, 1:]))),
            float(np.max(np.abs(end[0, 1]))),
            float(np.max(np.abs(end[1, 0]))),
            abs(float(np.linalg.norm(end[1, 1])) - 1.0),
        )
        s = tr.path.s
        F_dev = float(np.max(np.abs(tr.levels() - np.sin(math.asin(t0) + sign * s))))
    side = tr.side.value
    out.append(
        _report(
            "geodesic.arc_length",
            1,
            None,
            _pick(tol, 1e-4),
            max(err, F_dev),
            tm,
            data={"t0": t0, "sign": sign, "arc_length": tr.arc_length, "expected": expected, "level_deviation": F_dev, "side": side},
        )
    )
    out.append(
        _report(
            "geodesic.endpoint_diagonal",
            1,
            None,
            _pick(tol, 1e-6),
            shape if tr.side != FocalSide.REGULAR else np.inf,
            tm,
            data={"side": side, "endpoint_row0": end[0], "d": end[1, 1]},
        )
    )
    with _Timer() as tm:
        worst = _velocity_covariant_derivative(tr)
    out.append(_report("geodesic.acceleration", 1, None, _pick(tol, 1e-6), worst, tm, notes=["covariant derivative of the velocity at path nodes"]))
    return out


def _velocity_covariant_derivative(tr, nodes: int = 10, h: float = 1e-5) -> float:
    pts = tr.path.points.matrix
    vel = tr.path.velocities
    idx = np.linspace(0, len(pts) - 2, nodes).astype(int)
    worst = 0.0
    for k in idx:
        Q, c = pts[k], vel[k]

        def state(tau, Q=Q, c=c):
            if tau == 0.0:
                return Q, c
            return geodesic_step(Q, c, tau)

        def curve(tau):
            return Sp2Element(state(tau)[0], check=False)

        def field(tau):
            P, cc = state(tau)
            return Sp2Tangent(Sp2Element(P, check=False), Sp2Algebra.from_coords(STANDARD_METRIC.from_orthonormal(cc)))

        D = covariant_derivative_along(field, curve, 0.0, h=h)
        worst = max(worst, float(np.max(np.abs(STANDARD_METRIC.to_orthonormal(D.xi.coords)))))
    return worst


def verify_sp2(samples: int = 10000, seed=42, tol=None) -> List[VerificationReport]:
    out = []
    Q = haar_sample(seed, samples).matrix
    t = F_eval(Q)
    with _Timer() as tm:
        res = np.max(np.abs(grad_F_norm2(Q) - (1 - t * t)))
    out.append(_report("sp2.transnormal.closed_form", samples, seed, _pick(tol, 1e-12), res, tm))
    with _Timer() as tm:
        res = np.max(np.abs(gradient_norm2(REAL_PART_FIELD, Q) - (1 - t * t)))
    out.append(_report("sp2.transnormal.finite_difference", samples, seed, _pick(tol, 1e-6), res, tm))
    with _Timer() as tm:
        res = np.max(np.abs(laplacian_F_closed(Q) + 7 * t))
    out.append(_report("sp2.laplacian.closed_form", samples, seed, _pick(tol, 1e-10), res, tm))
    with _Timer() as tm:
        lap = numeric_laplacian(REAL_PART_FIELD, Q)
        dep = dependence_test(np.column_stack([t, lap]), tol=_pick(tol, 1e-3), trim=0.95)
        fit_err = float(np.max(np.abs(dep.fitted + 7 * dep.centers)))
    out.append(
        _report(
            "sp2.laplacian.dependence",
            samples,
            seed,
            _pick(tol, 1e-3),
            max(dep.max_spread, fit_err),
            tm,
            notes=dep.notes + ["residual is max(in-bin spread, |fitted a(t) + 7t|)"],
            data={"max_spread": dep.max_spread, "fitted_error": fit_err, "centers": dep.centers, "fitted": dep.fitted},
        )
    )
    out.append(check_spectrum(200, seed, tol))
    out.extend(check_connection(200, seed, tol))
    for t0 in (0.0, 0.5):
        out.extend(check_geodesic(t0, 1, tol))
    return out


def check_spectrum(points: int = 200, seed=42, tol=None) -> VerificationReport:
    rng = np.random.default_rng(seed)
    with _Timer() as tm:
        worst = 0.0
        done = 0
        branches = set()
        while done < points:
            Q = haar_sample(rng).matrix
            bn = float(np.linalg.norm(Q[0, 1]))
            if bn <= 0.1 or abs(Q[0, 0, 0]) > 0.99:
                continue
            r = shape_spectrum(Q, tol=np.inf)
            branches.add(r.branch)
            worst = max(worst, r.deviation)
            done += 1
        # the minimal level: curvatures 0, |b|, -|b|
        P = complete_row([0, 0.5 * math.sqrt(3), 0, 0], [0.5, 0, 0, 0])
        r0 = shape_spectrum(P, tol=np.inf)
        zero_dev = float(np.max(np.abs(np.array([v for v, _ in r0.eigenvalues]) - np.array([0.0, 0.5, -0.5]))))
    return _report(
        "sp2.spectrum",
        points,
        seed,
        _pick(tol, 1e-8),
        max(worst, r0.deviation, zero_dev),
        tm,
        notes=["closed-form principal curvatures against the eigen-solve of the restricted Hessian"],
        data={"max_deviation": worst, "zero_level_spectrum": r0.eigenvalues, "branches": sorted(branches)},
    )


def verify_metric(weights: MetricWeights, samples: int = 10000, seed=42, tol=None) -> List[VerificationReport]:
    """Transnormality and isoparametricity of F under another left-invariant metric.

    The asserted outcome is the failure of the Laplacian dependence: some
    interior bin must show a spread of at least ``1e-2``.
    """
    Q = haar_sample(seed, samples).matrix
    t = F_eval(Q)
    w = weights.as_tuple()
    threshold = 1e-2
    with _Timer() as tm:
        g2 = gradient_norm2(REAL_PART_FIELD, Q, weights)
        trans = dependence_test(np.column_stack([t, g2]), tol=1e-6, trim=0.95)
        lap = numeric_laplacian(REAL_PART_FIELD, Q, weights)
        dep = dependence_test(np.column_stack([t, lap]), tol=threshold, trim=0.95)
        interior = float(np.max(dep.interior_spreads()))
        # best affine fit of the Laplacian against F, for the record
        slope = float(np.polyfit(t, lap, 1)[0])
    return [
        _report(
            "metric.not_isoparametric",
            samples,
            seed,
            0.0,
            max(0.0, threshold - interior),
            tm,
            weights=w,
            notes=dep.notes + ["transnormality is recorded in data, not asserted"],
            data={
                "max_interior_spread": interior,
                "required_spread": threshold,
                "laplacian_slope": slope,
                "transnormal_spread": trans.max_spread,
                "transnormal_at_1e-6": trans.passed,
                "max_dev_from_1_minus_t2": float(np.max(np.abs(g2 - 1 + t * t))),
            },
            negative=True,
        )
    ]


# ----------------------------------------------------------------------------
# biquotient


def verify_gm(samples: int = 10000, seed=42, tol=None) -> List[VerificationReport]:
    out = []
    rng = np.random.default_rng(seed)
    Q = haar_sample(rng, samples).matrix
    t = F_eval(Q)
    with _Timer() as tm:
        g2 = grad_F_norm2(Q)
        dep = dependence_test(np.column_stack([t, g2]), tol=_pick(tol, 1e-8), trim=0.95)
        fit_err = float(np.max(np.abs(dep.fitted - (1 - dep.centers**2))))
    out.append(
        _report(
            "gm.transnormal",
            samples,
            seed,
            _pick(tol, 1e-8),
            max(dep.max_spread, fit_err),
            tm,
            notes=["|grad f|^2 against f over quotient samples; fitted b compared with 1 - t^2"],
            data={"max_spread": dep.max_spread, "fitted_error": fit_err},
        )
    )
    threshold = 0.1
    with _Timer() as tm:
        cond = gm.gram_condition(Q)
        keep = cond <= gm.GRAM_CONDITION_MAX
        lap = gm.quotient_laplacian(Q[keep])
        dep = dependence_test(np.column_stack([t[keep], lap]), tol=threshold, trim=0.95)
        near0 = dep.spread_near(0.0)
    out.append(
        _report(
            "gm.not_isoparametric",
            int(keep.sum()),
            seed,
            0.0,
            max(0.0, threshold - near0),
            tm,
            notes=dep.notes,
            data={"spread_near_zero": near0, "required_spread": threshold, "excluded_degenerate": int((~keep).sum())},
            negative=True,
        )
    )
    with _Timer() as tm:
        wmax = gm.normal_form_point(*gm.WITNESS_PHI_MAX).matrix
        wzero = gm.normal_form_point(*gm.WITNESS_PHI_ZERO).matrix
        p_max, p_zero = float(gm.phi_numeric(wmax)), float(gm.phi_numeric(wzero))
        target = 4 * math.sqrt(2) / 15
        res = max(abs(p_max - target), abs(p_zero))
        curv = [float(gm.mean_curvature_gm(wzero)), float(gm.mean_curvature_gm(wmax))]
    out.append(
        _report(
            "gm.phi_witnesses",
            2,
            None,
            _pick(tol, 1e-9),
            res,
            tm,
            notes=["phi at two points of the zero level; mean curvature is -phi there, so it is not constant"],
            data={"phi": [p_zero, p_max], "expected": [0.0, target], "mean_curvature": curv},
        )
    )
    n_zero = min(200, samples)
    with _Timer() as tm:
        Z = gm.sample_zero_level(n_zero, rng).matrix
        d = gm.zero_level_data(Z)
        res = float(np.max(np.abs(gm.phi_closed(*d) - gm.phi_numeric(Z))))
        gram = float(np.max(np.abs(gm.gram_matrix(Z, closed_form=True).g - gm.gram_matrix(Z).g)))
        phi_vals = gm.phi_numeric(Z)
    out.append(
        _report(
            "gm.phi_closed_vs_numeric",
            n_zero,
            seed,
            _pick(tol, 1e-10),
            res,
            tm,
            data={"gram_closed_vs_numeric": gram, "phi_range": [float(phi_vals.min()), float(phi_vals.max())]},
        )
    )
    out.append(check_s3_invariance(50, 20, rng, seed, tol))
    with _Timer() as tm:
        m = min(samples, 1000)
        g, l, h = levels.lift_residuals(Q[:m])
        res_lift = float(max(np.max(np.abs(g)), np.max(np.abs(l)), np.max(np.abs(h))))
        conn = max(abs(gm.phi_from_connection(Z[k]) - float(gm.phi_numeric(Z[k]))) for k in range(min(50, n_zero)))
    out.append(
        _report(
            "gm.submersion_identities",
            m,
            seed,
            _pick(tol, 1e-10),
            res_lift,
            tm,
            notes=["|grad F|^2 = 1 - f^2; lap F = lap f - Phi; lap f = horizontal trace of H_F"],
            data={"gradient": float(np.max(np.abs(g))), "laplacian": float(np.max(np.abs(l))), "horizontal": float(np.max(np.abs(h)))},
        )
    )
    out.append(
        _report(
            "gm.phi_from_connection",
            min(50, n_zero),
            seed,
            _pick(tol, 1e-6),
            conn,
            tm,
            notes=["orbit mean curvature paired with grad F from covariant derivatives of the orbit frame"],
        )
    )
    return out


def check_s3_invariance(bases: int = 50, translates: int = 20, rng=None, seed=None, tol=None) -> VerificationReport:
    rng = np.random.default_rng(rng)
    with _Timer() as tm:
        Q = haar_sample(rng, bases).matrix
        q = rng.standard_normal((translates, bases, 4))
        q /= np.linalg.norm(q, axis=-1, keepdims=True)
        R = gm.s3_act(q, np.broadcast_to(Q, (translates,) + Q.shape)).matrix
        dF = np.max(np.abs(F_eval(R) - F_eval(Q)))
        dg = np.max(np.abs(grad_F_norm2(R) - grad_F_norm2(Q)))
        dphi = np.max(np.abs(gm.phi_numeric(R) - gm.phi_numeric(Q)))
    return _report(
        "gm.s3_invariance",
        bases * translates,
        seed,
        _pick(tol, 1e-10),
        max(dF, dg, dphi),
        tm,
        data={"F": dF, "grad_norm2": dg, "phi": dphi},
    )


# ----------------------------------------------------------------------------
# topology and profiles


def munzner_report(n: int, m1: int, m_1: int, orientable: bool = False) -> VerificationReport:
    with _Timer() as tm:
        table = mz.munzner_cohomology(mz.FocalData(n, m1, m_1, orientable))
        data = table.to_dict()
        if n == 3:
            try:
                data["s4_case"] = mz.classify_s4_case(table).label
            except mz.UnclassifiedError:
                data["s4_case"] = None
        ok = table.h0_is_ring()
    return _report("munzner.cohomology", 0, None, 0.0, 0.0 if ok else 1.0, tm, notes=table.flags, data=data)


def profile_report(case: str, minimal: bool = False, points: int = 201, tol=None):
    """Codimension identities for a shipped profile plus its ``(t, b, a, h)`` table."""
    p = levels.PROFILES[case]()
    cm, cp = levels.FOCAL_CODIMS[case]
    with _Timer() as tm:
        lo, hi = levels.focal_codim_check(p, cm, cp)
        table = levels.profile_table(p, points)
    reports = [
        _report(
            "profile.focal_codim",
            points,
            None,
            _pick(tol, 1e-8),
            max(lo, hi),
            tm,
            data={"case": case, "codims": [cm, cp], "residuals": [lo, hi], "domain": [p.alpha, p.beta]},
        )
    ]
    if minimal:
        with _Timer() as tm:
            try:
                t0 = levels.minimal_level(p, cm, cp)
                h0 = float(abs(levels.mean_curvature_profile(p, t0)))
                notes = []
            except DomainError as exc:
                # the improper case has no bracket; report it as a failed check
                t0, h0, notes = None, np.inf, [str(exc)]
        reports.append(_report("profile.minimal_level", points, None, _pick(tol, 1e-10), h0, tm, notes=notes, data={"case": case, "t0": t0}))
    return reports, table
