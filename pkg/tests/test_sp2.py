import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ks_2samp

from isoparam import quaternion as qt
from isoparam.errors import DomainError
from isoparam.sp2 import (
    BIINVARIANT_METRIC,
    STANDARD_METRIC,
    MetricWeights,
    Sp2Algebra,
    Sp2Element,
    Sp2Tangent,
    bracket,
    closed_form_connection,
    complete_row,
    covariant_derivative_along,
    exp_algebra,
    geodesic_integrate,
    haar_sample,
    inner,
    levi_civita_left_invariant,
    orthogonality_residual,
    qexpm,
    qmatmul,
    qstar,
    retract,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def rand_algebra(rng, shape=()):
    return Sp2Algebra.from_coords(rng.standard_normal(shape + (10,)))


# ----------------------------------------------------------------------------
# group and algebra


def test_algebra_structure():
    xi = Sp2Algebra.from_parts([3.0, 1, 0, 0], [1.0, 2, 3, 4], [5.0, 0, 0, 1])
    assert xi.x[0] == 0.0 and xi.z[0] == 0.0
    np.testing.assert_array_equal(xi.matrix[1, 0], -qt.qconj(xi.y))
    # skew-Hermitian
    np.testing.assert_allclose(qstar(xi.matrix), -xi.matrix)
    np.testing.assert_array_equal(Sp2Algebra.from_coords(xi.coords).matrix, xi.matrix)


def test_bracket_closes():
    rng = np.random.default_rng(0)
    X, Y = rand_algebra(rng), rand_algebra(rng)
    B = qmatmul(X.matrix, Y.matrix) - qmatmul(Y.matrix, X.matrix)
    np.testing.assert_allclose(Sp2Algebra.project(B).matrix, B, atol=1e-14)
    np.testing.assert_allclose(bracket(X, Y).matrix, B, atol=1e-14)


def test_exponential_lands_in_group():
    rng = np.random.default_rng(1)
    X = rand_algebra(rng, (20,))
    E = exp_algebra(X)
    assert np.max(orthogonality_residual(E.matrix)) < 1e-13
    np.testing.assert_allclose(qexpm(np.zeros((2, 2, 4))), Sp2Element.identity().matrix, atol=1e-15)


def test_element_validation():
    with pytest.raises(DomainError):
        Sp2Element(2 * Sp2Element.identity().matrix)
    d = Sp2Element.diag(qt.ONE, qt.J)
    assert d.residual() < 1e-15
    np.testing.assert_array_equal(d.d, qt.J)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_retract_properties(seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((2, 2, 4))
    Q = retract(M)
    assert Q.residual() < 1e-12
    np.testing.assert_allclose(retract(Q.matrix).matrix, Q.matrix, atol=1e-14)


def test_retract_examples():
    I = Sp2Element.identity().matrix
    np.testing.assert_allclose(retract(I).matrix, I)
    np.testing.assert_allclose(retract(2 * I).matrix, I)
    with pytest.raises(DomainError):
        retract(np.zeros((2, 2, 4)))


def test_haar_deterministic_and_symmetric():
    A = haar_sample(5, 10).matrix
    B = haar_sample(5, 10).matrix
    np.testing.assert_array_equal(A, B)
    F = haar_sample(123, 100000).matrix[:, 0, 0, 0]
    assert abs(F.mean()) < 3 * F.std() / np.sqrt(F.size)
    # two-sample comparison of F and -F
    assert ks_2samp(F[:50000], -F[50000:]).pvalue > 1e-3


def test_complete_row():
    Q = complete_row(qt.ONE, np.zeros(4))
    np.testing.assert_allclose(Q.a, qt.ONE)
    Q = complete_row([0, 1 / np.sqrt(2), 0, 0], [0.5, 0.5, 0, 0])
    assert Q.residual() < 1e-12
    np.testing.assert_allclose(Q.b, [0.5, 0.5, 0, 0])
    with pytest.raises(DomainError):
        complete_row(qt.ONE, qt.ONE)


# ----------------------------------------------------------------------------
# metrics and connection


def test_inner_examples():
    Q = haar_sample(2)
    x_only = Sp2Algebra.from_parts(qt.I, np.zeros(4), np.zeros(4))
    y_only = Sp2Algebra.from_parts(np.zeros(4), qt.J, np.zeros(4))
    assert inner(Sp2Tangent(Q, x_only), Sp2Tangent(Q, x_only)) == pytest.approx(1.0)
    assert inner(Sp2Tangent(Q, x_only), Sp2Tangent(Q, y_only)) == 0.0
    I = Sp2Element.identity()
    rng = np.random.default_rng(0)
    X, Y = rand_algebra(rng), rand_algebra(rng)
    assert inner(Sp2Tangent(Q, X), Sp2Tangent(Q, Y)) == inner(Sp2Tangent(I, X), Sp2Tangent(I, Y))
    with pytest.raises(DomainError):
        inner(Sp2Tangent(Q, X), Sp2Tangent(I, Y))


def test_biinvariant_weights_match_trace_form():
    rng = np.random.default_rng(3)
    X = rand_algebra(rng)
    tr = -float(np.sum(qmatmul(X.matrix, X.matrix)[[0, 1], [0, 1], 0]))
    assert BIINVARIANT_METRIC.inner(X.coords, X.coords) == pytest.approx(tr)


def test_weights_validation():
    with pytest.raises(DomainError):
        MetricWeights(1.0, 0.0, 1.0)


def test_orthonormal_basis():
    for m in (STANDARD_METRIC, BIINVARIANT_METRIC, MetricWeights(0.5, 3.0, 2.0)):
        B = m.basis().coords
        G = np.einsum("ai,i,bi->ab", B, m.diag, B)
        np.testing.assert_allclose(G, np.eye(10), atol=1e-14)


def test_connection_closed_form():
    rng = np.random.default_rng(7)
    X, Y = rand_algebra(rng, (200,)), rand_algebra(rng, (200,))
    dev = np.abs(levi_civita_left_invariant(X, Y).coords - closed_form_connection(X, Y).coords)
    assert dev.max() < 1e-12


def test_connection_examples():
    d = Sp2Algebra.from_parts(qt.I, np.zeros(4), qt.I)
    np.testing.assert_allclose(levi_civita_left_invariant(d, d).coords, 0, atol=1e-15)
    xi1 = Sp2Algebra.from_parts(np.zeros(4), qt.ONE, np.zeros(4))
    xi2 = Sp2Algebra.from_parts(np.zeros(4), np.zeros(4), qt.I)
    D = levi_civita_left_invariant(xi1, xi2) - bracket(xi1, xi2) * 0.5
    np.testing.assert_allclose(D.y, 0.5 * qt.I, atol=1e-15)


@pytest.mark.parametrize("m", [STANDARD_METRIC, BIINVARIANT_METRIC, MetricWeights(2.0, 0.7, 1.3)])
def test_torsion_free_and_compatible(m):
    rng = np.random.default_rng(11)
    X, Y, Z = (rand_algebra(rng, (100,)) for _ in range(3))
    nab = lambda a, b: levi_civita_left_invariant(a, b, m)  # noqa: E731
    tors = nab(X, Y) - nab(Y, X) - bracket(X, Y)
    assert np.abs(tors.coords).max() < 1e-12
    comp = m.inner(nab(X, Y).coords, Z.coords) + m.inner(Y.coords, nab(X, Z).coords)
    assert np.abs(comp).max() < 1e-12


def test_biinvariant_connection_is_half_bracket():
    rng = np.random.default_rng(4)
    X, Y = rand_algebra(rng, (50,)), rand_algebra(rng, (50,))
    np.testing.assert_allclose(levi_civita_left_invariant(X, Y, BIINVARIANT_METRIC).coords, 0.5 * bracket(X, Y).coords, atol=1e-13)


# ----------------------------------------------------------------------------
# curves


def test_covariant_derivative_invariant_field():
    rng = np.random.default_rng(9)
    Q = haar_sample(rng).matrix
    eta, xi = rand_algebra(rng), rand_algebra(rng)
    curve = lambda s: Sp2Element(qmatmul(Q, qexpm(s * eta.matrix)), check=False)  # noqa: E731
    field = lambda s: Sp2Tangent(curve(s), xi)  # noqa: E731
    D = covariant_derivative_along(field, curve, 0.0)
    np.testing.assert_allclose(D.xi.coords, levi_civita_left_invariant(eta, xi).coords, atol=1e-9)


def test_covariant_derivative_metric_compatibility():
    rng = np.random.default_rng(10)
    Q = haar_sample(rng).matrix
    zeta = rand_algebra(rng).matrix
    cx, cy = rng.standard_normal((2, 3, 10))
    curve = lambda s: Sp2Element(qmatmul(Q, qexpm(s * zeta)), check=False)  # noqa: E731

    def make(c):
        return lambda s: Sp2Tangent(curve(s), Sp2Algebra.from_coords(c[0] + s * c[1] + s**2 * c[2]))

    X, Y = make(cx), make(cy)
    h = 1e-5
    ip = STANDARD_METRIC.inner
    lhs = (ip(X(h).xi.coords, Y(h).xi.coords) - ip(X(-h).xi.coords, Y(-h).xi.coords)) / (2 * h)
    rhs = ip(covariant_derivative_along(X, curve, 0.0).xi.coords, cy[0]) + ip(cx[0], covariant_derivative_along(Y, curve, 0.0).xi.coords)
    assert abs(lhs - rhs) < 1e-6


def test_covariant_derivative_step_underflow():
    I = Sp2Element.identity()
    with pytest.raises(DomainError):
        covariant_derivative_along(lambda s: Sp2Tangent(I, Sp2Algebra.zeros()), lambda s: I, 1e20)


def test_geodesic_one_parameter_subgroup():
    # y = 0 makes nabla_xi xi vanish, so the geodesic is exp(s xi)
    xi = Sp2Algebra.from_parts([0, 0.6, 0, 0], np.zeros(4), [0, 0, 0, 0.8])
    Q0 = haar_sample(3)
    path = geodesic_integrate(Q0, Sp2Tangent(Q0, xi), 2.0)
    expect = qmatmul(Q0.matrix, qexpm(2.0 * xi.matrix))
    np.testing.assert_allclose(path.endpoint.matrix, expect, atol=1e-8)
    assert abs(path.arc_length - 2.0) < 1e-8


def test_geodesic_speed_and_zero_length():
    rng = np.random.default_rng(5)
    Q0 = haar_sample(rng)
    c = rng.standard_normal(10)
    c /= np.linalg.norm(c)
    v0 = Sp2Tangent(Q0, Sp2Algebra.from_coords(c))
    path = geodesic_integrate(Q0, v0, 1.5)
    assert np.abs(path.speed - 1).max() < 1e-8
    assert abs(path.arc_length - 1.5) < 1e-8
    assert np.max(orthogonality_residual(path.points.matrix)) < 1e-12
    np.testing.assert_allclose(geodesic_integrate(Q0, v0, 0.0).endpoint.matrix, Q0.matrix, atol=1e-15)
    with pytest.raises(DomainError):
        geodesic_integrate(Q0, Sp2Tangent(Q0, Sp2Algebra.from_coords(2 * c)), 1.0)


def test_geodesic_other_metric_speed():
    m = MetricWeights(1.0, 2.0, 1.0)
    rng = np.random.default_rng(6)
    Q0 = haar_sample(rng)
    c = rng.standard_normal(10)
    c /= np.linalg.norm(c)
    v0 = Sp2Tangent(Q0, Sp2Algebra.from_coords(m.from_orthonormal(c)))
    path = geodesic_integrate(Q0, v0, 1.0, m=m)
    assert np.abs(path.speed - 1).max() < 1e-8
