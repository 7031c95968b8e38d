import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isoparam import quaternion as qt
from isoparam.calculus import dependence_test
from isoparam.errors import DomainError, FocalPointError
from isoparam.gromoll_meyer import (
    WITNESS_PHI_MAX,
    WITNESS_PHI_ZERO,
    OrbitPoint,
    flow_to_zero_level,
    frame_hessian,
    gram_matrix,
    horizontal_laplacian,
    is_normal_form,
    mean_curvature_gm,
    normal_form,
    normal_form_point,
    normalize,
    orbit_frame,
    orbit_generator,
    phi_closed,
    phi_from_connection,
    phi_numeric,
    quotient_laplacian,
    recover_action,
    s3_act,
    s3_pushforward,
    sample_zero_level,
    zero_level_data,
)
from isoparam.sp2 import STANDARD_METRIC, Sp2Algebra, Sp2Element, Sp2Tangent, haar_sample, qexpm, qmatmul
from isoparam.sp2_function import F_eval, grad_F_closed, grad_F_norm2

PHI_WITNESS = 4 * np.sqrt(2) / 15


def unit_quats(seed, n):
    q = np.random.default_rng(seed).standard_normal((n, 4))
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


@pytest.fixture(scope="module")
def zero_level():
    return sample_zero_level(200, seed=99)


# ----------------------------------------------------------------------------
# action and normal form


def test_action_identity_and_invariance():
    Q = haar_sample(1, 50)
    np.testing.assert_array_equal(s3_act(qt.ONE, Q).matrix, Q.matrix)
    q = unit_quats(2, 50)
    P = s3_act(q, Q)
    assert np.max(np.abs(F_eval(P) - F_eval(Q))) < 1e-14
    assert np.max(P.residual()) < 1e-13
    with pytest.raises(DomainError):
        s3_act([2.0, 0, 0, 0], Q)


def test_action_is_effective_and_a_group_action():
    Q = haar_sample(3)
    p, q = unit_quats(4, 2)
    np.testing.assert_allclose(s3_act(p, s3_act(q, Q)).matrix, s3_act(qt.qmul(p, q), Q).matrix, atol=1e-14)
    assert np.abs(s3_act(-q, Q).matrix - s3_act(q, Q).matrix).max() > 1e-3


def test_pushforward_isometry():
    rng = np.random.default_rng(5)
    Q = haar_sample(rng)
    u = Sp2Tangent(Q, Sp2Algebra.from_coords(rng.standard_normal(10)))
    v = Sp2Tangent(Q, Sp2Algebra.from_coords(rng.standard_normal(10)))
    for q in unit_quats(6, 10):
        pu, pv = s3_pushforward(q, u), s3_pushforward(q, v)
        assert abs(STANDARD_METRIC.inner(pu.xi.coords, pv.xi.coords) - STANDARD_METRIC.inner(u.xi.coords, v.xi.coords)) < 1e-12
    # the pushforward is the derivative of the action along a curve
    h = 1e-6
    q = unit_quats(7, 1)[0]
    c = lambda s: s3_act(q, qmatmul(Q.matrix, qexpm(s * u.xi.matrix))).matrix  # noqa: E731
    deriv = (c(h) - c(-h)) / (2 * h)
    np.testing.assert_allclose(deriv, qmatmul(s3_act(q, Q).matrix, s3_pushforward(q, u).xi.matrix), atol=1e-8)


def test_recover_action():
    Q = haar_sample(8, 20)
    q = unit_quats(9, 20)
    r, res = recover_action(Q, s3_act(q, Q))
    np.testing.assert_allclose(r, q, atol=1e-13)
    assert res.max() < 1e-13
    _, res = recover_action(Q, haar_sample(10, 20))
    assert res.min() > 1e-3


def test_normal_form_already_normal():
    a = np.array([0.1, 0.5, 0.3, 0.0])
    b = np.array([0.4, 0.2, 0.0, 0.0])
    q, a2, b2 = normal_form(a, b)
    np.testing.assert_allclose(a2, a, atol=1e-12)
    np.testing.assert_allclose(b2, b, atol=1e-12)


def test_normal_form_b_is_j():
    q, a2, b2 = normal_form([0.0, 0.3, 0.4, 0.5], qt.J)
    np.testing.assert_allclose(b2, qt.I, atol=1e-12)
    actual = qt.qmul(qt.qmul(q, qt.J), qt.qconj(q))
    assert np.abs(actual[2:]).max() < 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31))
def test_normal_form_random(seed):
    a, b = np.random.default_rng(seed).standard_normal((2, 4))
    q, a2, b2 = normal_form(a, b)
    exact_a = qt.qmul(qt.qmul(q, a), qt.qconj(q))
    exact_b = qt.qmul(qt.qmul(q, b), qt.qconj(q))
    assert abs(exact_a[3]) < 1e-12 and np.abs(exact_b[2:]).max() < 1e-12
    assert np.isclose(qt.qnorm(a2), qt.qnorm(a)) and np.isclose(qt.qnorm(b2), qt.qnorm(b))
    assert exact_a[0] == pytest.approx(a[0], abs=1e-14)
    assert exact_b[1] >= -1e-12


def test_normalize_stays_in_orbit():
    Q = haar_sample(11)
    q, P = normalize(Q)
    assert is_normal_form(P)
    np.testing.assert_allclose(s3_act(q, Q).matrix, P.matrix)


def test_orbit_point_equality():
    Q = haar_sample(12)
    p = OrbitPoint.from_matrix(Q, normalize_rep=False)
    for q in unit_quats(13, 5):
        assert OrbitPoint.from_matrix(s3_act(q, Q)) == p
    assert OrbitPoint.from_matrix(haar_sample(14)) != p
    assert p.normal().normalized and p.f == pytest.approx(float(F_eval(Q)))
    with pytest.raises(TypeError):
        hash(p)


def test_orbit_point_residual_stabilizer():
    # a = a1 i, b = b0: the stabilizer of the normal form is larger
    P = normal_form_point(0.6, 0.0, 0.8, 0.0)
    q = np.array([np.cos(0.7), np.sin(0.7), 0, 0])
    assert OrbitPoint.from_matrix(P) == OrbitPoint.from_matrix(s3_act(q, P))


# ----------------------------------------------------------------------------
# orbit frame and Gram matrix


def test_frame_at_identity():
    I = Sp2Element.identity()
    for x, v in zip(qt.IMAGINARY_UNITS, orbit_frame(I)):
        np.testing.assert_allclose(v.xi.x, 0, atol=1e-15)
        np.testing.assert_allclose(v.xi.y, 0, atol=1e-15)
        np.testing.assert_allclose(v.xi.z, -x, atol=1e-15)


def test_frame_is_action_derivative():
    Q = haar_sample(15)
    h = 1e-6
    for x, v in zip(qt.IMAGINARY_UNITS, orbit_frame(Q)):
        d = (s3_act(qt.qexp(h * x), Q).matrix - s3_act(qt.qexp(-h * x), Q).matrix) / (2 * h)
        np.testing.assert_allclose(d, qmatmul(Q.matrix, v.xi.matrix), atol=1e-6)


def test_frame_orthogonal_to_gradient():
    Q = haar_sample(16, 200)
    g = grad_F_closed(Q).xi.coords
    for x in qt.IMAGINARY_UNITS:
        assert np.abs(STANDARD_METRIC.inner(orbit_generator(Q, x).coords, g)).max() < 1e-12


def test_gram_examples():
    gd = gram_matrix(normal_form_point(*WITNESS_PHI_MAX))
    np.testing.assert_allclose(gd.g, np.diag([0.75, 3.75, 3.75]), atol=1e-12)
    assert gd.E == pytest.approx(45 / 16) and gd.F_scalar == pytest.approx(15 / 4)
    gd = gram_matrix(normal_form_point(1.0, 0.0, 0.0, 0.0))
    np.testing.assert_allclose(gd.g, np.diag([1.0, 5.0, 5.0]), atol=1e-12)


def test_gram_closed_vs_numeric(zero_level):
    num = gram_matrix(zero_level)
    closed = gram_matrix(zero_level, closed_form=True)
    assert np.abs(num.g - closed.g).max() < 1e-12
    assert np.all(np.linalg.eigvalsh(num.g) > 0)
    with pytest.raises(DomainError):
        gram_matrix(haar_sample(17), closed_form=True)


def test_gram_positive_anywhere():
    # the action is free, so the frame never degenerates
    gd = gram_matrix(haar_sample(18, 500))
    assert np.all(np.linalg.eigvalsh(gd.g) > 1e-3)


# ----------------------------------------------------------------------------
# phi


def test_frame_hessian_entries():
    P = normal_form_point(*WITNESS_PHI_MAX)
    a1, a2, b0, b1 = WITNESS_PHI_MAX
    H = frame_hessian(P)
    assert H[1, 1] == pytest.approx(-4 * a1 * b1 * b0, abs=1e-12)
    assert H[2, 2] == pytest.approx(-4 * a1 * b1 * b0, abs=1e-12)


def test_phi_witnesses():
    P = normal_form_point(*WITNESS_PHI_MAX)
    assert phi_closed(*WITNESS_PHI_MAX) == pytest.approx(PHI_WITNESS, abs=1e-12)
    assert float(phi_numeric(P)) == pytest.approx(PHI_WITNESS, abs=1e-12)
    assert abs(float(phi_numeric(normal_form_point(*WITNESS_PHI_ZERO)))) < 1e-12
    assert phi_closed(*WITNESS_PHI_ZERO) == 0.0


def test_phi_closed_properties():
    a1, a2, b0, b1 = 0.5, 0.3, 0.6, np.sqrt(1 - 0.25 - 0.09 - 0.36)
    assert phi_closed(a1, a2, -b0, b1) == pytest.approx(-phi_closed(a1, a2, b0, b1))
    with pytest.raises(DomainError):
        phi_closed(1.0, 1.0, 0.0, 0.0)


def test_phi_closed_vs_numeric(zero_level):
    closed = phi_closed(*zero_level_data(zero_level))
    assert np.abs(closed - phi_numeric(zero_level)).max() < 1e-10


def test_phi_invariant_along_orbits():
    Q = haar_sample(19, 10)
    base = phi_numeric(Q)
    for q in unit_quats(20, 20):
        assert np.abs(phi_numeric(s3_act(q, Q)) - base).max() < 1e-10


def test_phi_from_connection():
    for args in (WITNESS_PHI_MAX, (0.3, 0.5, 0.4, np.sqrt(1 - 0.09 - 0.25 - 0.16))):
        P = normal_form_point(*args)
        assert abs(phi_from_connection(P) - float(phi_numeric(P))) < 1e-6
    Q = haar_sample(21)
    assert abs(phi_from_connection(Q) - float(phi_numeric(Q))) < 1e-6
    with pytest.raises(DomainError):
        phi_from_connection(haar_sample(0, 2))


def test_laplacian_routes_agree():
    Q = haar_sample(22, 100)
    assert np.abs(quotient_laplacian(Q) - horizontal_laplacian(Q)).max() < 1e-10


def test_laplacian_near_focal():
    eps = 1e-4
    P = normal_form_point(0.0, 0.0, 0.0, eps, a0=np.sqrt(1 - eps**2))
    assert abs(float(quotient_laplacian(P)) + 7.0) < 1e-3
    assert abs(float(quotient_laplacian(normal_form_point(*WITNESS_PHI_MAX))) - PHI_WITNESS) < 1e-12


def test_mean_curvature_not_constant():
    m1 = float(mean_curvature_gm(normal_form_point(*WITNESS_PHI_MAX)))
    m0 = float(mean_curvature_gm(normal_form_point(*WITNESS_PHI_ZERO)))
    assert m1 == pytest.approx(-PHI_WITNESS, abs=1e-12)
    assert abs(m0) < 1e-12
    with pytest.raises(FocalPointError):
        mean_curvature_gm(Sp2Element.identity())


# ----------------------------------------------------------------------------
# sampling and the dependence verdicts


def test_zero_level_sampling(zero_level):
    assert np.abs(F_eval(zero_level)).max() < 1e-10
    assert all(is_normal_form(zero_level[k]) for k in range(10))
    assert np.max(zero_level.residual()) < 1e-12
    with pytest.raises(FocalPointError):
        flow_to_zero_level(Sp2Element.identity().matrix[None])


def test_quotient_transnormal_not_isoparametric():
    Q = haar_sample(23, 5000)
    f = F_eval(Q)
    trans = dependence_test(np.column_stack([f, grad_F_norm2(Q)]), tol=1e-8, trim=0.95)
    lap = dependence_test(np.column_stack([f, quotient_laplacian(Q)]), tol=1e-3, trim=0.95)
    assert trans.passed
    assert not lap.passed and lap.spread_near(0.0) >= 0.1
