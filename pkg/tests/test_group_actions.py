import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from spherepolar import closed_form_maps as cf
from spherepolar import group_actions as ga
from spherepolar.errors import NotGLPlus, NotLorentz
from spherepolar.sphere_geom import random_points, random_rotation, rotation_to
from strategies import sphere_point, unit

vec3 = st.lists(st.floats(-2.0, 2.0, allow_nan=False), min_size=3, max_size=3).map(np.array)


def random_lorentz(m, rng, scale=1.0):
    v = scale * rng.standard_normal(m - 1)
    return ga.exp_generator(v) @ ga.block_rotation(random_rotation(m - 1, rng)), v


# -- validation --------------------------------------------------------------------

def test_validate_lorentz_accepts_group_elements(rng):
    for _ in range(20):
        ga.validate_lorentz(random_lorentz(4, rng, 2.0)[0])


def test_validate_lorentz_names_invariant():
    with pytest.raises(NotLorentz, match="A\\^T J A"):
        ga.validate_lorentz(np.diag([2.0, 1.0, 1.0]))
    # time reversal: preserves J but flips w_0
    with pytest.raises(NotLorentz, match="time"):
        ga.validate_lorentz(np.diag([-1.0, -1.0, 1.0]))
    with pytest.raises(NotLorentz, match="det"):
        ga.validate_lorentz(np.diag([1.0, -1.0, 1.0]))
    with pytest.raises(NotLorentz):
        ga.validate_lorentz(np.eye(2))


def test_validate_projective():
    ga.validate_projective(np.diag([1.0, 2.0, 3.0]))
    with pytest.raises(NotGLPlus):
        ga.validate_projective(np.diag([1.0, 2.0, -3.0]))


# -- exp_generator -----------------------------------------------------------------

def test_exp_generator_examples():
    np.testing.assert_array_equal(ga.exp_generator(np.zeros(3)), np.eye(4))
    a = 0.8
    M = ga.exp_generator(a * unit(3, 0))
    np.testing.assert_allclose(M[:2, :2], [[np.cosh(a), np.sinh(a)], [np.sinh(a), np.cosh(a)]], atol=1e-15)
    np.testing.assert_allclose(M[2:, 2:], np.eye(2), atol=1e-15)
    np.testing.assert_allclose(M[:2, 2:], 0.0, atol=0)


@given(vec3)
def test_exp_generator_matches_matrix_exponential(v):
    M = ga.exp_generator(v)
    np.testing.assert_allclose(M, expm(ga.generator_matrix(v)), rtol=1e-12, atol=1e-12)
    J = ga.lorentz_form(4)
    assert np.max(np.abs(M.T @ J @ M - J)) < 1e-12 * max(1.0, np.max(np.abs(M)) ** 2)
    assert np.linalg.det(M) > 0 and M[0, 0] > 0


@given(vec3)
def test_exp_generator_rotation_conjugate(v):
    a = np.linalg.norm(v)
    if a < 1e-12:
        return
    R = rotation_to(unit(3, 0), v / a)
    D = ga.block_rotation(R)
    ref = D @ ga.exp_generator(a * unit(3, 0)) @ D.T
    np.testing.assert_allclose(ga.exp_generator(v), ref, atol=1e-12 * np.cosh(a))


@given(vec3, st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_one_parameter_group(v, s, t):
    lhs = ga.exp_generator((s + t) * v)
    rhs = ga.exp_generator(s * v) @ ga.exp_generator(t * v)
    assert np.max(np.abs(lhs - rhs)) < 1e-10 * max(1.0, np.max(np.abs(lhs)))


def test_generator_in_lie_algebra(rng):
    v = rng.standard_normal(3)
    X = ga.generator_matrix(v)
    J = ga.lorentz_form(4)
    np.testing.assert_array_equal(X, X.T)
    np.testing.assert_allclose(X.T @ J + J @ X, 0.0, atol=1e-15)


# -- actions -----------------------------------------------------------------------

def test_conformal_act_examples(rng):
    u = random_points(2, 50, rng)
    np.testing.assert_allclose(ga.conformal_act(np.eye(4), u), u, atol=1e-15)
    R = random_rotation(3, rng)
    np.testing.assert_allclose(ga.conformal_act(ga.block_rotation(R), u), u @ R.T, atol=1e-14)


def test_conformal_act_boost_matches_meridian_form(rng):
    a = 0.5
    A = ga.exp_generator(a * unit(3, 0))
    P = random_points(2, 1000, rng)
    np.testing.assert_allclose(ga.conformal_act(A, P), cf.conformal_map(a, 2)(P), atol=1e-9)


def test_conformal_act_validates_on_request():
    with pytest.raises(NotLorentz):
        ga.conformal_act(np.diag([2.0, 1.0, 1.0]), np.array([1.0, 0.0]), validate=True)


def test_conformal_composition(rng):
    for _ in range(20):
        A, _ = random_lorentz(4, rng)
        B, _ = random_lorentz(4, rng)
        u = random_points(2, 20, rng)
        np.testing.assert_allclose(ga.conformal_act(A @ B, u),
                                   ga.conformal_act(A, ga.conformal_act(B, u)), atol=1e-10)


def test_projective_act_examples(rng):
    p = random_points(2, 30, rng)
    np.testing.assert_allclose(ga.projective_act(np.eye(3), p), p, atol=1e-15)
    np.testing.assert_allclose(ga.projective_act(3.7 * np.eye(3), p), p, atol=1e-15)
    a, k = 0.6, 1
    D = cf.two_eigen_matrix(a, k, 2)
    np.testing.assert_allclose(ga.projective_act(D, p), cf.projective_two_eigen_direct(a, k, p), atol=1e-15)


def test_projective_composition(rng):
    for _ in range(20):
        A = rng.standard_normal((3, 3))
        B = rng.standard_normal((3, 3))
        p = random_points(2, 20, rng)
        np.testing.assert_allclose(ga.projective_act(A @ B, p),
                                   ga.projective_act(A, ga.projective_act(B, p)), atol=1e-10)


# -- flow field --------------------------------------------------------------------

def test_flow_field_examples():
    v = np.array([0.3, -0.4, 1.2])
    np.testing.assert_allclose(ga.conformal_flow_field(v, v / np.linalg.norm(v)), 0.0, atol=1e-15)
    a = 0.7
    np.testing.assert_allclose(ga.conformal_flow_field(a * unit(3, 0), unit(3, 1)), a * unit(3, 0))


@given(vec3, sphere_point())
def test_flow_field_is_derivative_of_action(v, p):
    h = 1e-5
    fwd = ga.conformal_act(ga.exp_generator(h * v), p)
    bwd = ga.conformal_act(ga.exp_generator(-h * v), p)
    np.testing.assert_allclose((fwd - bwd) / (2 * h), ga.conformal_flow_field(v, p), atol=1e-6)


# -- decompositions ----------------------------------------------------------------

def test_cartan_of_rotation(rng):
    O = random_rotation(3, rng)
    pair = ga.cartan_decompose(ga.block_rotation(O))
    np.testing.assert_allclose(pair.generator, 0.0, atol=1e-12)
    np.testing.assert_allclose(pair.rotation, O, atol=1e-12)


def test_cartan_of_pure_boost(rng):
    for _ in range(20):
        v0 = rng.standard_normal(3)
        pair = ga.cartan_decompose(ga.exp_generator(v0))
        np.testing.assert_allclose(pair.generator, v0, atol=1e-9)
        np.testing.assert_allclose(pair.rotation, np.eye(3), atol=1e-9)


def test_cartan_round_trip(rng):
    worst_v = worst_o = worst_rec = 0.0
    for _ in range(1000):
        A, v0 = random_lorentz(4, rng)
        pair = ga.cartan_decompose(A)
        O0 = A.copy()
        O0 = np.linalg.solve(ga.exp_generator(v0), A)[1:, 1:]
        worst_v = max(worst_v, np.max(np.abs(pair.generator - v0)))
        worst_o = max(worst_o, np.max(np.abs(pair.rotation - O0)))
        worst_rec = max(worst_rec, np.max(np.abs(pair.reconstruct() - A)))
    assert worst_v < 1e-8 and worst_o < 1e-8
    assert worst_rec < 1e-9


def test_cartan_conjugation_covariance(rng):
    for _ in range(20):
        A, _ = random_lorentz(4, rng)
        R = random_rotation(3, rng)
        D = ga.block_rotation(R)
        v = ga.cartan_decompose(A).generator
        np.testing.assert_allclose(ga.cartan_decompose(D @ A @ D.T).generator, R @ v, atol=1e-9)


def test_cartan_rejects_non_lorentz():
    with pytest.raises(NotLorentz):
        ga.cartan_decompose(np.diag([1.0, 2.0, 1.0]))


def test_polar_examples(rng):
    O = random_rotation(3, rng)
    pair = ga.polar_decompose(O)
    np.testing.assert_allclose(pair.symmetric_part, np.eye(3), atol=1e-12)
    pair = ga.polar_decompose(np.diag([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(pair.symmetric_part, np.diag([1.0, 2.0, 3.0]), atol=1e-12)
    np.testing.assert_allclose(pair.rotation_part, np.eye(3), atol=1e-12)


def test_polar_round_trip(rng):
    worst = 0.0
    for _ in range(1000):
        A = rng.standard_normal((3, 3))
        if np.linalg.det(A) < 0:
            A[0] = -A[0]
        pair = ga.polar_decompose(A)
        O = pair.rotation_part
        worst = max(worst, np.linalg.norm(pair.reconstruct() - A), np.linalg.norm(O.T @ O - np.eye(3)))
        assert np.all(pair.eigenvalues() > 0)
        assert np.linalg.det(O) > 0
    assert worst < 1e-9


def test_polar_rejects_negative_determinant():
    with pytest.raises(NotGLPlus):
        ga.polar_decompose(np.diag([1.0, 1.0, -1.0]))


def test_spd_functions_reject_indefinite():
    with pytest.raises(ValueError):
        ga.spd_sqrt(np.diag([1.0, -1.0]))
    with pytest.raises(ValueError):
        ga.spd_log(np.diag([1.0, 0.0]))


# -- eigenvalue clustering ---------------------------------------------------------

def test_distinct_eigenvalues():
    assert len(ga.distinct_eigenvalues(np.diag([2.0, 2.0, 5.0]))) == 2
    assert len(ga.distinct_eigenvalues(np.diag([1.0, 2.0, 3.0]))) == 3
    assert len(ga.distinct_eigenvalues(np.diag([2.0, 2.0 * (1 + 1e-12), 2.0]))) == 1


def test_two_eigen_parameter(rng):
    O = random_rotation(3, rng)
    P = O @ np.diag([2.0, 5.0, 5.0]) @ O.T
    a, k, l, Q = ga.two_eigen_parameter(P)
    assert a == pytest.approx(np.log(2.5))
    assert (k, l) == (2, 1)
    assert np.linalg.det(Q) > 0
    D = Q.T @ P @ Q
    np.testing.assert_allclose(D, np.diag([5.0, 5.0, 2.0]), atol=1e-12)
    assert ga.two_eigen_parameter(np.diag([1.0, 2.0, 3.0])) is None


# -- text format -------------------------------------------------------------------

def test_matrix_text_round_trip(tmp_path, rng):
    A = rng.standard_normal((4, 4))
    path = tmp_path / "m.txt"
    ga.write_matrix(path, A)
    np.testing.assert_array_equal(ga.read_matrix(path), A)


def test_parse_matrix_comments_and_errors():
    np.testing.assert_array_equal(ga.parse_matrix("# header\n1 2\n3 4  # tail\n\n"), [[1, 2], [3, 4]])
    with pytest.raises(ValueError):
        ga.parse_matrix("1 2\n3\n")
    with pytest.raises(ValueError):
        ga.parse_matrix("# nothing\n")
