import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spherepolar import closed_form_maps as cf
from spherepolar import group_actions as ga
from spherepolar.sphere_geom import exp_map, geodesic_distance, random_points, random_rotation
from strategies import sphere_point, unit

A_VALUES = (0.1, 0.5, 1.0, 2.0)
params = st.floats(-2.0, 2.0, allow_nan=False)


# -- g -----------------------------------------------------------------------------

def test_g_zero_parameter():
    x = np.linspace(-4, 4, 101)
    np.testing.assert_array_equal(cf.g_eval(0.0, x), 0.0)
    np.testing.assert_array_equal(cf.g_deriv(0.0, x), 0.0)


@pytest.mark.parametrize("a", A_VALUES + (-0.7,))
def test_g_deriv_at_zero(a):
    assert cf.g_deriv(a, 0.0) == pytest.approx(np.exp(-a) - 1.0, abs=1e-15)


def test_half_angle_oracle_against_quadrature():
    x = np.linspace(1e-3, np.pi - 1e-3, 1000)
    for a in A_VALUES:
        lhs = np.tan((x + cf.g_eval(a, x)) / 2)
        np.testing.assert_allclose(lhs, np.exp(-a) * np.tan(x / 2), rtol=1e-9)
        np.testing.assert_allclose(cf.g_eval(a, x), cf.g_half_angle(a, x), atol=1e-12)


def test_g_deriv_by_finite_differences():
    x = np.linspace(-np.pi, np.pi, 1000)
    h = 1e-5
    for a in A_VALUES:
        fd = (cf.g_eval(a, x + h) - cf.g_eval(a, x - h)) / (2 * h)
        assert np.max(np.abs(fd - cf.g_deriv(a, x))) < 1e-6


def test_quadrature_order_doubling():
    x = np.linspace(-np.pi, np.pi, 2001)
    for a in A_VALUES:
        assert np.max(np.abs(cf.g_eval(a, x, 32) - cf.g_eval(a, x, 64))) < 1e-11


def test_gauss_legendre_rule():
    t, w = cf.gauss_legendre_01(32)
    assert np.all((t > 0) & (t < 1))
    assert w.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.dot(w, t ** 7) == pytest.approx(1 / 8, abs=1e-15)


# -- f -----------------------------------------------------------------------------

def test_f_zero_parameter():
    np.testing.assert_array_equal(cf.f_profile(0.0)(np.linspace(-3, 3, 11)), 0.0)


@pytest.mark.parametrize("a", (0.1, 0.5, 1.0))
def test_f_symmetry_forced_zeros(a):
    f, g = cf.f_profile(a), cf.g_profile(a)
    assert abs(f(np.pi)) < 1e-14 and abs(f(0.0)) == 0.0
    assert abs(f(np.pi / 2)) < 1e-14
    # the corresponding zero of g sits at the antipode of its fixed point
    assert abs(g(np.pi)) < 1e-14


@pytest.mark.parametrize("profile", [cf.f_profile(a) for a in (0.1, 0.5, 1.0)]
                         + [cf.g_profile(a) for a in (0.1, 0.5, 1.0)], ids=lambda p: f"{p.kind}-{p.a}")
def test_profile_invariants(profile):
    inv = cf.profile_invariants(profile, 10_000)
    assert inv["odd"] < 1e-10
    assert inv["periodic"] < 1e-10
    assert inv["min_deriv_plus_one"] > 0


@pytest.mark.parametrize("a", A_VALUES)
def test_monotonicity_margin(a):
    x = np.linspace(-np.pi, np.pi, 100_001)
    assert np.min(cf.g_deriv(a, x) + 1) > 0
    assert np.min(cf.f_profile(a).deriv(x) + 1) > 0


def test_f_deriv_by_finite_differences():
    x = np.linspace(-np.pi, np.pi, 1000)
    h = 1e-5
    for a in A_VALUES:
        f = cf.f_profile(a)
        fd = (f(x + h) - f(x - h)) / (2 * h)
        assert np.max(np.abs(fd - f.deriv(x))) < 1e-6


def test_f_has_period_pi_not_4pi():
    f = cf.f_profile(0.8)
    x = np.linspace(0, np.pi, 50)
    np.testing.assert_allclose(f(x + np.pi), f(x), atol=1e-13)
    assert np.max(np.abs(f(x))) > 0.1


# -- maps --------------------------------------------------------------------------

def test_conformal_map_identity_at_zero(rng):
    P = random_points(3, 100, rng)
    np.testing.assert_allclose(cf.conformal_map(0.0, 3)(P), P, atol=1e-15)


@pytest.mark.parametrize("n", (1, 2, 4))
def test_conformal_map_agrees_with_action(rng, n):
    for a in (0.3, 0.5, 1.5, -0.8):
        P = random_points(n, 1000, rng)
        A = ga.exp_generator(a * unit(n + 1, 0))
        np.testing.assert_allclose(cf.conformal_map(a, n)(P), ga.conformal_act(A, P), atol=1e-9)


def test_conformal_fixed_points():
    T = cf.conformal_map(0.9, 2)
    np.testing.assert_allclose(T(unit(3, 0)), unit(3, 0), atol=1e-15)
    np.testing.assert_allclose(T(-unit(3, 0)), -unit(3, 0), atol=1e-14)


def test_forward_one_matches_vectorized(rng):
    P = random_points(2, 30, rng)
    for T in (cf.conformal_map(0.7, 2), cf.projective_map_two_eigen(0.6, 2, 1)):
        batch = T(P)
        for p, b in zip(P, batch):
            np.testing.assert_allclose(T(p), b, atol=1e-15)


def test_projective_identity_at_zero(rng):
    P = random_points(2, 50, rng)
    np.testing.assert_allclose(cf.projective_map_two_eigen(0.0, 1, 2)(P), P, atol=1e-15)


@pytest.mark.parametrize("k,l", [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3)])
def test_projective_forms_agree(rng, k, l):
    for a in (0.3, 0.6, 1.7, -0.5):
        P = random_points(k + l - 1, 1000, rng)
        T = cf.projective_map_two_eigen(a, k, l)
        direct = cf.projective_two_eigen_direct(a, k, P)
        np.testing.assert_allclose(direct, ga.projective_act(cf.two_eigen_matrix(a, k, l), P), atol=1e-12)
        np.testing.assert_allclose(T(P), direct, atol=1e-9)


def test_projective_rejects_empty_block():
    with pytest.raises(ValueError):
        cf.projective_map_two_eigen(0.5, 0, 3)


@given(sphere_point(m=4), params, st.sampled_from([1, 2, 3]))
def test_well_defined_under_sign_equivalence(p, a, k):
    """(x, u, v), (pi - x, -u, v), (-x, u, -v) and (x - pi, -u, -v) name the same point."""
    T = cf.projective_map_two_eigen(a, k, 4 - k)
    from spherepolar.sphere_geom import split_coords

    sc = split_coords(p, k)
    ref = T(p)
    for x, u, v in [(sc.x, sc.u, sc.v), (np.pi - sc.x, -sc.u, sc.v),
                    (-sc.x, sc.u, -sc.v), (sc.x - np.pi, -sc.u, -sc.v)]:
        np.testing.assert_allclose(np.concatenate([np.cos(x) * u, np.sin(x) * v]), p, atol=1e-12)
        np.testing.assert_allclose(T.from_coords(x, u, v), ref, atol=1e-10)


@given(sphere_point(m=3), params)
def test_conformal_well_defined(p, a):
    T = cf.conformal_map(a, 2)
    x = np.arctan2(np.linalg.norm(p[1:]), p[0])
    nb = np.linalg.norm(p[1:])
    if nb < 1e-9:
        return
    v = p[1:] / nb
    ref = T(p)
    for xr, vr in [(x, v), (-x, -v), (x + 2 * np.pi, v)]:
        np.testing.assert_allclose(T.from_coords(xr, np.ones(1), vr), ref, atol=1e-10)


def test_generator_map_matches_action(rng):
    for _ in range(10):
        v = rng.standard_normal(3)
        P = random_points(2, 200, rng)
        np.testing.assert_allclose(cf.conformal_map_for_generator(v)(P),
                                   ga.conformal_act(ga.exp_generator(v), P), atol=1e-9)


def test_projective_closed_form_rotated(rng):
    O = random_rotation(3, rng)
    P = random_points(2, 300, rng)
    for lam in ([2.0, 2.0, 5.0], [3.0, 1.0, 1.0], [2.0, 2.0, 2.0]):
        S = O @ np.diag(lam) @ O.T
        T = cf.projective_closed_form(S)
        np.testing.assert_allclose(T(P), ga.projective_act(S, P), atol=1e-9)
    assert cf.projective_closed_form(np.diag([1.0, 2.0, 3.0])) is None


def test_forward_is_injective_on_grid():
    from spherepolar.discrete_ot import mean_spacing, sample_sphere

    X = sample_sphere(2, 2000, "fibonacci-s2").points
    h = mean_spacing(X)
    for T in (cf.conformal_map(1.0, 2), cf.projective_map_two_eigen(0.8, 2, 1)):
        Y = T(X)
        from scipy.spatial import cKDTree

        pairs = cKDTree(Y).query_pairs(0.5 * h * 0.01)
        for i, j in pairs:
            assert geodesic_distance(X[i], X[j]) < 0.5 * h


# -- potentials --------------------------------------------------------------------

def test_potential_at_origin():
    assert cf.potential_phi(cf.f_profile(0.5), unit(3, 0), 1) == 0.0


@pytest.mark.parametrize("a", (0.3, 1.0, 2.0))
def test_period_integral_vanishes(a):
    f = cf.f_profile(a)
    for x in np.linspace(0.05, 1.5, 20):
        # int_0^{pi-x} f = int_0^x f, by oddness and zero integral over a period
        lhs = cf.potential_from_angle(f, np.pi - x, order=128)
        assert lhs == pytest.approx(cf.potential_from_angle(f, x), abs=1e-9)
        assert cf.potential_from_angle(f, -x) == pytest.approx(cf.potential_from_angle(f, x), abs=1e-12)
    assert cf.potential_from_angle(f, np.pi) == pytest.approx(0.0, abs=1e-9)


@given(sphere_point(m=3), st.floats(0.1, 2.0))
def test_potential_phi_independent_of_representative(p, a):
    f = cf.f_profile(a)
    from spherepolar.sphere_geom import split_coords

    sc = split_coords(p, 1)
    ref = cf.potential_phi(f, p, 1)
    for x in (np.pi - sc.x, -sc.x, sc.x - np.pi):
        assert cf.potential_from_angle(f, x, order=128) == pytest.approx(ref, abs=1e-9)


def test_potential_matches_adaptive_quadrature():
    from scipy.integrate import quad

    f = cf.f_profile(0.7)
    for x in (0.2, 0.9, 1.4):
        ref, _ = quad(lambda s: float(f(s)), 0.0, x, epsabs=1e-14)
        assert cf.potential_from_angle(f, x) == pytest.approx(ref, abs=1e-12)


def test_zero_profile_has_zero_field(rng):
    zero = cf.custom_profile(lambda x: np.zeros_like(np.asarray(x, dtype=float)))
    for p in random_points(2, 10, rng):
        np.testing.assert_array_equal(cf.gradient_field_W(zero, p, 1), 0.0)


@pytest.mark.parametrize("profile,k", [(cf.f_profile(0.6), 1), (cf.f_profile(1.2), 2), (cf.g_profile(0.8), 1)],
                         ids=["f1", "f2", "g"])
def test_gradient_matches_finite_differences(rng, profile, k):
    worst = 0.0
    for p in random_points(2, 100, rng):
        fd, ex = cf.gradient_check_directions(profile, p, k, rng, 10)
        worst = max(worst, np.max(np.abs(fd - ex)))
    assert worst < 1e-6


@pytest.mark.parametrize("a,k", [(0.6, 1), (1.1, 2), (-0.9, 1)])
def test_exp_of_gradient_is_map(rng, a, k):
    profile = cf.f_profile(a)
    T = cf.projective_map_two_eigen(a, k, 3 - k)
    for p in random_points(2, 200, rng):
        np.testing.assert_allclose(exp_map(p, cf.gradient_field_W(profile, p, k)), T(p), atol=1e-9)


def test_exp_of_gradient_conformal(rng):
    g = cf.g_profile(0.9)
    T = cf.conformal_map(0.9, 2)
    for p in random_points(2, 200, rng):
        np.testing.assert_allclose(exp_map(p, cf.gradient_field_W(g, p)), T(p), atol=1e-9)


def test_field_on_degenerate_blocks():
    f = cf.f_profile(0.8)
    # x = 0 and x = pi/2 are zeros of f: the field vanishes
    np.testing.assert_array_equal(cf.gradient_field_W(f, unit(3, 0), 1), 0.0)
    assert np.max(np.abs(cf.gradient_field_W(f, unit(3, 2), 1))) < 1e-14


# -- displacement distance ---------------------------------------------------------

def test_displacement_examples():
    assert cf.displacement_distance(0.7, unit(3, 0)) == 0.0
    assert cf.displacement_distance(0.7, -unit(3, 0)) == pytest.approx(0.0, abs=1e-15)
    assert cf.displacement_distance(0.0, unit(3, 1)) == 0.0


@pytest.mark.parametrize("a", (0.3, 1.0, 2.0))
def test_displacement_equals_geodesic_distance(rng, a):
    T = cf.conformal_map(a, 2)
    P = random_points(2, 1000, rng)
    D = np.array([cf.displacement_distance(a, p) for p in P])
    np.testing.assert_allclose(D, geodesic_distance(P, T(P)), atol=1e-9)


# -- double cover ------------------------------------------------------------------

def test_double_cover_zero():
    assert cf.double_cover_check(0.0, 100) < 1e-15


@pytest.mark.parametrize("a", (0.1, 0.7, 1.5))
def test_double_cover_commutes(a):
    assert cf.double_cover_check(a, 1000) < 1e-12


def test_circle_boost_matches_lorentz_action(rng):
    a = 0.7
    P = random_points(1, 100, rng)
    np.testing.assert_allclose(cf.circle_boost(a, P), ga.conformal_act(ga.exp_generator([a, 0.0]), P), atol=1e-14)


@pytest.mark.parametrize("a", (0.1, 0.7, 1.5))
def test_profile_relation_from_diagram(a):
    x = np.linspace(-np.pi / 2, np.pi / 2, 1001)
    f = cf.f_profile(a)
    np.testing.assert_allclose(cf.projective_profile_from_diagram(a, x), f(x), atol=1e-9)
    # f is half of g at the doubled angle
    np.testing.assert_allclose(f(x), 0.5 * cf.g_eval(a, 2 * x), atol=1e-15)


def test_double_cover_rejects_no_samples():
    with pytest.raises(ValueError):
        cf.double_cover_check(0.5, 0)


def test_profile_csv(tmp_path):
    path = tmp_path / "f.csv"
    cf.write_profile_csv(path, cf.f_profile(0.5), samples=64)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,value" and len(lines) == 65
