"""Closed-form optimal maps of the sphere built from a meridian profile.

A profile is an odd periodic function f with f' + 1 > 0. The map moves each
point along its meridian, x -> x + f(x), where p = (cos x u, sin x v) for a
split R^k + R^l of R^{n+1}. Two profiles come out of the group actions:

* the conformal profile g (period 2pi, split (1, n)), defined by an integral
  along the boost flow and evaluated by Gauss-Legendre quadrature;
* the projective profile f (period pi), obtained from g through the double
  cover of the circle: f(x) = g(2x) / 2.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from . import group_actions as ga
from .policy import POLICY
from .sphere_geom import exp_map, polar_angle, rotation_to, split_coords


@lru_cache(maxsize=16)
def gauss_legendre_01(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``order``-point Gauss-Legendre rule on [0, 1]."""
    t, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (t + 1.0), 0.5 * w


def _h(u, t, a):
    # h(u, t) = u sinh(at) + cosh(at) >= exp(-|at|) > 0 for |u| <= 1
    return u * np.sinh(a * t) + np.cosh(a * t)


@dataclass(frozen=True)
class MeridianProfile:
    """Displacement along meridians: x -> x + eval(x)."""

    kind: str
    a: float
    eval: Callable = field(repr=False)
    deriv: Callable = field(repr=False)
    period: float = 2 * np.pi

    def __call__(self, x):
        return self.eval(x)

    @property
    def full_circle(self) -> bool:
        """2pi-periodic: the meridian angle runs over [0, pi] on the (1, n) split.

        pi-periodic profiles are invariant under x -> pi - x, so the angle is
        folded to [0, pi/2] and any split (k, l) works.
        """
        return self.period > 1.5 * np.pi


def g_eval(a: float, x, order: int | None = None) -> np.ndarray:
    """g(x) = -int_0^1 a sin x / h(cos x, t) dt by fixed-order quadrature."""
    order = POLICY.quad_order if order is None else order
    t, w = gauss_legendre_01(order)
    x = np.asarray(x, dtype=float)
    c = np.cos(x)[..., None]
    integrand = a / _h(c, t, a)
    return -np.sin(x) * (integrand @ w)


def g_deriv(a: float, x) -> np.ndarray:
    """g'(x) = 1 / (cos x sinh a + cosh a) - 1."""
    x = np.asarray(x, dtype=float)
    return 1.0 / (np.cos(x) * np.sinh(a) + np.cosh(a)) - 1.0


def g_half_angle(a: float, x) -> np.ndarray:
    """Independent closed form of g: tan((x + g)/2) = e^{-a} tan(x/2).

    Valid on (-pi, pi); used only to cross-check the quadrature.
    """
    x = np.asarray(x, dtype=float)
    return 2.0 * np.arctan(np.exp(-a) * np.tan(x / 2.0)) - x


def g_profile(a: float, order: int | None = None) -> MeridianProfile:
    a = float(a)
    return MeridianProfile(
        "conformal-g",
        a,
        lambda x: g_eval(a, x, order),
        lambda x: g_deriv(a, x),
        2 * np.pi,
    )


def f_profile(a: float, order: int | None = None) -> MeridianProfile:
    """Projective profile f(x) = g(2x)/2, f'(x) = g'(2x)."""
    a = float(a)
    return MeridianProfile(
        "projective-f",
        a,
        lambda x: 0.5 * g_eval(a, 2.0 * np.asarray(x, dtype=float), order),
        lambda x: g_deriv(a, 2.0 * np.asarray(x, dtype=float)),
        np.pi,
    )


def custom_profile(fn: Callable, deriv: Callable | None = None, period=2 * np.pi) -> MeridianProfile:
    """Wrap an arbitrary profile (for criteria and counterexamples)."""
    if deriv is None:
        def deriv(x, h=1e-6):
            return (fn(np.asarray(x) + h) - fn(np.asarray(x) - h)) / (2 * h)
    return MeridianProfile("custom", float("nan"), fn, deriv, period)


def profile_invariants(profile: MeridianProfile, grid: int = 10_000) -> dict:
    """Oddness and periodicity residuals plus the min of deriv + 1 on a grid."""
    x = np.linspace(-profile.period, profile.period, grid)
    fx = profile.eval(x)
    return {
        "odd": float(np.max(np.abs(profile.eval(-x) + fx))),
        "periodic": float(np.max(np.abs(profile.eval(x + profile.period) - fx))),
        "min_deriv_plus_one": float(np.min(profile.deriv(x) + 1.0)),
    }


def write_profile_csv(path, profile: MeridianProfile, samples: int = 1000) -> None:
    """Two-column CSV (x, value) over one period."""
    x = np.linspace(0.0, profile.period, samples, endpoint=False)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["x", "value"])
        for xi, vi in zip(x, profile.eval(x)):
            wr.writerow([repr(float(xi)), repr(float(vi))])


# -- maps ----------------------------------------------------------------------

@dataclass(frozen=True)
class ClosedFormMap:
    """Meridian-preserving map for the split (k, l) driven by ``profile``."""

    k: int
    l: int
    profile: MeridianProfile

    def __post_init__(self):
        if self.profile.full_circle and self.k != 1:
            raise ValueError("a 2pi-periodic profile needs the split (1, n)")

    def from_coords(self, x, u, v) -> np.ndarray:
        """Image of (cos x u, sin x v) for any representative (x, u, v)."""
        y = x + float(self.profile.eval(x))
        return np.concatenate([np.cos(y) * np.asarray(u), np.sin(y) * np.asarray(v)])

    def forward_one(self, p) -> np.ndarray:
        if self.profile.full_circle:
            x, v, _ = polar_angle(p)
            return self.from_coords(x, np.ones(1), v)
        sc = split_coords(p, self.k)
        return self.from_coords(sc.x, sc.u, sc.v)

    def forward(self, P) -> np.ndarray:
        """Vectorized over an (N, n+1) array (or a single point)."""
        P = np.asarray(P, dtype=float)
        if P.ndim == 1:
            return self.forward_one(P)
        if self.profile.full_circle:
            rest = P[:, 1:]
            nb = np.linalg.norm(rest, axis=1)
            x = np.arctan2(nb, P[:, 0])
            u = np.ones((len(P), 1))
        else:
            a_blk, rest = P[:, : self.k], P[:, self.k:]
            na = np.linalg.norm(a_blk, axis=1)
            nb = np.linalg.norm(rest, axis=1)
            x = np.arctan2(nb, na)
            u = _unit_rows(a_blk, na)
        v = _unit_rows(rest, nb)
        y = x + self.profile.eval(x)
        return np.concatenate([np.cos(y)[:, None] * u, np.sin(y)[:, None] * v], axis=1)

    __call__ = forward


def _unit_rows(B, norms):
    out = np.zeros_like(B)
    ok = norms > POLICY.degenerate_block
    out[ok] = B[ok] / norms[ok, None]
    out[~ok, 0] = 1.0
    return out


def conformal_map(a: float, n: int) -> ClosedFormMap:
    """The boost exp(a X_{e_0}) written as a meridian map with profile g."""
    return ClosedFormMap(1, n, g_profile(a))


def projective_map_two_eigen(a: float, k: int, l: int) -> ClosedFormMap:
    """The projective map of diag(e^{a/2} I_k, e^{-a/2} I_l) via profile f."""
    if k < 1 or l < 1:
        raise ValueError("both blocks must be non-empty")
    return ClosedFormMap(k, l, f_profile(a))


def two_eigen_matrix(a: float, k: int, l: int) -> np.ndarray:
    return np.diag(np.concatenate([np.full(k, np.exp(a / 2)), np.full(l, np.exp(-a / 2))]))


def projective_two_eigen_direct(a: float, k: int, P) -> np.ndarray:
    """(e^{a/2} cos x u, e^{-a/2} sin x v) / (e^a cos^2 x + e^{-a} sin^2 x)^{1/2}."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    A = P[:, :k]
    B = P[:, k:]
    num = np.concatenate([np.exp(a / 2) * A, np.exp(-a / 2) * B], axis=1)
    den = np.sqrt(np.exp(a) * np.sum(A * A, axis=1) + np.exp(-a) * np.sum(B * B, axis=1))
    return num / den[:, None]


# -- potentials ----------------------------------------------------------------

def potential_from_angle(profile: MeridianProfile, x, order: int | None = None) -> np.ndarray:
    """int_0^x profile(s) ds by Gauss-Legendre on [0, x], no normalization."""
    order = POLICY.quad_order if order is None else order
    t, w = gauss_legendre_01(order)
    x = np.asarray(x, dtype=float)
    s = x[..., None] * t
    return x * (profile.eval(s) @ w)


def _meridian_angle(profile, p, k):
    if profile.full_circle:
        return polar_angle(p)[0]
    return split_coords(p, k).x


def potential_phi(profile: MeridianProfile, p, k: int = 1) -> float:
    """phi(cos x u, sin x v) = int_0^x f for the representative x in [0, pi/2].

    For the conformal profile the split is (1, n) and x runs over [0, pi].
    """
    return float(potential_from_angle(profile, _meridian_angle(profile, p, k)))


def potential_phi_many(profile: MeridianProfile, P, k: int = 1) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if profile.full_circle:
        x = np.arctan2(np.linalg.norm(P[:, 1:], axis=1), P[:, 0])
    else:
        x = np.arctan2(np.linalg.norm(P[:, k:], axis=1), np.linalg.norm(P[:, :k], axis=1))
    return potential_from_angle(profile, x)


def gradient_field_W(profile: MeridianProfile, p, k: int = 1) -> np.ndarray:
    """W(p) = f(x) (-sin x u, cos x v), the gradient of :func:`potential_phi`.

    On degenerate blocks the canonical u or v from split_coords is used; the
    result is the zero vector whenever f(x) = 0.
    """
    if profile.full_circle:
        x, v, _ = polar_angle(p)
        u = np.ones(1)
    else:
        sc = split_coords(p, k)
        x, u, v = sc.x, sc.u, sc.v
    fx = float(profile.eval(x))
    if fx == 0.0:
        return np.zeros_like(np.asarray(p, dtype=float))
    return fx * np.concatenate([-np.sin(x) * u, np.cos(x) * v])


def displacement_distance(a: float, p, order: int | None = None) -> float:
    """D(cos x, sin x v) = int_0^1 a |sin x| / h(cos x, t) dt."""
    order = POLICY.quad_order if order is None else order
    t, w = gauss_legendre_01(order)
    p = np.asarray(p, dtype=float)
    c = float(np.clip(p[0], -1.0, 1.0))
    s = float(np.linalg.norm(p[1:]))
    return float(np.sum(w * a * s / _h(c, t, a)))


# -- double cover --------------------------------------------------------------

def _rho(P):
    x, y = P[..., 0], P[..., 1]
    return np.stack([x * x - y * y, 2 * x * y], axis=-1)


def circle_boost(a: float, P) -> np.ndarray:
    """exp(a [[0, 1], [1, 0]]) acting on (cos x, sin x)."""
    P = np.asarray(P, dtype=float)
    c, s = P[..., 0], P[..., 1]
    den = np.sinh(a) * c + np.cosh(a)
    return np.stack([(np.cosh(a) * c + np.sinh(a)) / den, s / den], axis=-1)


def double_cover_check(a: float, samples: int) -> float:
    """Max deviation of rho(proj(exp A) z) from boost(exp B)(rho z) on S^1.

    A = (a/2) diag(1, -1) acts projectively and B = a [[0, 1], [1, 0]]
    conformally; rho(z) = z^2.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    x = 2 * np.pi * np.arange(samples) / samples
    z = np.stack([np.cos(x), np.sin(x)], axis=-1)
    top = _rho(ga.projective_act(np.diag([np.exp(a / 2), np.exp(-a / 2)]), z))
    bottom = circle_boost(a, _rho(z))
    return float(np.max(np.linalg.norm(top - bottom, axis=-1)))


def projective_profile_from_diagram(a: float, x) -> np.ndarray:
    """Recover f from the commuting square: 2(x + f(x)) = 2x + g(2x) mod 2pi.

    The angle of rho(proj z) is unwrapped against 2x + g(2x) computed through
    the conformal circle action, and f is read off as half the angle change.
    """
    x = np.asarray(x, dtype=float)
    z2 = np.stack([np.cos(2 * x), np.sin(2 * x)], axis=-1)
    w = circle_boost(a, z2)
    ang = np.arctan2(w[..., 1], w[..., 0])
    delta = np.angle(np.exp(1j * (ang - 2 * x)))
    return 0.5 * delta


def gradient_check_directions(profile, p, k, rng, count, h=1e-5):
    """Central differences of phi along random tangent directions at p.

    Returns (fd, exact) arrays with exact = <W(p), dir>.
    """
    p = np.asarray(p, dtype=float)
    W = gradient_field_W(profile, p, k)
    fd, ex = [], []
    for _ in range(count):
        d = rng.standard_normal(p.shape[0])
        d -= np.dot(d, p) * p
        d /= np.linalg.norm(d)
        plus = potential_phi(profile, exp_map(p, h * d), k)
        minus = potential_phi(profile, exp_map(p, -h * d), k)
        fd.append((plus - minus) / (2 * h))
        ex.append(float(np.dot(W, d)))
    return np.array(fd), np.array(ex)


def conformal_map_for_generator(v):
    """Closed-form meridian map of exp(X_v) for an arbitrary generator v.

    Conjugates the e_0-axis map by a rotation R with R e_0 = v/|v|.
    """
    v = np.asarray(v, dtype=float)
    a = float(np.linalg.norm(v))
    m = v.shape[0]
    if a == 0.0:
        return lambda P: np.array(P, dtype=float, copy=True)
    e0 = np.zeros(m)
    e0[0] = 1.0
    R = rotation_to(e0, v / a)
    base = conformal_map(a, m - 1)
    return lambda P: base.forward(np.asarray(P, dtype=float) @ R) @ R.T


def projective_closed_form(P, rel_tol=None):
    """Closed-form meridian map for symmetric positive P with <= 2 eigenvalues.

    Returns ``None`` when P has three or more distinct eigenvalues.
    """
    groups = ga.distinct_eigenvalues(P, rel_tol)
    if len(groups) == 1:
        return lambda X: np.array(X, dtype=float, copy=True)
    params = ga.two_eigen_parameter(P, rel_tol)
    if params is None:
        return None
    a, k, l, R = params
    base = projective_map_two_eigen(a, k, l)
    return lambda X: base.forward(np.asarray(X, dtype=float) @ R) @ R.T
