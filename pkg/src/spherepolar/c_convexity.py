"""Grid c-transforms for c = d^2/2 and c-convexity checks.

The c-transform uses the sup convention, phi^c(p) = max_q {-c(p, q) - phi(q)},
so a c-convex phi satisfies phi^cc = phi and its optimal map is
Exp(grad phi).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .closed_form_maps import MeridianProfile, custom_profile, potential_from_angle, potential_phi_many
from .discrete_ot import mean_spacing, sample_sphere
from .policy import POLICY
from .sphere_geom import pairwise_distance, split_coords, polar_angle


@dataclass(frozen=True)
class GridFunction:
    points: np.ndarray
    values: np.ndarray
    domain: str = "circle"

    def __post_init__(self):
        if len(self.points) < 8:
            raise ValueError("grid needs at least 8 nodes")
        if len(self.points) != len(self.values):
            raise ValueError("one value per node")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid values must be finite")

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.points, np.asarray(values, dtype=float), self.domain)

    def __len__(self):
        return len(self.points)


def circle_nodes(N: int) -> np.ndarray:
    return sample_sphere(1, N, "uniform-circle").points


def fibonacci_nodes(N: int) -> np.ndarray:
    return sample_sphere(2, N, "fibonacci-s2").points


def circle_function(N: int, fn) -> GridFunction:
    """Sample fn(theta) at theta_i = 2 pi i / N."""
    th = 2 * np.pi * np.arange(N) / N
    return GridFunction(circle_nodes(N), np.asarray(fn(th), dtype=float), "circle")


def profile_potential_grid(profile: MeridianProfile, points, k: int = 1, domain="circle") -> GridFunction:
    """The meridian potential phi = int_0^x profile sampled on ``points``."""
    return GridFunction(np.asarray(points, dtype=float), potential_phi_many(profile, points, k), domain)


def _cost(P, Q):
    return 0.5 * pairwise_distance(P, Q) ** 2


def sup_convolution(phi: GridFunction, at=None, block: int = 2048) -> GridFunction | np.ndarray:
    """phi^c over the nodes of ``phi``.

    Returns a GridFunction on the same nodes, or plain values at the query
    points ``at`` when given. Ties resolve to the lowest node index.
    """
    query = phi.points if at is None else np.atleast_2d(np.asarray(at, dtype=float))
    out = np.empty(len(query))
    for s in range(0, len(query), block):
        C = _cost(query[s:s + block], phi.points)
        out[s:s + block] = np.max(-C - phi.values[None, :], axis=1)
    if at is None:
        return phi.with_values(out)
    return out


def c_convexity_defect(phi: GridFunction) -> float:
    """max |phi^cc - phi| over the grid."""
    cc = sup_convolution(sup_convolution(phi))
    return float(np.max(np.abs(cc.values - phi.values)))


def grid_tolerance(points, factor: float | None = None) -> float:
    """factor * mean nearest-neighbour spacing of the grid."""
    factor = POLICY.grid_tol_factor if factor is None else factor
    return factor * mean_spacing(points)


def _meridian_frame(profile, p, k):
    """(x, u, v, block size) with p = (cos x u, sin x v)."""
    if profile.full_circle:
        x, v, _ = polar_angle(p)
        return x, np.ones(1), v, 1
    sc = split_coords(p, k)
    return sc.x, sc.u, sc.v, k


def reduce_to_meridian(profile: MeridianProfile, p, k: int = 1, samples: int = 4096) -> float:
    """phi^c(p) from a 1-D maximization over the meridian circle through p.

    The circle is theta -> (cos theta u, sin theta v). Distances along it are
    wrapped angle differences and the potential is int_0^theta profile. The
    best of ``samples`` uniform angles seeds a golden-section refinement.
    """
    x, _, _, _ = _meridian_frame(profile, p, k)

    def objective(theta):
        d = np.abs(np.angle(np.exp(1j * (np.asarray(theta) - x))))
        return -0.5 * d * d - potential_from_angle(profile, theta)

    th = 2 * np.pi * np.arange(samples) / samples - np.pi
    vals = objective(th)
    i = int(np.argmax(vals))
    step = 2 * np.pi / samples
    best_theta, best = th[i], vals[i]
    lo, hi = best_theta - step, best_theta + step
    if objective(lo) < best and objective(hi) < best:
        res = minimize_scalar(lambda t: -float(objective(t)), bracket=(lo, best_theta, hi),
                              method="golden", tol=1e-12)
        if -res.fun > best:
            best = -res.fun
    return float(best)


def meridian_circle_point(profile, p, k, theta) -> np.ndarray:
    """The point (cos theta u, sin theta v) on the meridian circle through p."""
    _, u, v, _ = _meridian_frame(profile, p, k)
    return np.concatenate([np.cos(theta) * u, np.sin(theta) * v])


@dataclass(frozen=True)
class CircleCriterionReport:
    monotone: bool
    min_increment: float
    zero_mean: bool
    integral: float

    @property
    def passed(self) -> bool:
        return self.monotone and self.zero_mean


def circle_optimality_criterion(profile: MeridianProfile, grid: int = 100_000,
                                integral_tol: float = 1e-9) -> CircleCriterionReport:
    """Lift test on S^1: x + f(x) nondecreasing and int_0^{2pi} f = 0."""
    x = np.linspace(0.0, 2 * np.pi, grid + 1)
    y = x + profile.eval(x)
    inc = float(np.min(np.diff(y)))
    # rectangle rule is spectrally accurate for smooth periodic integrands
    xs = 2 * np.pi * np.arange(4096) / 4096
    integral = float(np.sum(profile.eval(xs)) * 2 * np.pi / 4096)
    return CircleCriterionReport(inc >= -1e-12, inc, abs(integral) < integral_tol, integral)


def steep_profile(amplitude: float = 10.0) -> MeridianProfile:
    """Profile of phi = amplitude cos x; for amplitude > 1 its gradient map folds the circle."""
    return custom_profile(lambda x: -amplitude * np.sin(x), lambda x: -amplitude * np.cos(x))


def defect_table(profile: MeridianProfile, sizes=(128, 256, 512, 1024)) -> list[tuple[int, float]]:
    """c-convexity defect of the meridian potential on circles of each size."""
    rows = []
    for N in sizes:
        phi = profile_potential_grid(profile, circle_nodes(N), 1)
        rows.append((N, c_convexity_defect(phi)))
    return rows


def write_grid_csv(path, phi: GridFunction) -> None:
    """node-index, coordinates, value."""
    m = phi.points.shape[1]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["index"] + [f"x{i}" for i in range(m)] + ["value"])
        for i, (pt, val) in enumerate(zip(phi.points, phi.values)):
            wr.writerow([i] + [repr(float(c)) for c in pt] + [repr(float(val))])
