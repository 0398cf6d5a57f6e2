"""Discrete optimal transport on S^n for the cost d^2/2.

Exact assignment (uniform clouds of equal size) and log-domain entropic
scaling with epsilon annealing, map extraction by barycentric projection,
and a sample-level polar factorization S = T o U.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment
from scipy.spatial import cKDTree

from .errors import NotConverged, NotUniform, SizeMismatch, SolverFailure, UnsupportedScheme
from .policy import POLICY
from .sphere_geom import geodesic_distance, normalize, pairwise_distance

log = logging.getLogger(__name__)

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


@dataclass
class DiscreteMeasure:
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.points) != len(self.weights):
            raise SizeMismatch("points and weights differ in length")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")

    def __len__(self):
        return len(self.points)

    @property
    def is_uniform(self) -> bool:
        return bool(np.allclose(self.weights, 1.0 / len(self), rtol=0, atol=1e-15))

    @classmethod
    def uniform(cls, points):
        points = np.asarray(points, dtype=float)
        return cls(points, np.full(len(points), 1.0 / len(points)))


def sample_sphere(n: int, N: int, scheme: str = "seeded-random", seed: int | None = 0) -> DiscreteMeasure:
    """Equal-weight point cloud on S^n.

    ``uniform-circle`` (n = 1): angles 2 pi i / N.
    ``fibonacci-s2`` (n = 2): golden-angle spiral with z_i = 1 - (2i + 1)/N.
    ``seeded-random``: normalized standard normals from ``default_rng(seed)``.
    """
    if N < 8:
        raise ValueError("need at least 8 points")
    if scheme == "uniform-circle":
        if n != 1:
            raise UnsupportedScheme(f"uniform-circle needs n=1, got n={n}")
        th = 2 * np.pi * np.arange(N) / N
        pts = np.stack([np.cos(th), np.sin(th)], axis=1)
    elif scheme == "fibonacci-s2":
        if n != 2:
            raise UnsupportedScheme(f"fibonacci-s2 needs n=2, got n={n}")
        i = np.arange(N)
        z = 1.0 - (2.0 * i + 1.0) / N
        r = np.sqrt(1.0 - z * z)
        phi = GOLDEN_ANGLE * i
        pts = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    elif scheme == "seeded-random":
        if seed is None:
            raise UnsupportedScheme("seeded-random requires a seed")
        rng = np.random.default_rng(seed)
        pts = normalize(rng.standard_normal((N, n + 1)))
    else:
        raise UnsupportedScheme(f"unknown scheme {scheme!r}")
    return DiscreteMeasure.uniform(pts)


def nearest_neighbor_distances(points) -> np.ndarray:
    """Geodesic distance from each point to its nearest other point."""
    points = np.asarray(points, dtype=float)
    tree = cKDTree(points)
    chord, _ = tree.query(points, k=2)
    return 2.0 * np.arcsin(np.minimum(chord[:, 1] / 2.0, 1.0))


def mean_spacing(points) -> float:
    return float(np.mean(nearest_neighbor_distances(points)))


def cost_matrix(X, Y) -> np.ndarray:
    """c(x, y) = d(x, y)^2 / 2."""
    return 0.5 * pairwise_distance(X, Y) ** 2


@dataclass
class TransportPlan:
    source: DiscreteMeasure
    target: DiscreteMeasure
    coupling: object  # dense ndarray or scipy.sparse matrix
    cost: float = float("nan")
    converged: bool = True
    iterations: int = 0
    epsilon: float | None = None
    history: list = field(default_factory=list)
    assignment: np.ndarray | None = None

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.coupling.sum(axis=1)).ravel()

    def col_sums(self) -> np.ndarray:
        return np.asarray(self.coupling.sum(axis=0)).ravel()

    def marginal_error(self) -> float:
        """Larger of the L1 row and column marginal errors."""
        return float(max(np.abs(self.row_sums() - self.source.weights).sum(),
                         np.abs(self.col_sums() - self.target.weights).sum()))

    def transport_cost(self) -> float:
        C = cost_matrix(self.source.points, self.target.points)
        if sparse.issparse(self.coupling):
            coo = self.coupling.tocoo()
            return float(np.sum(coo.data * C[coo.row, coo.col]))
        return float(np.sum(self.coupling * C))


def solve_exact(mu: DiscreteMeasure, nu: DiscreteMeasure) -> TransportPlan:
    """Optimal assignment for c = d^2/2 between equal-size uniform clouds."""
    N = len(mu)
    if len(nu) != N:
        raise SizeMismatch(f"|mu|={N} != |nu|={len(nu)}")
    if not (mu.is_uniform and nu.is_uniform):
        raise NotUniform("exact solver handles uniform weights only")
    if N > 4096:
        raise SizeMismatch("exact solver limited to N <= 4096")
    C = cost_matrix(mu.points, nu.points)
    rows, cols = linear_sum_assignment(C)
    perm = np.empty(N, dtype=int)
    perm[rows] = cols
    coupling = sparse.csr_matrix((np.full(N, 1.0 / N), (np.arange(N), perm)), shape=(N, N))
    cost = float(C[np.arange(N), perm].sum() / N)
    return TransportPlan(mu, nu, coupling, cost=cost, assignment=perm)


def brute_force_assignment(C) -> tuple[np.ndarray, float]:
    """Exhaustive minimum over all permutations (tiny N only)."""
    from itertools import permutations

    C = np.asarray(C)
    N = C.shape[0]
    best, best_perm = np.inf, None
    idx = np.arange(N)
    for perm in permutations(range(N)):
        s = C[idx, perm].sum()
        if s < best:
            best, best_perm = s, perm
    return np.array(best_perm), float(best)


def _log_kernel(f, g, C, eps):
    return np.exp((f[:, None] + g[None, :] - C) / eps)


def solve_entropic(mu: DiscreteMeasure, nu: DiscreteMeasure, epsilon: float | None = None,
                   schedule=None, max_iters: int = 20000, marginal_tol: float = 1e-5,
                   absorb: float = 1e8, strict: bool = False) -> TransportPlan:
    """Entropic OT by log-stabilized Sinkhorn scaling with epsilon annealing.

    The plan is kept as exp((f_i + g_j - C_ij)/eps) u_i v_j. Scalings u, v are
    folded into the dual potentials f, g whenever they leave [1/absorb,
    absorb], and again before each epsilon change, so the Gibbs kernel never
    overflows or loses its support at small epsilon.

    ``epsilon`` alone runs a single stage; otherwise ``schedule`` (default
    0.1 down to 0.001). ``max_iters`` caps each stage. Rows are exact after
    every update; a stage stops once the L1 column error is below
    ``marginal_tol``. Hitting the cap marks the plan unconverged, and
    ``strict`` raises NotConverged with the plan attached.
    """
    if schedule is None:
        schedule = (epsilon,) if epsilon is not None else POLICY.anneal
    schedule = tuple(float(e) for e in schedule)
    if any(e <= 0 for e in schedule):
        raise ValueError("epsilon must be positive")
    a, b = mu.weights, nu.weights
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("entropic solver needs strictly positive weights")
    C = cost_matrix(mu.points, nu.points)
    f = np.zeros(len(a))
    g = np.zeros(len(b))
    history = []
    converged = True
    total = 0
    with np.errstate(divide="ignore", over="ignore"):
        for eps in schedule:
            K = _log_kernel(f, g, C, eps)
            u = np.ones(len(a))
            v = np.ones(len(b))
            stage_ok = False
            err = np.inf
            for it in range(1, max_iters + 1):
                u = a / (K @ v)
                Ktu = K.T @ u
                err = float(np.abs(v * Ktu - b).sum())
                if not np.isfinite(err):
                    raise SolverFailure(f"non-finite marginal error at eps={eps}")
                if err < marginal_tol:
                    stage_ok = True
                    break
                v = b / Ktu
                if max(np.max(np.abs(np.log(u))), np.max(np.abs(np.log(v)))) > np.log(absorb):
                    f += eps * np.log(u)
                    g += eps * np.log(v)
                    K = _log_kernel(f, g, C, eps)
                    u[:] = 1.0
                    v[:] = 1.0
            total += it
            f += eps * np.log(u)
            g += eps * np.log(v)
            P = _log_kernel(f, g, C, eps)
            stage_cost = float(np.sum(P * C))
            history.append({"epsilon": eps, "iterations": it, "marginal_error": err,
                            "cost": stage_cost, "converged": stage_ok})
            log.debug("eps=%g iters=%d err=%.2e cost=%.6f", eps, it, err, stage_cost)
            converged &= stage_ok
    plan = TransportPlan(mu, nu, P, cost=stage_cost, converged=converged,
                         iterations=total, epsilon=schedule[-1], history=history)
    if strict and not converged:
        raise NotConverged(f"marginal error {err:.2e} >= {marginal_tol:.2e}", plan=plan)
    return plan


def extract_map(plan: TransportPlan, fallback_norm: float = 0.1) -> np.ndarray:
    """Barycentric projection of the plan, pushed back onto the sphere.

    Rows whose ambient barycenter has norm below ``fallback_norm`` use the
    heaviest target instead (lowest index on ties).
    """
    Y = plan.target.points
    if plan.assignment is not None:
        return Y[plan.assignment].copy()
    Pm = plan.coupling
    mass = plan.row_sums()
    bary = np.asarray(Pm @ Y) / mass[:, None]
    nb = np.linalg.norm(bary, axis=1)
    out = np.empty_like(bary)
    ok = nb >= fallback_norm
    out[ok] = bary[ok] / nb[ok, None]
    if np.any(~ok):
        heavy = np.asarray(Pm.argmax(axis=1)).ravel()
        out[~ok] = Y[heavy[~ok]]
    return out


@dataclass
class NumericalFactorization:
    source: np.ndarray
    S_samples: np.ndarray
    T_samples: np.ndarray
    U_samples: np.ndarray
    U_index: np.ndarray
    plan: TransportPlan
    diagnostics: dict


def knn_radius(points, query, k: int) -> np.ndarray:
    """Geodesic radius of the k-th neighbour of each query within ``points``.

    The query point itself counts when it belongs to ``points``.
    """
    tree = cKDTree(points)
    chord, _ = tree.query(query, k=k + 1)
    return 2.0 * np.arcsin(np.minimum(chord[:, -1] / 2.0, 1.0))


def volume_statistic(source, image, n: int, k: int = 8) -> dict:
    """Compare k-NN ball volumes of the source cloud with those of its image.

    Geodesic balls of radius r have volume ~ r^n for small r, so the log
    volume ratio is n log(r_after / r_before).
    """
    r0 = knn_radius(source, source, k)
    r1 = np.maximum(knn_radius(image, image, k), 1e-12)
    lr = n * np.log(r1 / r0)
    return {"max_abs_log_volume_ratio": float(np.max(np.abs(lr))),
            "median_abs_log_volume_ratio": float(np.median(np.abs(lr)))}


def solve(mu, nu, config: dict | None = None) -> TransportPlan:
    config = dict(config or {})
    method = config.pop("method", "entropic")
    if method == "exact":
        return solve_exact(mu, nu)
    if method == "entropic":
        return solve_entropic(mu, nu, **config)
    raise SolverFailure(f"unknown solver {method!r}")


def numerical_polar_factorization(S: Callable, mu: DiscreteMeasure, solver_config: dict | None = None,
                                  k_nn: int = 8) -> NumericalFactorization:
    """Sample-level Brenier-McCann factorization S = T o U.

    nu is the pushforward cloud S(mu); T comes from the OT plan mu -> nu and
    U(x_i) is the sample x_k whose T(x_k) is nearest to S(x_i).
    """
    X = mu.points
    Y = np.asarray(S(X), dtype=float)
    nu = DiscreteMeasure(Y, mu.weights.copy())
    try:
        plan = solve(mu, nu, solver_config)
    except NotConverged:
        raise
    except (ValueError, FloatingPointError) as exc:
        raise SolverFailure(str(exc)) from exc
    T = extract_map(plan)
    tree = cKDTree(T)
    _, idx = tree.query(Y, k=1)
    U = X[idx]
    comp = geodesic_distance(T[idx], Y)
    n = X.shape[1] - 1
    diag = {
        "transport_cost": plan.transport_cost(),
        "marginal_error": plan.marginal_error(),
        "converged": plan.converged,
        "composition_max": float(np.max(comp)),
        "composition_mean": float(np.mean(comp)),
        "U_injectivity": float(len(np.unique(idx)) / len(idx)),
        "mean_spacing": mean_spacing(X),
    }
    diag.update(volume_statistic(X, U, n, k_nn))
    return NumericalFactorization(X, Y, T, U, idx, plan, diag)


def compare_maps(T1, T2, cloud=None) -> dict:
    """Geodesic deviation statistics between two maps on a cloud.

    ``T1`` and ``T2`` are either callables (evaluated on ``cloud``) or arrays
    of images already evaluated on the same cloud.
    """
    A = T1(cloud) if callable(T1) else np.asarray(T1)
    B = T2(cloud) if callable(T2) else np.asarray(T2)
    dev = geodesic_distance(A, B)
    return {"mean": float(np.mean(dev)), "max": float(np.max(dev)),
            "p95": float(np.percentile(dev, 95)), "deviations": dev}


def fraction_within(dev, tol) -> float:
    return float(np.mean(np.asarray(dev) <= tol))


# -- CSV surfaces ----------------------------------------------------------------

def write_map_csv(path, source, target) -> None:
    """index, source coords, target coords."""
    source = np.asarray(source)
    target = np.asarray(target)
    m = source.shape[1]
    hdr = ["index"] + [f"x{i}" for i in range(m)] + [f"y{i}" for i in range(m)]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(hdr)
        for i, (s, t) in enumerate(zip(source, target)):
            wr.writerow([i] + [repr(float(c)) for c in s] + [repr(float(c)) for c in t])


def read_map_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    hdr, body = rows[0], rows[1:]
    m = sum(1 for h in hdr if h.startswith("x"))
    data = np.array([[float(c) for c in r[1:]] for r in body])
    return data[:, :m], data[:, m:]


def write_plan_csv(path, plan: TransportPlan, threshold: float = 0.0) -> None:
    """Sparse triplets (i, j, mass) for entries above ``threshold``."""
    coo = sparse.coo_matrix(plan.coupling)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["i", "j", "mass"])
        for t in order:
            if coo.data[t] > threshold:
                wr.writerow([int(coo.row[t]), int(coo.col[t]), repr(float(coo.data[t]))])
