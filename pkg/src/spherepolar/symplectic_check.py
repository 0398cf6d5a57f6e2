"""The cost-induced symplectic form on S^n x S^n and the Lagrangian-graph test.

omega = d alpha with alpha(X, Y) = d_p c(X). In the adapted frame
C = (u_1..u_n, v_1..v_n) its matrix is [[0, A], [-A, 0]] with
A = diag(1, d/sin d, ..., d/sin d). The graph of a linear map
L: T_pS^n -> T_qS^n is Lagrangian iff A [L] is symmetric, i.e. iff the
matrix of inner products <L u_j, b_i> is symmetric, where b_1 = (sin d/d) v_1
and b_i = v_i otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDistance, FixedPoint
from .group_actions import projective_act
from .policy import POLICY
from .sphere_geom import OmegaFrame, adapted_frame, exp_map, geodesic_distance


def d_over_sin(d: float) -> float:
    if d < 1e-4:
        d2 = d * d
        return 1.0 + d2 / 6.0 + 7.0 * d2 * d2 / 360.0
    return d / np.sin(d)


def _check_distance(d):
    if d <= POLICY.cut_locus_margin or d >= np.pi - POLICY.cut_locus_margin:
        raise DegenerateDistance(f"omega needs 0 < d < pi, got d={d!r}")


def omega_block(d: float, n: int) -> np.ndarray:
    """A = diag(1, d/sin d I_{n-1})."""
    return np.diag(np.concatenate([[1.0], np.full(n - 1, d_over_sin(d))]))


def omega_matrix(p, q) -> np.ndarray:
    """[[0, A], [-A, 0]] in the adapted frame of (p, q)."""
    p = np.asarray(p, dtype=float)
    d = geodesic_distance(p, q)
    _check_distance(d)
    n = p.shape[0] - 1
    A = omega_block(d, n)
    Z = np.zeros((n, n))
    return np.block([[Z, A], [-A, Z]])


def _cost(p, q):
    d = geodesic_distance(p, q)
    return 0.5 * d * d


def _central_mixed(p, q, X, Y, h):
    pp, pm = exp_map(p, h * X), exp_map(p, -h * X)
    qp, qm = exp_map(q, h * Y), exp_map(q, -h * Y)
    return (_cost(pp, qp) - _cost(pp, qm) - _cost(pm, qp) + _cost(pm, qm)) / (4 * h * h)


def mixed_second_difference(p, q, X, Y, h: float | None = None, richardson: bool = True) -> float:
    """d/dt d/ds c(Exp_p(sX), Exp_q(tY)) at 0 by central differences.

    With ``richardson`` the steps h and 2h are combined to cancel the h^2
    term, which otherwise dominates as d approaches pi.
    """
    h = POLICY.fd_step if h is None else h
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if not X.any() or not Y.any():
        return 0.0
    m1 = _central_mixed(p, q, X, Y, h)
    if not richardson:
        return m1
    m2 = _central_mixed(p, q, X, Y, 2 * h)
    return (4.0 * m1 - m2) / 3.0


def omega_pairing(p, q, Z1, Z2, h: float | None = None) -> float:
    """omega((X1, Y1), (X2, Y2)) = M(X2, Y1) - M(X1, Y2), M the mixed derivative.

    Only mixed p-q second derivatives survive in d alpha; pure p-p and q-q
    blocks cancel by symmetry of second derivatives.
    """
    n1 = len(Z1) // 2
    X1, Y1 = Z1[:n1], Z1[n1:]
    X2, Y2 = Z2[:n1], Z2[n1:]
    return mixed_second_difference(p, q, X2, Y1, h) - mixed_second_difference(p, q, X1, Y2, h)


def omega_numeric(p, q, i: int, j: int, h: float | None = None, frame: OmegaFrame | None = None) -> float:
    """Finite-difference omega((u_i, 0), (0, v_j)); indices are 0-based."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    _check_distance(geodesic_distance(p, q))
    fr = adapted_frame(p, q) if frame is None else frame
    return -mixed_second_difference(p, q, fr.B[i], fr.Bbar[j], h)


def omega_numeric_matrix(p, q, h: float | None = None) -> np.ndarray:
    """Full 2n x 2n finite-difference matrix of omega in the frame C."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    _check_distance(geodesic_distance(p, q))
    fr = adapted_frame(p, q)
    n = fr.B.shape[0]
    m = p.shape[0]
    basis = [np.concatenate([b, np.zeros(m)]) for b in fr.B]
    basis += [np.concatenate([np.zeros(m), b]) for b in fr.Bbar]
    Om = np.empty((2 * n, 2 * n))
    for a in range(2 * n):
        for b in range(2 * n):
            Om[a, b] = omega_pairing(p, q, basis[a], basis[b], h)
    return Om


def dT_projective(P, p, v) -> np.ndarray:
    """Differential of p -> Pp/|Pp|: pr_{q-perp}(Pv) / |Pp|."""
    P = np.asarray(P, dtype=float)
    p = np.asarray(p, dtype=float)
    Pp = P @ p
    a = np.linalg.norm(Pp)
    q = Pp / a
    w = P @ np.asarray(v, dtype=float)
    return (w - np.dot(w, q) * q) / a


@dataclass
class LagrangianReport:
    p: np.ndarray
    q: np.ndarray
    d: float
    dT_matrix: np.ndarray
    asymmetry: float
    predicted_ratio: float
    measured_ratio: float = float("nan")
    tolerance: float = POLICY.lagrangian_tol
    skipped: bool = False
    reason: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def lagrangian(self) -> bool:
        return self.asymmetry < self.tolerance

    @property
    def verdict(self) -> str:
        if self.skipped:
            return "skipped"
        return "symmetric" if self.lagrangian else "asymmetric"

    def to_text(self) -> str:
        fmt = lambda arr: " ".join(repr(float(x)) for x in np.ravel(arr))
        lines = [
            f"point: {fmt(self.p)}",
            f"image: {fmt(self.q)}",
            f"d: {self.d!r}",
        ]
        for i, row in enumerate(np.atleast_2d(self.dT_matrix)):
            lines.append(f"matrix_row_{i}: {fmt(row)}")
        lines += [
            f"asymmetry: {self.asymmetry!r}",
            f"predicted_ratio: {self.predicted_ratio!r}",
            f"measured_ratio: {self.measured_ratio!r}",
            f"tolerance: {self.tolerance!r}",
            f"verdict: {self.verdict}",
        ]
        if self.reason:
            lines.append(f"reason: {self.reason}")
        return "\n".join(lines) + "\n"


def asymmetry(M) -> float:
    """Spectral norm of M - M^T.

    Invariant under the frame rotations Q = diag(1, R), which conjugate the
    antisymmetric part; for 2x2 matrices it is |M_01 - M_10|.
    """
    K = np.asarray(M, dtype=float)
    K = K - K.T
    if K.shape[0] == 1:
        return 0.0
    return float(np.linalg.norm(K, 2))


def in_generic_set(p, tol: float = 1e-12) -> bool:
    """Point has every coordinate nonzero (the open dense set of the test)."""
    return bool(np.all(np.abs(np.asarray(p)) > tol))


def lagrangian_matrix(P, p, frame: OmegaFrame | None = None):
    """Matrix <dT(u_j), b_i> for the rescaled target basis b, plus (q, d, frame)."""
    P = np.asarray(P, dtype=float)
    p = np.asarray(p, dtype=float)
    q = projective_act(P, p)
    d = geodesic_distance(p, q)
    if d <= POLICY.cut_locus_margin:
        raise FixedPoint(f"p is (numerically) fixed by T: d={d!r}")
    fr = adapted_frame(p, q) if frame is None else frame
    Bp = fr.Bbar.copy()
    Bp[0] *= 1.0 / d_over_sin(d)
    images = np.array([dT_projective(P, p, u) for u in fr.B])
    return Bp @ images.T, q, d, fr


def rotate_frame(fr: OmegaFrame, R) -> OmegaFrame:
    """Rotate u_2..u_n (and v_2..v_n alike) by R in SO(n-1)."""
    R = np.asarray(R, dtype=float)
    B = fr.B.copy()
    Bb = fr.Bbar.copy()
    B[1:] = R @ fr.B[1:]
    Bb[1:] = R @ fr.Bbar[1:]
    return OmegaFrame(fr.p, fr.q, fr.d, B, Bb)


def lagrangian_test(P, p, frame: OmegaFrame | None = None, tol: float | None = None,
                    require_generic: bool = False) -> LagrangianReport:
    """Is graph(dT_p) Lagrangian for omega at (p, T(p))?

    The measured ratio is <dT(u_2), b_1> / <dT(u_1), v_2>; for any u_2
    orthogonal to p and q it equals <q, p> sin d / d.
    """
    tol = POLICY.lagrangian_tol if tol is None else tol
    p = np.asarray(p, dtype=float)
    if require_generic and not in_generic_set(p):
        n = p.shape[0] - 1
        return LagrangianReport(p, projective_act(P, p), float("nan"), np.full((n, n), np.nan),
                                float("nan"), float("nan"), tolerance=tol, skipped=True,
                                reason="point has a zero coordinate")
    M, q, d, _ = lagrangian_matrix(P, p, frame)
    asym = asymmetry(M)
    predicted = float(np.dot(q, p) * np.sin(d) / d)
    measured = float("nan")
    if M.shape[0] >= 2 and M[1, 0] != 0.0:
        measured = float(M[0, 1] / M[1, 0])
    return LagrangianReport(p, q, d, M, asym, predicted, measured, tolerance=tol,
                            extra={"max_entry_asymmetry": float(np.max(np.abs(M - M.T)))})


def graph_omega_residual(P, p) -> float:
    """max |omega(Z_i, Z_j)| over graph vectors Z_i = (u_i, dT u_i), omega closed form."""
    P = np.asarray(P, dtype=float)
    p = np.asarray(p, dtype=float)
    q = projective_act(P, p)
    fr = adapted_frame(p, q)
    Om = omega_matrix(p, q)
    # coordinates of (u_i, dT u_i) in C
    Gb = np.array([dT_projective(P, p, u) for u in fr.B]) @ fr.Bbar.T
    n = fr.B.shape[0]
    Z = np.hstack([np.eye(n), Gb])
    return float(np.max(np.abs(Z @ Om @ Z.T)))


def triple_product_identity(lambdas, x) -> tuple[float, float]:
    """<P^2 x, Px x x> and (l0-l1)(l0-l2)(l1-l2) x0 x1 x2 for P = diag(lambdas)."""
    lam = np.asarray(lambdas, dtype=float)
    x = np.asarray(x, dtype=float)
    Px = lam * x
    lhs = float(np.dot(lam * Px, np.cross(Px, x)))
    rhs = float((lam[0] - lam[1]) * (lam[0] - lam[2]) * (lam[1] - lam[2]) * x[0] * x[1] * x[2])
    return lhs, rhs


def batch_lagrangian(P, points, require_generic: bool = True, tol: float | None = None) -> list[LagrangianReport]:
    out = []
    for p in np.asarray(points, dtype=float):
        try:
            out.append(lagrangian_test(P, p, tol=tol, require_generic=require_generic))
        except FixedPoint as exc:
            n = len(p) - 1
            out.append(LagrangianReport(p, p, 0.0, np.full((n, n), np.nan), float("nan"),
                                        float("nan"), skipped=True, reason=str(exc)))
    return out
