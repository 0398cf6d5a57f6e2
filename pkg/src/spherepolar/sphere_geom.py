"""Exact geometry of the round sphere S^n embedded in R^{n+1}.

Points and tangent vectors are plain float arrays; a tangent vector is always
paired with the base point it was built at. Functions accept single vectors
unless stated otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AntipodalPoints, DegenerateDistance
from .policy import POLICY


def as_point(p, tol=None) -> np.ndarray:
    """Return ``p`` as a float array, checking it has unit norm."""
    p = np.asarray(p, dtype=float)
    tol = POLICY.unit_tol * 10 if tol is None else tol
    if abs(np.linalg.norm(p) - 1.0) > tol:
        raise ValueError(f"not a unit vector: norm={np.linalg.norm(p)!r}")
    return p


def normalize(x, axis=-1) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x / np.linalg.norm(x, axis=axis, keepdims=True)


def geodesic_distance(p, q) -> np.ndarray | float:
    """Great-circle distance in [0, pi].

    Equal to ``arccos(clip(<p, q>))``; evaluated as ``2 atan2(|p-q|, |p+q|)``,
    which keeps full precision near 0 and pi. Broadcasts over leading axes.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    chord = np.linalg.norm(p - q, axis=-1)
    anti = np.linalg.norm(p + q, axis=-1)
    d = 2.0 * np.arctan2(chord, anti)
    return float(d) if np.ndim(d) == 0 else d


def pairwise_distance(P, Q) -> np.ndarray:
    """Matrix of geodesic distances between rows of ``P`` and rows of ``Q``."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    g = np.clip(P @ Q.T, -1.0, 1.0)
    d = np.arccos(g)
    # arccos loses half the digits near the diagonal; patch small distances
    near = d < 1e-3
    if near.any():
        i, j = np.nonzero(near)
        d[i, j] = geodesic_distance(P[i], Q[j])
    return d


def exp_map(base, vec) -> np.ndarray:
    """Riemannian exponential: cos|w| base + sin|w| w/|w|."""
    base = np.asarray(base, dtype=float)
    vec = np.asarray(vec, dtype=float)
    t = np.linalg.norm(vec, axis=-1, keepdims=True)
    small = t < POLICY.exp_zero
    safe = np.where(small, 1.0, t)
    out = np.cos(t) * base + np.sin(t) * vec / safe
    out = np.where(small, base, out)
    return out


def log_map(p, q) -> np.ndarray:
    """Inverse of :func:`exp_map`; raises on (near) antipodal pairs."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = geodesic_distance(p, q)
    if d >= np.pi - POLICY.cut_locus_margin:
        raise AntipodalPoints(f"log map undefined at distance {d!r}")
    w = q - np.dot(p, q) * p
    nw = np.linalg.norm(w)
    if nw == 0.0 or d == 0.0:
        return np.zeros_like(p)
    return d * w / nw


def unit_direction(p, q) -> np.ndarray:
    """gamma'(0) for the unit-speed minimal geodesic from p to q."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = geodesic_distance(p, q)
    if d <= POLICY.cut_locus_margin or d >= np.pi - POLICY.cut_locus_margin:
        raise DegenerateDistance(f"no unique geodesic direction at d={d!r}")
    w = q - np.dot(p, q) * p
    return w / np.linalg.norm(w)


def parallel_transport(p, q, w) -> np.ndarray:
    """Transport ``w`` in T_pS^n to T_qS^n along the minimal geodesic.

    The component along gamma'(0) is rotated onto gamma'(d); everything
    orthogonal to span{p, q} is left alone.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    w = np.asarray(w, dtype=float)
    d = geodesic_distance(p, q)
    if d >= np.pi - POLICY.cut_locus_margin:
        raise AntipodalPoints(f"parallel transport undefined at d={d!r}")
    if d <= POLICY.cut_locus_margin:
        raise DegenerateDistance(f"transport between coincident points d={d!r}")
    u1 = unit_direction(p, q)
    v1 = -np.sin(d) * p + np.cos(d) * u1
    return w + np.dot(w, u1) * (v1 - u1)


@dataclass(frozen=True)
class SplitCoordinates:
    """Meridian coordinates p = (cos x u, sin x v) for R^k + R^l."""

    x: float
    u: np.ndarray
    v: np.ndarray
    k: int
    l: int
    u_degenerate: bool = False
    v_degenerate: bool = False

    def reconstruct(self) -> np.ndarray:
        return np.concatenate([np.cos(self.x) * self.u, np.sin(self.x) * self.v])

    @property
    def meridian_tangent(self) -> np.ndarray:
        """Unit vector (-sin x u, cos x v), the d/dx direction."""
        return np.concatenate([-np.sin(self.x) * self.u, np.cos(self.x) * self.v])


def _block_unit(b, tol):
    nb = np.linalg.norm(b)
    if nb <= tol:
        e = np.zeros_like(b)
        e[0] = 1.0
        return nb, e, True
    return nb, b / nb, False


def split_coords(p, k: int) -> SplitCoordinates:
    """Split ``p`` along R^k + R^l with x normalized to [0, pi/2].

    A vanishing block gets the first canonical vector of that block and is
    flagged degenerate.
    """
    p = np.asarray(p, dtype=float)
    m = p.shape[-1]
    if not 1 <= k <= m - 1:
        raise ValueError(f"split index k={k} outside [1, {m - 1}]")
    tol = POLICY.degenerate_block
    na, u, du = _block_unit(p[:k], tol)
    nb, v, dv = _block_unit(p[k:], tol)
    x = float(np.arctan2(nb, na))
    return SplitCoordinates(x, u, v, k, m - k, du, dv)


def polar_angle(p) -> tuple[float, np.ndarray, bool]:
    """Angle from e_0 in [0, pi] and unit direction of the remaining block.

    This is the (1, n) split without the sign normalization of
    :func:`split_coords`; the conformal maps need x on the full [0, pi].
    """
    p = np.asarray(p, dtype=float)
    nb, v, dv = _block_unit(p[1:], POLICY.degenerate_block)
    return float(np.arctan2(nb, p[0])), v, dv


@dataclass(frozen=True)
class OmegaFrame:
    """Adapted frames at p and q = gamma(d); rows of B and Bbar are the bases."""

    p: np.ndarray
    q: np.ndarray
    d: float
    B: np.ndarray
    Bbar: np.ndarray


def complete_basis(first: np.ndarray, dim: int, skip: float | None = None) -> np.ndarray:
    """Orthonormal rows: ``first`` followed by Gram-Schmidt of canonical vectors.

    Canonical vectors whose residual norm falls below ``skip`` are dropped.
    """
    skip = POLICY.frame_skip if skip is None else skip
    rows = [np.asarray(r, dtype=float) for r in first]
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        for r in rows:
            e = e - np.dot(e, r) * r
        ne = np.linalg.norm(e)
        if ne < skip:
            continue
        e = e / ne
        # second pass for orthogonality at machine precision
        for r in rows:
            e = e - np.dot(e, r) * r
        rows.append(e / np.linalg.norm(e))
        if len(rows) == dim:
            break
    return np.array(rows)


def adapted_frame(p, q) -> OmegaFrame:
    """Orthonormal frame of T_pS^n with u_1 = gamma'(0), transported to q."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = geodesic_distance(p, q)
    m = p.shape[0]
    if d <= POLICY.cut_locus_margin or d >= np.pi - POLICY.cut_locus_margin:
        raise DegenerateDistance(f"adapted frame needs 0 < d < pi, got {d!r}")
    u1 = unit_direction(p, q)
    full = complete_basis([p, u1], m)
    B = full[1:]
    v1 = -np.sin(d) * p + np.cos(d) * u1
    Bbar = B + np.outer(B @ u1, v1 - u1)
    return OmegaFrame(p, q, d, B, Bbar)


def gamma(p, q, t):
    """Unit-speed minimal geodesic from p toward q evaluated at time t."""
    u1 = unit_direction(p, q)
    return np.cos(t) * np.asarray(p, dtype=float) + np.sin(t) * u1


def random_points(n: int, N: int, rng: np.random.Generator) -> np.ndarray:
    """N independent uniform points on S^n."""
    return normalize(rng.standard_normal((N, n + 1)))


def random_rotation(m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of SO(m)."""
    z = rng.standard_normal((m, m))
    qm, r = np.linalg.qr(z)
    qm = qm * np.sign(np.diag(r))
    if np.linalg.det(qm) < 0:
        qm[:, 0] = -qm[:, 0]
    return qm


def rotation_to(a, b) -> np.ndarray:
    """Element of SO(m) taking unit a to unit b, identity off span{a, b}."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m = a.shape[0]
    c = float(np.clip(np.dot(a, b), -1.0, 1.0))
    w = b - c * a
    nw = np.linalg.norm(w)
    if nw < 1e-15:
        if c > 0:
            return np.eye(m)
        # half turn in a plane containing a
        w = complete_basis([a], m)[1]
        nw = 1.0
        c = -1.0
    # |b - c a| keeps the sine accurate for nearly parallel a, b
    s = nw if c > -1.0 else 0.0
    w = w / nw
    return (np.eye(m) + (c - 1.0) * (np.outer(a, a) + np.outer(w, w))
            + s * (np.outer(w, a) - np.outer(a, w)))
