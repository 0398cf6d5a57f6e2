"""Conformal (Lorentz) and projective (GL+) actions on S^n and their polar
decompositions.

Lorentz matrices are (n+2)x(n+2) and preserve J = diag(-1, I_{n+1}); index 0
is the time coordinate, so a sphere point u sits in the light cone as (1, u).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NotGLPlus, NotLorentz
from .policy import POLICY


def lorentz_form(m: int) -> np.ndarray:
    J = np.eye(m)
    J[0, 0] = -1.0
    return J


def validate_lorentz(A, tol=None) -> np.ndarray:
    """Check that A lies in the identity component of O(1, n+1)."""
    A = np.asarray(A, dtype=float)
    tol = POLICY.group_tol if tol is None else tol
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 3:
        raise NotLorentz(f"shape {A.shape}: expected square matrix of size >= 3")
    J = lorentz_form(A.shape[0])
    # scale-aware: boosts have entries of size cosh(a)
    resid = np.max(np.abs(A.T @ J @ A - J))
    scale = max(1.0, np.max(np.abs(A)) ** 2)
    if resid > tol * scale:
        raise NotLorentz(f"A^T J A != J (residual {resid:.3e})")
    if np.linalg.det(A) <= 0:
        raise NotLorentz("det(A) <= 0: not orientation preserving")
    if A[0, 0] <= 0:
        raise NotLorentz("A[0, 0] <= 0: reverses time orientation")
    return A


def validate_projective(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 2:
        raise NotGLPlus(f"shape {A.shape}: expected square matrix of size >= 2")
    if not np.linalg.det(A) > 0:
        raise NotGLPlus("det(A) <= 0: not in GL+")
    return A


def generator_matrix(v) -> np.ndarray:
    """The symmetric Lie-algebra element [[0, v^T], [v, 0]]."""
    v = np.asarray(v, dtype=float)
    m = v.shape[0] + 1
    X = np.zeros((m, m))
    X[0, 1:] = v
    X[1:, 0] = v
    return X


def exp_generator(v) -> np.ndarray:
    """Closed-form exponential of the generator with vector ``v``.

    For v = a e, |e| = 1, this is the hyperbolic rotation by angle a in the
    plane spanned by (1, 0) and (0, e), and the identity on its complement.
    """
    v = np.asarray(v, dtype=float)
    m = v.shape[0] + 1
    a = np.linalg.norm(v)
    out = np.eye(m)
    if a == 0.0:
        return out
    e = v / a
    ch, sh = np.cosh(a), np.sinh(a)
    out[0, 0] = ch
    out[0, 1:] = sh * e
    out[1:, 0] = sh * e
    out[1:, 1:] += (ch - 1.0) * np.outer(e, e)
    return out


def block_rotation(O) -> np.ndarray:
    """diag(1, O) for O in SO(n+1)."""
    O = np.asarray(O, dtype=float)
    m = O.shape[0] + 1
    out = np.eye(m)
    out[1:, 1:] = O
    return out


def conformal_act(A, u, validate: bool = False) -> np.ndarray:
    """A . u: rescale A(1, u) back to the affine slice w_0 = 1.

    Accepts a single point or an (N, n+1) array of points.
    """
    A = np.asarray(A, dtype=float)
    if validate:
        validate_lorentz(A)
    u = np.asarray(u, dtype=float)
    lifted = np.concatenate([np.ones(u.shape[:-1] + (1,)), u], axis=-1)
    w = lifted @ A.T
    out = w[..., 1:] / w[..., :1]
    # restore exact unit norm lost to cancellation for large boosts
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def projective_act(A, p) -> np.ndarray:
    """Ap / |Ap|, vectorized over leading axes of ``p``."""
    A = np.asarray(A, dtype=float)
    w = np.asarray(p, dtype=float) @ A.T
    return w / np.linalg.norm(w, axis=-1, keepdims=True)


def conformal_flow_field(v, p) -> np.ndarray:
    """Velocity of t -> exp(t X_v) . p at t = 0: v - <v, p> p."""
    v = np.asarray(v, dtype=float)
    p = np.asarray(p, dtype=float)
    return v - np.dot(v, p) * p


def _sym_eig(S):
    w, Q = np.linalg.eigh(0.5 * (S + S.T))
    return w, Q


def spd_sqrt(S) -> np.ndarray:
    w, Q = _sym_eig(S)
    if np.min(w) <= 0:
        raise ValueError("matrix is not positive definite")
    return (Q * np.sqrt(w)) @ Q.T


def spd_log(S) -> np.ndarray:
    w, Q = _sym_eig(S)
    if np.min(w) <= 0:
        raise ValueError("matrix is not positive definite")
    return (Q * np.log(w)) @ Q.T


@dataclass(frozen=True)
class PolarPair:
    """A = symmetric_part @ rotation_part."""

    symmetric_part: np.ndarray
    rotation_part: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.symmetric_part @ self.rotation_part

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.symmetric_part)


@dataclass(frozen=True)
class CartanPair:
    """A = exp(X_v) @ diag(1, O)."""

    generator: np.ndarray
    rotation: np.ndarray

    @property
    def boost(self) -> np.ndarray:
        return exp_generator(self.generator)

    def reconstruct(self) -> np.ndarray:
        return self.boost @ block_rotation(self.rotation)


def _svd_polar(A):
    """Euclidean polar factors of A from its SVD: A = (U S U^T)(U V^T).

    Working on A rather than A A^T keeps the error at eps * cond(A) instead
    of eps * cond(A)^2, which matters for large boosts.
    """
    U, s, Vt = np.linalg.svd(A)
    if np.min(s) <= 0:
        raise ValueError("matrix is singular")
    return U, s, U @ Vt


def cartan_decompose(A, validate: bool = True) -> CartanPair:
    """Split a Lorentz matrix into boost exp(X_v) and rotation block O.

    exp(X_v) is the positive symmetric square root of A A^T; its logarithm,
    taken on the eigen (singular) basis, is the generator matrix X_v, from
    which v is read off. The orthogonal factor is diag(1, O).
    """
    A = np.asarray(A, dtype=float)
    if validate:
        validate_lorentz(A)
    U, s, K = _svd_polar(A)
    X = (U * np.log(s)) @ U.T
    v = 0.5 * (X[0, 1:] + X[1:, 0])
    return CartanPair(v, K[1:, 1:].copy())


def polar_decompose(A) -> PolarPair:
    """A = P O with P = (A A^T)^{1/2} symmetric positive and O orthogonal."""
    A = validate_projective(A)
    U, s, O = _svd_polar(A)
    P = (U * s) @ U.T
    return PolarPair(0.5 * (P + P.T), O)


def distinct_eigenvalues(P, rel_tol=None) -> np.ndarray:
    """Cluster the eigenvalues of a symmetric matrix (relative gap test)."""
    rel_tol = POLICY.two_eigen_rel if rel_tol is None else rel_tol
    w = np.sort(np.linalg.eigvalsh(0.5 * (P + P.T)))
    groups = [w[0]]
    for lam in w[1:]:
        if abs(lam - groups[-1]) > rel_tol * max(abs(lam), abs(groups[-1])):
            groups.append(lam)
    return np.array(groups)


def two_eigen_parameter(P, rel_tol=None):
    """For P with exactly two eigenvalues return (a, k, l, R).

    R is orthogonal with R^T P R = c diag(e^{a/2} I_k, e^{-a/2} I_l), the
    larger eigenvalue first; a = log(lambda_max / lambda_min).
    Returns None when P does not have exactly two distinct eigenvalues.
    """
    groups = distinct_eigenvalues(P, rel_tol)
    if len(groups) != 2:
        return None
    w, Q = np.linalg.eigh(0.5 * (P + P.T))
    order = np.argsort(-w)
    w, Q = w[order], Q[:, order]
    lo, hi = groups[0], groups[1]
    k = int(np.sum(np.abs(w - hi) <= np.abs(w - lo)))
    if np.linalg.det(Q) < 0:
        Q[:, -1] = -Q[:, -1]
    return float(np.log(hi / lo)), k, len(w) - k, Q


# -- plain-text matrix format ------------------------------------------------

def format_matrix(A) -> str:
    """Row-major text: one row per line, whitespace-separated decimals."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return "".join(" ".join(repr(float(x)) for x in row) + "\n" for row in A)


def parse_matrix(text: str) -> np.ndarray:
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append([float(tok) for tok in line.split()])
    if not rows:
        raise ValueError("empty matrix text")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"ragged rows: widths {sorted(widths)}")
    return np.array(rows)


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())


def write_matrix(path, A) -> None:
    Path(path).write_text(format_matrix(A))
