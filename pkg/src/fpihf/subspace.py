"""Orthogonal projectors onto closed subspaces and partial-inverse steps."""

from __future__ import annotations

import warnings

import numpy as np
from scipy import linalg

from .opcore import as_vector

__all__ = [
    "KernelFactorization",
    "SubspaceProjector",
    "block_projector",
    "linear_inner_oracle",
    "partial_inverse_resolvent",
    "projector_from_basis",
    "projector_from_kernel",
    "resolvent_inner_oracle",
]

RANK_TOL = 1e-10


class SubspaceProjector:
    """Orthogonal projector ``P_V`` onto a subspace ``V`` of R^n.

    Parameters
    ----------
    project : callable
        ``project(x)`` returns ``P_V x``.
    ambient_dim : int
        Dimension ``n`` of the ambient space.
    matrix : ndarray, optional
        Dense representation of ``P_V`` when one is available.
    """

    def __init__(self, project, ambient_dim, matrix=None):
        self._project = project
        self.ambient_dim = int(ambient_dim)
        self.matrix = matrix

    def __call__(self, x):
        if np.shape(x) != (self.ambient_dim,):
            raise ValueError(f"expected a vector of length {self.ambient_dim}, got shape {np.shape(x)}")
        return self._project(x)

    def project(self, x):
        return self(x)

    def complement(self, x):
        """``P_{V^perp} x = x - P_V x``."""
        return x - self(x)

    def to_dense(self):
        if self.matrix is not None:
            return self.matrix
        return np.column_stack([self._project(e) for e in np.eye(self.ambient_dim)])

    def __repr__(self):
        return f"SubspaceProjector(ambient_dim={self.ambient_dim})"


def _dense_projector(P):
    P = 0.5 * (P + P.T)
    return SubspaceProjector(lambda x: P @ x, P.shape[0], matrix=P)


def projector_from_basis(basis):
    """Projector onto the span of the columns of `basis`.

    Raises ``ValueError`` if the columns are not linearly independent
    (relative rank threshold ``1e-10`` on a column-pivoted QR).
    """
    basis = np.asarray(basis, dtype=np.float64)
    if basis.ndim == 1:
        basis = basis[:, None]
    n, k = basis.shape
    if k == 0 or k > n:
        raise ValueError(f"basis of shape {basis.shape} cannot span a subspace of R^{n}")
    Q, R, _ = linalg.qr(basis, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag[-1] <= RANK_TOL * max(diag[0], 1.0):
        raise ValueError("basis columns are linearly dependent")
    return _dense_projector(Q @ Q.T)


def projector_from_kernel(T):
    """Projector onto ``ker T``: ``P = Id - T^T (T T^T)^{-1} T``.

    ``T T^T`` is factored once by Cholesky. When `T` has dependent rows the
    pseudo-inverse is used instead and a ``RuntimeWarning`` is emitted.
    """
    T = np.asarray(T, dtype=np.float64)
    if T.ndim != 2 or not np.any(T):
        raise ValueError("T must be a nonzero matrix")
    n = T.shape[1]
    try:
        G = linalg.cho_factor(T @ T.T)
        s = np.linalg.svd(T, compute_uv=False)
        if s[-1] <= RANK_TOL * s[0]:
            raise linalg.LinAlgError("rank deficient")
        P = np.eye(n) - T.T @ linalg.cho_solve(G, T)
    except linalg.LinAlgError:
        warnings.warn(
            "T T^T is singular; using the pseudo-inverse", RuntimeWarning, stacklevel=2
        )
        P = np.eye(n) - np.linalg.pinv(T) @ T
    return _dense_projector(P)


class KernelFactorization:
    """Cached factorization for ``V = ker T`` with ``T(x, w) = A x - w``.

    ``B = (Id + A A^T)^{-1}`` is never formed; a Cholesky factor of
    ``Id + A A^T`` is computed once and reused by :meth:`apply_B`.
    """

    def __init__(self, A):
        A = np.asarray(A, dtype=np.float64)
        if A.ndim != 2:
            raise ValueError("A must be a matrix")
        self.A = A
        self.K, self.N = A.shape
        self._cho = linalg.cho_factor(np.eye(self.K) + A @ A.T)

    def apply_B(self, v):
        """``(Id + A A^T)^{-1} v``."""
        return linalg.cho_solve(self._cho, v, check_finite=False)

    @property
    def B_cache(self):
        """Dense ``(Id + A A^T)^{-1}``; for inspection only."""
        return self.apply_B(np.eye(self.K))

    def project_pair(self, x, w):
        """Return ``P_V(x, w) = (x - A^T B (A x - w), w + B (A x - w))``."""
        d = self.apply_B(self.A @ x - w)
        return x - self.A.T @ d, w + d

    def projector(self):
        N = self.N

        def project(v):
            x, w = self.project_pair(v[:N], v[N:])
            return np.concatenate([x, w])

        return SubspaceProjector(project, N + self.K)


def block_projector(P, extra_dim):
    """``P (+) Id`` on ``R^n x R^extra_dim``: the subspace ``V x R^extra_dim``."""
    n = P.ambient_dim

    def project(v):
        out = v.copy()
        out[:n] = P(v[:n])
        return out

    return SubspaceProjector(project, n + int(extra_dim))


def partial_inverse_resolvent(resolvent, P, v, gamma):
    """Inner step of the partial-inverse iteration with unit relaxation.

    Returns ``(p, q)`` with ``p = J_{gamma A}(v)`` and ``q = (v - p)/gamma``,
    so that ``q in A p`` and ``p + gamma q = v``. The resolvent of the
    partial inverse ``(gamma A)_V`` at `v` is ``P_V p + gamma P_{V^perp} q``.
    `P` is accepted for signature symmetry with the general inner oracles.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    v = as_vector(v, "input")
    p = np.asarray(resolvent(v, gamma), dtype=np.float64)
    q = (v - p) / gamma
    return p, q


def resolvent_inner_oracle(resolvent, P):
    """Inner oracle for relaxation ``lam == 1`` built on ``J_{gamma A}``."""

    def inner(v, lam, gamma):
        if lam != 1.0:
            raise ValueError(
                "the resolvent inner oracle only solves the inclusion for lambda == 1"
            )
        return partial_inverse_resolvent(resolvent, P, v, gamma)

    return inner


def linear_inner_oracle(M, P):
    """Exact inner oracle for a linear monotone ``A = M`` and any relaxation.

    Solves for ``(p, q)``::

        p + gamma q = v
        P_V q / lam + P_perp q = M (P_V p + P_perp p / lam)

    by eliminating ``q`` and a dense solve of size ``n``.
    """
    M = np.asarray(M, dtype=np.float64)
    PV = P.to_dense()
    Pp = np.eye(PV.shape[0]) - PV

    def inner(v, lam, gamma):
        lhs = M @ (PV + Pp / lam) + PV / (gamma * lam) + Pp / gamma
        rhs = PV @ v / (gamma * lam) + Pp @ v / gamma
        p = np.linalg.solve(lhs, rhs)
        return p, (v - p) / gamma

    return inner
