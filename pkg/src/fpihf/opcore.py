"""Proximal and operator calculus primitives.

Points are 1-D ``float64`` numpy arrays. Oracles follow two call
conventions:

* prox / resolvent oracles: ``oracle(x, step) -> ndarray`` evaluating
  ``prox_{step f}(x)`` or ``J_{step A}(x)``;
* single-valued maps (:class:`LipschitzMap`, :class:`CocoerciveMap`):
  ``op(x) -> ndarray`` together with their constant.

Oracles must be side-effect free.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

ProxOracle = Callable[[np.ndarray, float], np.ndarray]
ResolventOracle = ProxOracle

__all__ = [
    "CocoerciveMap",
    "LipschitzMap",
    "as_vector",
    "chi",
    "discrete_gradient",
    "discrete_gradient_adjoint",
    "discrete_gradient_matrix",
    "operator_norm",
    "project_box",
    "prox_conjugate",
    "prox_l1",
    "zero_map",
]


def as_vector(x, name="x"):
    """Return `x` as a finite 1-D float64 array, raising ``ValueError`` otherwise."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class LipschitzMap:
    """Monotone single-valued map with a known Lipschitz constant."""

    apply: Callable[[np.ndarray], np.ndarray]
    lipschitz_constant: float

    def __post_init__(self):
        if not self.lipschitz_constant >= 0:
            raise ValueError("lipschitz_constant must be nonnegative")

    def __call__(self, x):
        return self.apply(x)


@dataclass(frozen=True)
class CocoerciveMap:
    """Single-valued ``beta``-cocoercive map."""

    apply: Callable[[np.ndarray], np.ndarray]
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    def __call__(self, x):
        return self.apply(x)


def zero_map(x):
    return np.zeros_like(x)


def prox_l1(x, threshold):
    """Soft thresholding, the proximity operator of ``threshold * ||.||_1``.

    Examples
    --------
    >>> prox_l1([1.0, -2.0, 0.0], 1.0)
    array([ 0., -1.,  0.])
    """
    x = as_vector(x)
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    return np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)


def prox_conjugate(prox_f, x, step):
    """Evaluate ``prox_{step f*}(x)`` from a prox oracle of ``f``.

    Uses the Moreau decomposition
    ``prox_{step f*}(x) = x - step * prox_{f/step}(x/step)``, where
    ``prox_f(v, s)`` must evaluate ``prox_{s f}(v)``.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=np.float64)
    return x - step * prox_f(x / step, 1.0 / step)


def project_box(x, lower, upper):
    """Componentwise clamp of `x` to ``[lower, upper]``."""
    x = as_vector(x)
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    if lower.shape != x.shape or upper.shape != x.shape:
        raise ValueError(
            f"dimension mismatch: x {x.shape}, lower {lower.shape}, upper {upper.shape}"
        )
    if np.any(lower > upper):
        raise ValueError("lower > upper for some component")
    return np.maximum(np.minimum(x, upper), lower)


def chi(beta, lipschitz):
    """Step-size bound ``4 beta / (1 + sqrt(1 + 16 beta^2 L^2))``.

    The value lies strictly inside ``]0, min(2 beta, 1/L)[`` when ``L > 0``
    and equals ``2 beta`` when ``L == 0``. ``beta = inf`` (no cocoercive
    term) gives ``1/L``.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    if not lipschitz >= 0:
        raise ValueError("lipschitz must be nonnegative")
    if math.isinf(beta):
        return math.inf if lipschitz == 0 else 1.0 / lipschitz
    if math.isinf(lipschitz):
        return 0.0
    return 4.0 * beta / (1.0 + math.sqrt(1.0 + 16.0 * beta**2 * lipschitz**2))


def discrete_gradient(x):
    """Forward differences ``(x[i+1] - x[i])``; maps R^N to R^(N-1)."""
    x = as_vector(x)
    if x.size < 2:
        raise ValueError("discrete_gradient needs at least two entries")
    return np.diff(x)


def discrete_gradient_adjoint(u):
    """Adjoint of :func:`discrete_gradient` (a negative divergence); R^(N-1) -> R^N."""
    u = as_vector(u, "u")
    out = np.empty(u.size + 1)
    out[0] = -u[0]
    out[1:-1] = u[:-1] - u[1:]
    out[-1] = u[-1]
    return out


def discrete_gradient_matrix(n):
    """Dense ``(n-1) x n`` matrix of the discrete gradient."""
    if n < 2:
        raise ValueError("n must be at least 2")
    D = np.zeros((n - 1, n))
    idx = np.arange(n - 1)
    D[idx, idx] = -1.0
    D[idx, idx + 1] = 1.0
    return D


def operator_norm(A, tol=1e-10, max_iter=10000, seed=0):
    """Largest singular value of a dense matrix by power iteration on ``A^T A``.

    The start vector is drawn from a fixed seed so results are reproducible.
    A zero matrix returns 0.0 with a ``RuntimeWarning``.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("A contains NaN or infinite entries")
    if not np.any(A):
        warnings.warn("operator_norm of a zero matrix", RuntimeWarning, stacklevel=2)
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        w = A.T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # start vector fell into ker A
            v = rng.standard_normal(A.shape[1])
            v /= np.linalg.norm(v)
            continue
        new_sigma = math.sqrt(nw)
        v = w / nw
        if abs(new_sigma - sigma) <= tol * new_sigma:
            sigma = new_sigma
            break
        sigma = new_sigma
    # Rayleigh quotient is more accurate than the growth factor
    return float(np.linalg.norm(A @ v))
