"""Forward-partial inverse-half-forward splitting and its specializations.

All solvers find a zero of ``A + B + C + N_V`` (or a primal-dual extension)
where ``A`` is maximally monotone and accessed through its resolvent, ``B``
is monotone and Lipschitz, ``C`` is cocoercive and ``N_V`` is the normal
cone of a subspace ``V`` accessed through its projector.

Every solver returns a :class:`SolverReport`. An optional ``callback`` is
called after each iteration as ``callback(n, residual, objective, state)``
where ``state`` maps block names to the current iterates; it must not
modify them.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.sparse.linalg import aslinearoperator

from .exceptions import ConfigurationError, DivergenceError, InnerSolveError
from .opcore import (
    CocoerciveMap,
    LipschitzMap,
    chi,
    discrete_gradient,
    discrete_gradient_adjoint,
    operator_norm,
    prox_conjugate,
    prox_l1,
)
from .problems import objective as tv_objective
from .subspace import KernelFactorization

__all__ = [
    "CompositeBlock",
    "DualBlock",
    "SolverReport",
    "StepSchedule",
    "Termination",
    "composite_opt_solve",
    "fbhf_solve",
    "fixed_point_certificate",
    "fpihf_general_solve",
    "fpihf_solve",
    "lstv_chi",
    "lstv_solve",
    "primal_dual_solve",
    "residual",
]

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 50000
DEFAULT_STEP_FRACTION = 0.99
SUBSPACE_TOL = 1e-8
INNER_TOL = 1e-8


class Termination(str, enum.Enum):
    CONVERGED = "converged"
    ITERATION_CAP = "iteration_cap"
    ORACLE_ERROR = "oracle_error"


@dataclass
class SolverReport:
    """Summary of one solver run.

    ``x`` is the final primal iterate; ``y`` the final ``V^perp`` iterate
    (when the method has one); ``u`` the dual iterates. ``extras`` holds
    method-specific blocks and operator evaluation counts.
    """

    iterations: int
    wall_time_s: float
    final_residual: float
    termination: Termination
    objective: float | None = None
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    u: object = None
    extras: dict = field(default_factory=dict)

    @property
    def converged(self):
        return self.termination is Termination.CONVERGED


class StepSchedule:
    """Relaxation sequence ``lambda_n`` with a safety margin ``epsilon``.

    `lambdas` is a constant, a finite sequence (its last value repeats) or a
    callable ``n -> lambda_n``.
    """

    def __init__(self, lambdas, epsilon=None):
        self.lambdas = lambdas
        self.epsilon = epsilon

    def __call__(self, n):
        lam = self.lambdas
        if callable(lam):
            return float(lam(n))
        if np.isscalar(lam):
            return float(lam)
        return float(lam[min(n, len(lam) - 1)])

    def validate(self, upper, n_max, what="lambda"):
        """Check every ``lambda_n`` (n < n_max) lies in ``[eps, upper - eps]``."""
        eps = self.epsilon
        if eps is not None and not 0 < eps < upper / 2:
            raise ConfigurationError(f"epsilon={eps} violates 0 < epsilon < {upper / 2!r}")
        if callable(self.lambdas):
            values = (self(n) for n in range(n_max))
        elif np.isscalar(self.lambdas):
            values = (float(self.lambdas),)
        else:
            values = self.lambdas
        for lam in values:
            ok = (eps <= lam <= upper - eps) if eps is not None else (0 < lam < upper)
            if not ok:
                bound = f"[{eps}, {upper!r} - {eps}]" if eps is not None else f"]0, {upper!r}["
                raise ConfigurationError(f"{what}={lam!r} violates {what} in {bound}")


def residual(current, previous):
    """Relative change ``||cur - prev|| / max(1, ||prev||)`` over all blocks."""
    num = 0.0
    den = 0.0
    # overflow shows up as a non-finite residual, which callers report
    with np.errstate(over="ignore", invalid="ignore"):
        for c, p in zip(current, previous):
            d = np.asarray(c) - np.asarray(p)
            num += float(d @ d) if d.ndim else float(d * d)
            pp = np.asarray(p)
            den += float(pp @ pp) if pp.ndim else float(pp * pp)
    return math.sqrt(num) / max(1.0, math.sqrt(den))


def _check_finite(res, n):
    if not math.isfinite(res):
        raise DivergenceError(f"non-finite iterate at iteration {n}")


def _constants(B, C):
    L = 0.0 if B is None else float(B.lipschitz_constant)
    beta = math.inf if C is None else float(C.beta)
    return L, beta


def _check_gamma(gamma, bound, override, name="gamma", bound_name="chi"):
    if not gamma > 0:
        raise ConfigurationError(f"{name}={gamma!r} violates {name} > 0")
    if gamma >= bound and not override:
        raise ConfigurationError(f"{name}={gamma!r} violates {name} < {bound_name}={bound!r}")


def _default_gamma(bound):
    if math.isinf(bound):
        return 1.0
    return DEFAULT_STEP_FRACTION * bound


def _check_membership(v, P, in_V, name):
    if P is None:
        if not in_V and np.any(v):
            raise ValueError(f"{name} must be 0 when V is the whole space")
        return
    dev = P.complement(v) if in_V else P(v)
    if np.linalg.norm(dev) > SUBSPACE_TOL * (1.0 + np.linalg.norm(v)):
        where = "V" if in_V else "the orthogonal complement of V"
        raise ValueError(f"{name} must lie in {where}")


def fbhf_solve(A, B, C, z0, schedule, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
               callback=None, override_stepsize=False):
    """Forward-backward-half-forward splitting for ``0 in Az + Bz + Cz``.

    Iterates::

        s_n     = J_{lam_n A}(z_n - lam_n (B + C) z_n)
        z_{n+1} = s_n + lam_n (B z_n - B s_n)

    with ``lam_n`` in ``[eps, chi - eps]``, ``chi = chi(beta_C, L_B)``.

    Parameters
    ----------
    A : callable
        Resolvent oracle ``A(v, step) = J_{step A}(v)``.
    B : LipschitzMap or None
    C : CocoerciveMap or None
    z0 : array_like
    schedule : StepSchedule or float
    """
    if not isinstance(schedule, StepSchedule):
        schedule = StepSchedule(schedule)
    L, beta = _constants(B, C)
    bound = chi(beta, L)
    if not override_stepsize:
        schedule.validate(bound, max_iter)
    z = np.array(z0, dtype=np.float64)
    n_B = n_C = 0
    t0 = time.perf_counter()
    res = math.inf
    termination = Termination.ITERATION_CAP
    n = 0
    while n < max_iter:
        lam = schedule(n)
        Bz = B(z) if B is not None else None
        step = np.zeros_like(z)
        if B is not None:
            step += Bz
            n_B += 1
        if C is not None:
            step += C(z)
            n_C += 1
        s = A(z - lam * step, lam)
        if B is not None:
            z_new = s + lam * (Bz - B(s))
            n_B += 1
        else:
            z_new = s
        res = residual((z_new,), (z,))
        z = z_new
        n += 1
        _check_finite(res, n)
        if callback is not None:
            callback(n, res, None, {"z": z})
        if res <= tol:
            termination = Termination.CONVERGED
            break
    return SolverReport(n, time.perf_counter() - t0, res, termination, x=z,
                        extras={"evaluations": {"B": n_B, "C": n_C}})


def fpihf_general_solve(inner, B, C, V, gamma, schedule, x0=None, y0=None,
                        tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, callback=None,
                        override_stepsize=False):
    """Forward-partial inverse-half-forward iteration with relaxation.

    Each step calls ``inner(v, lam, gamma)`` which must return ``(p, q)``
    with ``p + gamma q = v`` and
    ``P_V q / lam + P_perp q in A(P_V p + P_perp p / lam)``, for
    ``v = x_n + gamma y_n - lam gamma P_V (B + C) x_n``. Then::

        x_{n+1} = P_V p + lam gamma P_V (B x_n - B P_V p)
        y_{n+1} = P_perp q

    ``lam_n`` must lie in ``[eps, chi/gamma - eps]``. Use
    :func:`fpihf.subspace.resolvent_inner_oracle` (``lam == 1``) or
    :func:`fpihf.subspace.linear_inner_oracle` to build `inner`.
    """
    if not isinstance(schedule, StepSchedule):
        schedule = StepSchedule(schedule)
    if not gamma > 0:
        raise ConfigurationError(f"gamma={gamma!r} violates gamma > 0")
    L, beta = _constants(B, C)
    bound = chi(beta, L) / gamma
    if not override_stepsize:
        schedule.validate(bound, max_iter)
    P = V if V is not None else (lambda v: v)
    x, y = _initial_xy(x0, y0, V)
    n_B = n_C = 0
    t0 = time.perf_counter()
    res = math.inf
    termination = Termination.ITERATION_CAP
    n = 0
    while n < max_iter:
        lam = schedule(n)
        Bx = B(x) if B is not None else None
        g = np.zeros_like(x)
        if B is not None:
            g += Bx
            n_B += 1
        if C is not None:
            g += C(x)
            n_C += 1
        v = x + gamma * y - lam * gamma * P(g)
        p, q = inner(v, lam, gamma)
        gap = np.linalg.norm(p + gamma * q - v)
        if not gap <= INNER_TOL * max(1.0, np.linalg.norm(v)):
            raise InnerSolveError(f"inner oracle violates p + gamma q = v by {gap:.3e}")
        Pp = P(p)
        if B is not None:
            x_new = Pp + lam * gamma * P(Bx - B(Pp))
            n_B += 1
        else:
            x_new = Pp
        y_new = q - P(q)
        res = residual((x_new, y_new), (x, y))
        x, y = x_new, y_new
        n += 1
        _check_finite(res, n)
        if callback is not None:
            callback(n, res, None, {"x": x, "y": y, "p": p, "q": q})
        if res <= tol:
            termination = Termination.CONVERGED
            break
    return SolverReport(n, time.perf_counter() - t0, res, termination, x=x, y=y,
                        extras={"evaluations": {"B": n_B, "C": n_C}})


def _initial_xy(x0, y0, V, dim=None):
    if x0 is None:
        if dim is None:
            dim = V.ambient_dim if V is not None else None
        if dim is None:
            raise ValueError("x0 is required when V is the whole space")
        x0 = np.zeros(dim)
    x = np.array(x0, dtype=np.float64)
    y = np.zeros_like(x) if y0 is None else np.array(y0, dtype=np.float64)
    if y.shape != x.shape:
        raise ValueError("x0 and y0 must have the same shape")
    _check_membership(x, V, True, "x0")
    _check_membership(y, V, False, "y0")
    return x, y


def fpihf_solve(A, B, C, V, gamma=None, x0=None, y0=None, tol=DEFAULT_TOL,
                max_iter=DEFAULT_MAX_ITER, callback=None, override_stepsize=False):
    """Forward-partial inverse-half-forward splitting with unit relaxation.

    Solves ``0 in A x + B x + C x + N_V x`` by::

        p_n     = J_{gamma A}(x_n + gamma y_n - gamma P_V (B + C) x_n)
        r_n     = P_V p_n
        x_{n+1} = r_n + gamma P_V (B x_n - B r_n)
        y_{n+1} = y_n - (p_n - r_n) / gamma

    Parameters
    ----------
    A : callable
        Resolvent oracle ``A(v, step) = J_{step A}(v)``.
    B : LipschitzMap or None
        Monotone Lipschitz part, evaluated twice per iteration.
    C : CocoerciveMap or None
        Cocoercive part, evaluated once per iteration.
    V : SubspaceProjector or None
        ``None`` means ``V`` is the whole space.
    gamma : float, optional
        Step size in ``]0, chi[`` with ``chi = chi(beta, L)``. Defaults to
        ``0.99 chi``.
    x0, y0 : array_like, optional
        Starting points in ``V`` and ``V^perp``; default zero.
    override_stepsize : bool
        Run even when ``gamma >= chi``.
    """
    L, beta = _constants(B, C)
    bound = chi(beta, L)
    if gamma is None:
        gamma = _default_gamma(bound)
    _check_gamma(gamma, bound, override_stepsize)
    P = V if V is not None else None
    x, y = _initial_xy(x0, y0, V)
    n_B = n_C = 0
    t0 = time.perf_counter()
    res = math.inf
    termination = Termination.ITERATION_CAP
    n = 0
    while n < max_iter:
        Bx = B(x) if B is not None else None
        g = np.zeros_like(x)
        if B is not None:
            g += Bx
            n_B += 1
        if C is not None:
            g += C(x)
            n_C += 1
        Pg = P(g) if P is not None else g
        p = A(x + gamma * y - gamma * Pg, gamma)
        r = P(p) if P is not None else p
        if B is not None:
            d = Bx - B(r)
            n_B += 1
            x_new = r + gamma * (P(d) if P is not None else d)
        else:
            x_new = r
        y_new = y - (p - r) / gamma
        res = residual((x_new, y_new), (x, y))
        x, y = x_new, y_new
        n += 1
        _check_finite(res, n)
        if callback is not None:
            callback(n, res, None, {"x": x, "y": y, "p": p, "r": r})
        if res <= tol:
            termination = Termination.CONVERGED
            break
    return SolverReport(n, time.perf_counter() - t0, res, termination, x=x, y=y,
                        extras={"gamma": gamma, "chi": bound,
                                "evaluations": {"B": n_B, "C": n_C}})


@dataclass
class DualBlock:
    """One dual block ``(B_i^{-1}, N_i^{-1}, D_i^{-1}, L_i)`` of a primal-dual problem.

    ``resolvent_inv(v, step)`` evaluates ``J_{step B_i^{-1}}(v)``. ``L`` is
    a matrix or a :class:`scipy.sparse.linalg.LinearOperator`; ``norm``
    (``||L||``) is computed by power iteration when omitted and ``L`` is dense.
    """

    resolvent_inv: Callable[[np.ndarray, float], np.ndarray]
    L: object
    N_inv: LipschitzMap | None = None
    D_inv: CocoerciveMap | None = None
    norm: float | None = None

    def __post_init__(self):
        dense = isinstance(self.L, np.ndarray)
        if self.norm is None:
            if not dense:
                raise ValueError("norm is required when L is not a dense matrix")
            self.norm = operator_norm(self.L, tol=1e-12) if np.any(self.L) else 0.0
        self.L = aslinearoperator(self.L)


def primal_dual_constants(M, C, blocks):
    """Aggregated Lipschitz constant and cocoercivity of the lifted operators.

    ``L = max(mu, nu_1, ..., nu_m) + sqrt(sum ||L_i||^2)`` and
    ``beta = min(zeta, delta_1, ..., delta_m)``, absent operators excluded.
    """
    lips = [0.0 if M is None else M.lipschitz_constant]
    lips += [b.N_inv.lipschitz_constant for b in blocks if b.N_inv is not None]
    L = max(lips) + math.sqrt(sum(b.norm**2 for b in blocks))
    betas = [C.beta] if C is not None else []
    betas += [b.D_inv.beta for b in blocks if b.D_inv is not None]
    beta = min(betas) if betas else math.inf
    return L, beta


def primal_dual_solve(A, M, C, V, blocks, gamma=None, x0=None, y0=None, u0=None,
                      tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, callback=None,
                      override_stepsize=False, dim=None):
    """Primal-dual splitting for a sum with linear compositions and a subspace.

    Finds ``x in V`` and duals ``u_i`` with::

        0 in A x + M x + C x + sum_i L_i^* u_i + N_V x
        0 in (B_i^{-1} + N_i^{-1} + D_i^{-1}) u_i - L_i x

    Each iteration::

        p     = J_{gamma A}(x + gamma y - gamma P_V((M + C) x + sum L_i^* u_i))
        q     = P_V p
        r_i   = J_{gamma B_i^{-1}}(u_i - gamma((N_i^{-1} + D_i^{-1}) u_i - L_i x))
        u_i  <- r_i - gamma(N_i^{-1} r_i - N_i^{-1} u_i - L_i (q - x))
        x    <- q - gamma P_V(M q - M x + sum L_i^* (r_i - u_i))
        y    <- y - (p - q) / gamma

    ``gamma`` must lie in ``]0, chi(beta, L)[`` with the constants of
    :func:`primal_dual_constants`.

    Parameters
    ----------
    A : callable
        Resolvent oracle of the primal maximally monotone operator.
    M : LipschitzMap or None
    C : CocoerciveMap or None
    V : SubspaceProjector or None
    blocks : sequence of DualBlock
    dim : int, optional
        Primal dimension, needed only when ``x0`` and ``V`` are both omitted.
    """
    L, beta = primal_dual_constants(M, C, blocks)
    bound = chi(beta, L)
    if gamma is None:
        gamma = _default_gamma(bound)
    _check_gamma(gamma, bound, override_stepsize)
    if dim is None and x0 is None and V is None and blocks:
        dim = blocks[0].L.shape[1]
    x, y = _initial_xy(x0, y0, V, dim)
    if u0 is None:
        u = [np.zeros(b.L.shape[0]) for b in blocks]
    else:
        u = [np.array(ui, dtype=np.float64) for ui in u0]
    P = V if V is not None else (lambda v: v)
    n_M = n_C = 0
    t0 = time.perf_counter()
    res = math.inf
    termination = Termination.ITERATION_CAP
    n = 0
    while n < max_iter:
        Mx = M(x) if M is not None else None
        g = np.zeros_like(x)
        if M is not None:
            g += Mx
            n_M += 1
        if C is not None:
            g += C(x)
            n_C += 1
        for b, ui in zip(blocks, u):
            g += b.L.rmatvec(ui)
        p = A(x + gamma * y - gamma * P(g), gamma)
        q = P(p)
        Lq_x = [b.L.matvec(q - x) for b in blocks]
        Lx = [b.L.matvec(x) for b in blocks]
        u_new = []
        corr = np.zeros_like(x)
        for b, ui, lqx, lx in zip(blocks, u, Lq_x, Lx):
            Nu = b.N_inv(ui) if b.N_inv is not None else None
            t = -lx
            if Nu is not None:
                t = t + Nu
            if b.D_inv is not None:
                t = t + b.D_inv(ui)
            r = b.resolvent_inv(ui - gamma * t, gamma)
            if Nu is not None:
                un = r - gamma * (b.N_inv(r) - Nu - lqx)
            else:
                un = r + gamma * lqx
            corr += b.L.rmatvec(r - ui)
            u_new.append(un)
        if M is not None:
            corr += M(q) - Mx
            n_M += 1
        x_new = q - gamma * P(corr)
        y_new = y - (p - q) / gamma
        res = residual([x_new, y_new, *u_new], [x, y, *u])
        x, y, u = x_new, y_new, u_new
        n += 1
        _check_finite(res, n)
        if callback is not None:
            callback(n, res, None, {"x": x, "y": y, "u": u, "p": p, "q": q})
        if res <= tol:
            termination = Termination.CONVERGED
            break
    return SolverReport(n, time.perf_counter() - t0, res, termination, x=x, y=y, u=u,
                        extras={"gamma": gamma, "chi": bound, "L": L, "beta": beta,
                                "evaluations": {"M": n_M, "C": n_C}})


@dataclass
class CompositeBlock:
    """Term ``(g_i [] l_i)(L_i x)`` of a composite objective.

    ``g_prox(v, step)`` evaluates ``prox_{step g_i}``; ``grad_ell_conj`` is
    ``grad l_i^*`` (cocoercive) or ``None`` when ``l_i`` is absent.
    """

    g_prox: Callable[[np.ndarray, float], np.ndarray]
    L: object
    grad_ell_conj: CocoerciveMap | None = None
    norm: float | None = None


def composite_opt_solve(f_prox, grad_h, blocks, V, gamma=None, x0=None, y0=None, u0=None,
                        tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, callback=None,
                        override_stepsize=False, objective=None, dim=None):
    """Minimize ``f(x) + h(x) + sum_i (g_i [] l_i)(L_i x)`` over ``x in V``.

    Specializes :func:`primal_dual_solve` with ``A = df``, ``C = grad h``,
    ``B_i = dg_i`` (its inverse resolvent computed by the Moreau
    decomposition from ``g_prox``) and ``D_i^{-1} = grad l_i^*``.
    `objective`, if given, is evaluated at the final primal iterate.
    """
    dual = []
    for b in blocks:
        g_prox = b.g_prox

        def res_inv(v, step, g_prox=g_prox):
            return prox_conjugate(g_prox, v, step)

        dual.append(DualBlock(res_inv, b.L, None, b.grad_ell_conj, b.norm))

    def A(v, step):
        return f_prox(v, step)

    report = primal_dual_solve(A, None, grad_h, V, dual, gamma, x0, y0, u0, tol, max_iter,
                               callback, override_stepsize, dim)
    if objective is not None:
        report.objective = float(objective(report.x))
    return report


def lstv_chi(alpha1, norm_L=2.0):
    """Step bound for the TV problem: ``chi(1/alpha1, ||D||)``.

    With ``||D|| = 2`` this is ``4 / (alpha1 + sqrt(alpha1^2 + 64))``.
    """
    return chi(1.0 / alpha1, norm_L)


def lstv_solve(instance, gamma=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
               callback=None, override_stepsize=False):
    """FPIHF for the box-constrained TV least-squares problem.

    The data term is lifted with ``w = A x`` so that ``V = ker T``,
    ``T(x, w) = A x - w``, and ``A`` only enters through projections onto
    ``V``, which use a cached Cholesky factor of ``Id + A A^T``. The step
    bound ``4 / (alpha1 + sqrt(alpha1^2 + 64))`` does not depend on ``||A||``.

    Returns a report whose ``x`` is the final primal iterate and whose
    ``objective`` is evaluated at its projection onto the box. ``extras``
    carries ``w``, ``y1``, ``y2`` and ``p1`` (the last box-feasible point).
    """
    bound = lstv_chi(instance.alpha1)
    if gamma is None:
        gamma = _default_gamma(bound)
    _check_gamma(gamma, bound, override_stepsize,
                 bound_name="4/(alpha1 + sqrt(alpha1^2 + 64))")
    t0 = time.perf_counter()
    fac = KernelFactorization(instance.A)
    A, z = instance.A, instance.z
    a1, a2 = instance.alpha1, instance.alpha2
    lo, hi = instance.lower, instance.upper
    N, K = instance.N, instance.K
    x = np.zeros(N)
    w = np.zeros(K)
    y1 = np.zeros(N)
    y2 = np.zeros(K)
    u = np.zeros(N - 1)
    p1 = x
    res = math.inf
    termination = Termination.ITERATION_CAP
    n = 0
    while n < max_iter:
        Dtu = discrete_gradient_adjoint(u)
        grad_w = a1 * (w - z)
        d = fac.apply_B(A @ Dtu - grad_w)
        p1 = np.clip(x + gamma * y1 - gamma * (Dtu - A.T @ d), lo, hi)
        p2 = w + gamma * y2 - gamma * (grad_w + d)
        e = fac.apply_B(A @ p1 - p2)
        q1 = p1 - A.T @ e
        q2 = p2 + e
        v = u / gamma + discrete_gradient(x)
        r = gamma * (v - prox_l1(v, a2 / gamma)) if a2 > 0 else np.zeros_like(v)
        u_new = r + gamma * discrete_gradient(q1 - x)
        s = discrete_gradient_adjoint(r - u)
        bs = fac.apply_B(A @ s)
        x_new = q1 - gamma * (s - A.T @ bs)
        w_new = q2 - gamma * bs
        y1_new = y1 - (p1 - q1) / gamma
        y2_new = y2 - (p2 - q2) / gamma
        res = residual((x_new, w_new, y1_new, y2_new), (x, w, y1, y2))
        x, w, y1, y2, u = x_new, w_new, y1_new, y2_new, u_new
        n += 1
        _check_finite(res, n)
        if callback is not None:
            callback(n, res, None, {"x": x, "w": w, "y1": y1, "y2": y2, "u": u, "p1": p1})
        if res <= tol:
            termination = Termination.CONVERGED
            break
    elapsed = time.perf_counter() - t0
    return SolverReport(
        n, elapsed, res, termination,
        objective=tv_objective(instance, instance.project(x)),
        x=x, y=np.concatenate([y1, y2]), u=u,
        extras={"w": w, "y1": y1, "y2": y2, "p1": p1, "gamma": gamma, "chi": bound},
    )


def fixed_point_certificate(instance, x, u, step=1e-3):
    """Optimality residual of a primal-dual pair for the TV problem.

    Returns the larger of the projected-gradient residual
    ``||x - P_box(x - step (alpha1 A^T (A x - z) + D^T u))||`` and the dual
    residual ``||u - clip(u + step D x, -alpha2, alpha2)||``; both vanish
    exactly at a primal-dual solution.
    """
    x = np.asarray(x, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    grad = instance.alpha1 * instance.A.T @ (instance.A @ x - instance.z)
    grad += discrete_gradient_adjoint(u)
    primal = np.linalg.norm(x - instance.project(x - step * grad))
    a2 = instance.alpha2
    dual = np.linalg.norm(u - np.clip(u + step * discrete_gradient(x), -a2, a2))
    return float(max(primal, dual))
