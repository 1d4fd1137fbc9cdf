"""Reference methods for the TV least-squares problem.

* :func:`condat_vu_solve`: the Condat-Vu primal-dual method, whose steps
  shrink as ``alpha1 ||A||^2`` grows.
* :func:`fpif_solve`: forward-partial inverse-forward splitting, which
  treats the data-fit gradient as a merely Lipschitz operator and therefore
  evaluates it twice per iteration. It runs on the same engine as
  :func:`fpihf.solvers.fpihf_solve`, with no cocoercive term.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError
from .opcore import (
    LipschitzMap,
    discrete_gradient,
    discrete_gradient_adjoint,
    project_box,
    prox_conjugate,
    prox_l1,
)
from .problems import objective as tv_objective
from .solvers import (
    DEFAULT_MAX_ITER,
    DEFAULT_STEP_FRACTION,
    DEFAULT_TOL,
    SolverReport,
    Termination,
    _check_finite,
    fpihf_solve,
    residual,
)
from .subspace import KernelFactorization, block_projector

__all__ = [
    "GRADIENT_NORM_BOUND",
    "CondatVuConfig",
    "condat_vu_autoconfig",
    "condat_vu_solve",
    "fpif_step_bound",
    "fpif_solve",
]

# ||D|| < 2 for every N; the bound is used in all step rules
GRADIENT_NORM_BOUND = 2.0
RHO_FRACTION = 0.99


@dataclass(frozen=True)
class CondatVuConfig:
    tau: float
    sigma: float
    rho: float

    def delta(self, alpha1, norm_A, norm_L=GRADIENT_NORM_BOUND):
        """``delta = 2 - alpha1 ||A||^2 / (2 (1/tau - sigma ||L||^2))``."""
        smooth = alpha1 * norm_A**2
        slack = 1.0 / self.tau - self.sigma * norm_L**2
        if smooth == 0.0:
            return 2.0
        if slack <= 0.0:
            return -math.inf
        return 2.0 - smooth / (2.0 * slack)

    def validate(self, alpha1, norm_A, norm_L=GRADIENT_NORM_BOUND):
        """Raise :class:`ConfigurationError` naming the first violated condition."""
        if not (self.tau > 0 and self.sigma > 0 and self.rho > 0):
            raise ConfigurationError("tau, sigma and rho must be positive")
        lhs = self.sigma * norm_L**2
        rhs = 1.0 / self.tau - alpha1 * norm_A**2 / 2.0
        # relative slack absorbs rounding when sigma is set by equality
        if lhs > rhs + 1e-12 * max(1.0, abs(rhs)):
            raise ConfigurationError(
                f"sigma ||L||^2 <= 1/tau - alpha1 ||A||^2 / 2 violated: {lhs!r} > {rhs!r}"
            )
        delta = self.delta(alpha1, norm_A, norm_L)
        if not delta > 0:
            raise ConfigurationError(f"delta > 0 violated: delta = {delta!r}")
        if not self.rho < delta:
            raise ConfigurationError(f"rho in ]0, delta[ violated: rho={self.rho!r}, delta={delta!r}")


def condat_vu_autoconfig(alpha1, norm_A, norm_L=GRADIENT_NORM_BOUND, tau_fraction=0.5, tau=None):
    """Step sizes satisfying the Condat-Vu condition with equality.

    ``tau`` defaults to ``tau_fraction * 2 / (alpha1 ||A||^2)`` (a fraction of
    its largest admissible value), ``sigma`` saturates
    ``sigma ||L||^2 = 1/tau - alpha1 ||A||^2 / 2`` and ``rho = 0.99 delta``.
    When ``alpha1 ||A||^2 == 0`` the primal bound is void and ``tau`` defaults
    to ``tau_fraction / ||L||``.
    """
    if not 0 < tau_fraction < 1:
        raise ValueError("tau_fraction must lie in ]0, 1[")
    smooth = alpha1 * norm_A**2
    if tau is None:
        if smooth > 0:
            tau = tau_fraction * 2.0 / smooth
        else:
            tau = tau_fraction / norm_L
    elif smooth > 0 and not 1.0 / tau > smooth / 2.0:
        raise ConfigurationError(
            f"1/tau > alpha1 ||A||^2 / 2 violated: {1.0 / tau!r} <= {smooth / 2.0!r}"
        )
    sigma = (1.0 / tau - smooth / 2.0) / norm_L**2
    cfg = CondatVuConfig(tau, sigma, 1.0)
    delta = cfg.delta(alpha1, norm_A, norm_L)
    return CondatVuConfig(tau, sigma, RHO_FRACTION * delta)


def condat_vu_solve(instance, config=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                    callback=None, override_stepsize=False, tau_fraction=0.5):
    """Condat-Vu iteration for the TV problem::

        p = P_box(x - tau (alpha1 A^T (A x - z) + D^T u))
        q = sigma (Id - prox_{alpha2 ||.||_1 / sigma})(u / sigma + D (2 p - x))
        x <- x + rho (p - x)
        u <- u + rho (q - u)

    Without `config`, steps come from :func:`condat_vu_autoconfig`.
    """
    norm_A = instance.norm_A
    if config is None:
        config = condat_vu_autoconfig(instance.alpha1, norm_A, tau_fraction=tau_fraction)
    if not override_stepsize:
        config.validate(instance.alpha1, norm_A)
    tau, sigma, rho = config.tau, config.sigma, config.rho
    A, z = instance.A, instance.z
    a1, a2 = instance.alpha1, instance.alpha2
    lo, hi = instance.lower, instance.upper
    t0 = time.perf_counter()
    x = np.zeros(instance.N)
    u = np.zeros(instance.N - 1)
    res = math.inf
    termination = Termination.ITERATION_CAP
    n = 0
    while n < max_iter:
        p = np.clip(x - tau * (a1 * (A.T @ (A @ x - z)) + discrete_gradient_adjoint(u)), lo, hi)
        v = u / sigma + discrete_gradient(2.0 * p - x)
        q = sigma * (v - prox_l1(v, a2 / sigma)) if a2 > 0 else np.zeros_like(v)
        x_new = x + rho * (p - x)
        u_new = u + rho * (q - u)
        res = residual((x_new, u_new), (x, u))
        x, u = x_new, u_new
        n += 1
        _check_finite(res, n)
        if callback is not None:
            callback(n, res, None, {"x": x, "u": u})
        if res <= tol:
            termination = Termination.CONVERGED
            break
    return SolverReport(
        n, time.perf_counter() - t0, res, termination,
        objective=tv_objective(instance, project_box(x, lo, hi)), x=x, u=u,
        extras={"config": config},
    )


def fpif_step_bound(alpha1, norm_L=GRADIENT_NORM_BOUND):
    """``1 / max(||D||, alpha1)``, the FPIF step-size bound."""
    return 1.0 / max(norm_L, alpha1)


def fpif_operators(instance):
    """Lifted operators on ``(x, w, u)`` in ``R^N x R^K x R^(N-1)``.

    Returns ``(resolvent, B, V)``: the resolvent of
    ``N_box x {0} x d(alpha2 ||.||_1)^*``, the monotone Lipschitz map
    ``(x, w, u) -> (D^T u, alpha1 (w - z), -D x)`` and the projector onto
    ``ker T x R^(N-1)``.
    """
    N, K = instance.N, instance.K
    a1, a2 = instance.alpha1, instance.alpha2
    lo, hi = instance.lower, instance.upper
    z = instance.z

    def resolvent(v, step):
        out = np.empty_like(v)
        out[:N] = np.clip(v[:N], lo, hi)
        out[N:N + K] = v[N:N + K]
        ub = v[N + K:]
        out[N + K:] = prox_conjugate(lambda s, t: prox_l1(s, a2 * t), ub, step) if a2 > 0 else 0.0
        return out

    def lipschitz_part(v):
        out = np.empty_like(v)
        out[:N] = discrete_gradient_adjoint(v[N + K:])
        out[N:N + K] = a1 * (v[N:N + K] - z)
        out[N + K:] = -discrete_gradient(v[:N])
        return out

    B = LipschitzMap(lipschitz_part, max(GRADIENT_NORM_BOUND, a1))
    V = block_projector(KernelFactorization(instance.A).projector(), N - 1)
    return resolvent, B, V


def fpif_solve(instance, gamma=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
               callback=None, override_stepsize=False):
    """FPIF for the TV problem; ``gamma`` must lie in ``]0, 1/max(||D||, alpha1)[``."""
    bound = fpif_step_bound(instance.alpha1)
    if gamma is None:
        gamma = DEFAULT_STEP_FRACTION * bound
    if not gamma > 0:
        raise ConfigurationError(f"gamma={gamma!r} violates gamma > 0")
    if gamma >= bound and not override_stepsize:
        raise ConfigurationError(
            f"gamma={gamma!r} violates gamma < 1/max(||D||, alpha1)={bound!r}"
        )
    t0 = time.perf_counter()
    resolvent, B, V = fpif_operators(instance)
    N, K = instance.N, instance.K
    report = fpihf_solve(resolvent, B, None, V, gamma, tol=tol, max_iter=max_iter,
                         callback=callback, override_stepsize=True)
    v = report.x
    report.wall_time_s = time.perf_counter() - t0
    report.x = v[:N].copy()
    report.u = v[N + K:].copy()
    report.extras["w"] = v[N:N + K].copy()
    report.extras["stacked"] = v
    report.objective = tv_objective(instance, instance.project(report.x))
    return report
